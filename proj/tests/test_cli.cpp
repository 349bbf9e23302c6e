#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "cli.hpp"
#include "sgak/error.hpp"
#include "sgak/gak.hpp"
#include "sgak/manifest.hpp"
#include "test_util.hpp"

namespace sgak::cli {
namespace {

namespace fs = std::filesystem;
using testing::code_of;

const fs::path kFixtures = SGAK_FIXTURE_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return (kFixtures / name).string(); }

class CliTest : public ::testing::Test {
 protected:
  fs::path dir_ = fs::temp_directory_path() / ("sgak_cli_" + std::to_string(::getpid()));
  void SetUp() override { fs::create_directories(dir_); }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }
};

TEST(FormatReal, TwelveDecimalsOrScientific) {
  EXPECT_EQ(format_real(1.0), "1.000000000000");
  EXPECT_EQ(format_real(0.0), "0.000000000000");
  EXPECT_EQ(format_real(-0.25), "-0.250000000000");
  EXPECT_EQ(format_real(1.5e-9), "1.500000000000e-09");
  EXPECT_EQ(format_real(2e7), "2.000000000000e+07");
}

TEST(Config, TextParsing) {
  CliConfig cfg;
  apply_config_text("# comment\n\ndelta = 2.5\nnormalize_gak=true\nkernel_mode=shared-only\n"
                    "label_single_slice_mode=closed-form\nseed=7\ncell_cap=100\n",
                    cfg);
  EXPECT_EQ(cfg.delta, 2.5);
  EXPECT_TRUE(cfg.normalize_gak);
  EXPECT_EQ(cfg.kernel_mode, KernelMode::SharedOnly);
  EXPECT_EQ(cfg.label_single_slice_mode, LabelSingleSliceMode::ClosedForm);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.cell_cap, 100u);
  EXPECT_EQ(cfg.kernel().cell_cap, 100u);
}

TEST(Config, ErrorsNameTheKey) {
  CliConfig cfg;
  try {
    apply_config_text("bogus=1\n", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  try {
    apply_config_setting("delta", "abc", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { apply_config_text("no equals sign\n", cfg); }), ErrorCode::kFormatError);
}

TEST_F(CliTest, FlagsOverrideConfigFileOverrideDefaults) {
  write("cfg.txt", "delta=2\nseed=9\n");
  const auto r = invoke({"--config", tmp("cfg.txt"), "--delta", "3", "selftest", "--list"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("delta=3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("seed=9"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("cell_cap=16384"), std::string::npos) << r.err;
}

TEST_F(CliTest, BadConfigFileIsFormatError) {
  write("cfg.txt", "delta=2\nunknown_key=1\n");
  const auto r = invoke({"--config", tmp("cfg.txt"), "selftest", "--list"});
  EXPECT_EQ(r.code, kExitFormat);
  EXPECT_NE(r.err.find("unknown_key"), std::string::npos);
}

TEST(KernelEval, IdenticalDocsNormalizeToOne) {
  const auto r = invoke({"kernel-eval", "--manifest", fixture("small_manifest.jsonl"), "--doc-a", "x",
                         "--doc-b", "y", "--show-path"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("normalized_gak=1.000000000000\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("raw_gak=1.870533196787\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("path=1:1,2:2\n"), std::string::npos) << r.out;
}

TEST(KernelEval, SingleSliceMatchesClosedForm) {
  const auto r = invoke({"--json", "kernel-eval", "--manifest", fixture("small_manifest.jsonl"), "--doc-a",
                         "z", "--doc-b", "u"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = r.json();
  EXPECT_NEAR(j["raw_gak"].get<double>(), single_slice_gak(0.6, 1.0), 1e-7);
  EXPECT_EQ(j["n"], 1);
}

TEST(KernelEval, MissingDocIsUserError) {
  const auto r = invoke({"kernel-eval", "--manifest", fixture("small_manifest.jsonl"), "--doc-a", "x",
                         "--doc-b", "nope"});
  EXPECT_EQ(r.code, kExitUserInput);
  EXPECT_NE(r.err.find("nope"), std::string::npos);
}

TEST_F(CliTest, KernelEvalMalformedManifestIsFormatError) {
  write("bad.jsonl", "{\"doc_id\": \"x\"\n");
  const auto r = invoke({"kernel-eval", "--manifest", tmp("bad.jsonl"), "--doc-a", "x", "--doc-b", "x"});
  EXPECT_EQ(r.code, kExitFormat);
}

TEST(Selftest, PassesAndIsDeterministic) {
  const auto a = invoke({"selftest"});
  const auto b = invoke({"selftest"});
  EXPECT_EQ(a.code, kExitOk) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("passed=true"), std::string::npos);
}

TEST(Selftest, InjectedFaultFailsNamingSuite) {
  const auto r = invoke({"--json", "selftest", "--inject-fault", "dp-boundary"});
  EXPECT_EQ(r.code, kExitInternal);
  const auto j = r.json();
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_EQ(j["suites"][0]["suite"], "dp_vs_bruteforce");
  EXPECT_EQ(j["suites"][0]["status"], "fail");
}

TEST(Selftest, ListDoesNotRun) {
  const auto r = invoke({"selftest", "--list"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("suite=gram_spectra"), std::string::npos);
  EXPECT_EQ(r.out.find("status"), std::string::npos);
}

TEST_F(CliTest, IndexThenQuerySelfHit) {
  const auto idx = tmp("synthetic.sgix");
  ASSERT_EQ(invoke({"index", "--manifest", fixture("synthetic_manifest.jsonl"), "--out", idx}).code, kExitOk);
  const auto r = invoke({"--json", "query", "--index", idx, "--manifest", fixture("synthetic_manifest.jsonl"),
                         "--doc", "doc07", "-k", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["results"][0]["doc_id"], "doc07");
  EXPECT_NEAR(j["results"][0]["score"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(j["results"].size(), 3u);
}

TEST_F(CliTest, QueryByVector) {
  const auto r = invoke({"query", "--index", fixture("gold_at_rank_3.sgix"), "--vector",
                         encode_f32_base64(testing::vec({0, 0, 1})), "-k", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("rank=1 doc_id=d4 score=1.000000000000"), std::string::npos) << r.out;
}

TEST_F(CliTest, QueryErrors) {
  EXPECT_EQ(invoke({"query", "--index", fixture("gold_at_rank_3.sgix"), "--vector",
                    encode_f32_base64(testing::vec({1, 0}))})
                .code,
            kExitUserInput);
  write("junk.sgix", "not an index at all");
  EXPECT_EQ(invoke({"query", "--index", tmp("junk.sgix"), "--vector", encode_f32_base64(testing::vec({1, 0, 0}))})
                .code,
            kExitFormat);
  EXPECT_EQ(invoke({"query", "--index", tmp("missing.sgix")}).code, kExitUserInput);
}

TEST(EvalRecall, GoldAtRankThree) {
  const auto r = invoke({"--json", "eval-recall", "--index", fixture("gold_at_rank_3.sgix"), "--cases",
                         fixture("gold_at_rank_3_cases.jsonl"), "--ks", "1,5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["recall@1"].get<double>(), 0.0);
  EXPECT_EQ(j["recall@5"].get<double>(), 1.0);
}

TEST(EvalWinoground, Fixture) {
  const auto r = invoke({"eval-winoground", "--input", fixture("winoground.jsonl")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("text=0.750000000000\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("image=0.500000000000\n"), std::string::npos);
  EXPECT_NE(r.out.find("group=0.500000000000\n"), std::string::npos);
}

TEST_F(CliTest, EvalWinogroundMalformed) {
  write("w.jsonl", "{\"s\": [[1, 0]]}\n");
  EXPECT_EQ(invoke({"eval-winoground", "--input", tmp("w.jsonl")}).code, kExitFormat);
}

TEST_F(CliTest, TrainProjectorTraceNonIncreasing) {
  const auto out = tmp("p.json");
  const auto trace = tmp("trace.tsv");
  const auto r = invoke({"--json", "train-projector", "--manifest", fixture("synthetic_manifest.jsonl"),
                         "--hidden", fixture("synthetic_hidden.jsonl"), "--out", out, "--trace", trace,
                         "--steps", "60"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(trace);
  std::string line;
  std::size_t step = 0;
  double prev = INFINITY;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    EXPECT_EQ(std::stoul(line.substr(0, tab)), step++);
    const double loss = std::stod(line.substr(tab + 1));
    EXPECT_LE(loss, prev);
    prev = loss;
  }
  EXPECT_EQ(step, 61u);
  const auto p = read_projector(out);
  EXPECT_EQ(p.weights.rows(), 16);
  EXPECT_EQ(p.weights.cols(), 32);

  // The projector indexes the hidden vectors it was trained on.
  const auto idx = tmp("projected.sgix");
  const auto ix = invoke({"--json", "index", "--manifest", fixture("synthetic_manifest.jsonl"), "--hidden",
                          fixture("synthetic_hidden.jsonl"), "--projector", out, "--out", idx});
  ASSERT_EQ(ix.code, kExitOk) << ix.err;
  EXPECT_EQ(ix.json()["dim"], 16);
  // Pooled slice vectors have the wrong dimension for this projector.
  EXPECT_EQ(invoke({"index", "--manifest", fixture("synthetic_manifest.jsonl"), "--projector", out, "--out", idx})
                .code,
            kExitUserInput);
}

TEST_F(CliTest, ProjectorRoundTrip) {
  Projector p{Eigen::MatrixXd::Random(3, 5)};
  write_projector(p, dir_ / "p.json");
  EXPECT_EQ(read_projector(dir_ / "p.json").weights, p.weights);
}

TEST(Usage, ExitCodes) {
  EXPECT_EQ(invoke({}).code, kExitUserInput);
  EXPECT_EQ(invoke({"no-such-command"}).code, kExitUserInput);
  EXPECT_EQ(invoke({"--delta", "-1", "selftest", "--list"}).code, kExitUserInput);
  EXPECT_EQ(invoke({"kernel-eval", "--manifest", "x"}).code, kExitUserInput);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

}  // namespace
}  // namespace sgak::cli
