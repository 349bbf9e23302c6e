#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sgak/error.hpp"
#include "sgak/gak.hpp"
#include "sgak/kernel.hpp"
#include "sgak/manifest.hpp"
#include "sgak/retrieval.hpp"
#include "sgak/selftest.hpp"

namespace sgak::cli {

namespace {

using Json = nlohmann::ordered_json;

// Thrown for problems with the invocation itself (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::kFormatError, fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view kernel_mode_name(KernelMode m) {
  return m == KernelMode::Triple ? "triple" : "shared-only";
}

std::string_view label_mode_name(LabelSingleSliceMode m) {
  return m == LabelSingleSliceMode::Cosine ? "cosine" : "closed-form";
}

std::string render_scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_null()) return "null";
  return v.dump();
}

// key=value rendering of a command result. Arrays of objects become one line
// per element; arrays of scalars are comma-joined.
void render_kv(const Json& result, std::ostream& out) {
  for (const auto& [key, value] : result.items()) {
    if (key == "command") continue;
    if (value.is_array() && !value.empty() && value.front().is_object()) {
      for (const auto& row : value) {
        std::string line;
        for (const auto& [k, v] : row.items()) {
          if (!line.empty()) line += ' ';
          line += k + "=" + render_scalar(v);
        }
        out << line << '\n';
      }
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += render_scalar(v);
      }
      out << key << '=' << joined << '\n';
    } else {
      out << key << '=' << render_scalar(value) << '\n';
    }
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormatError:
    case ErrorCode::kBadMagic:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kChecksumMismatch:
    case ErrorCode::kDegenerateVector:
    case ErrorCode::kMalformedExample:
      return kExitFormat;
    case ErrorCode::kDivergenceDetected:
      return kExitInternal;
    default:
      return kExitUserInput;
  }
}

struct CommonOptions {
  std::string config_path;
  std::optional<double> delta;
  std::optional<bool> normalize_gak;
  std::optional<std::string> kernel_mode;
  std::optional<std::string> label_mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cell_cap;
  bool json = false;
  bool verbose = false;
};

CliConfig resolve_config(const CommonOptions& o, std::ostream& err) {
  CliConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw Error(ErrorCode::kIoFailure, fmt::format("cannot open config '{}'", o.config_path));
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(buf.str(), cfg);
  }
  // A bad flag value is a user-input error; a bad config file is a format error.
  try {
    if (o.delta) apply_config_setting("delta", fmt::format("{}", *o.delta), cfg);
    if (o.normalize_gak) cfg.normalize_gak = *o.normalize_gak;
    if (o.kernel_mode) apply_config_setting("kernel_mode", *o.kernel_mode, cfg);
    if (o.label_mode) apply_config_setting("label_single_slice_mode", *o.label_mode, cfg);
    if (o.seed) cfg.seed = *o.seed;
    if (o.cell_cap) apply_config_setting("cell_cap", std::to_string(*o.cell_cap), cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
  err << "effective config: " << describe(cfg) << '\n';
  return cfg;
}

PoolingPolicy parse_pool(const std::string& s) {
  if (s == "avg") return PoolingPolicy::AveragePool;
  if (s == "last") return PoolingPolicy::LastToken;
  throw UsageError(fmt::format("unknown pooling policy '{}' (avg|last)", s));
}

const ManifestDocument& require_doc(const Manifest& m, const std::string& id) {
  const auto* doc = m.find(id);
  if (doc == nullptr) throw UsageError(fmt::format("doc_id '{}' not found in manifest", id));
  return *doc;
}

// One vector per document: pooled slice vectors, optionally projected.
Vector represent(const InterleavedSequence& seq, PoolingPolicy pool,
                 const std::optional<Projector>& projector) {
  std::vector<Vector> tokens;
  tokens.reserve(seq.size());
  for (const auto& s : seq.slices) tokens.push_back(s.flattened());
  Vector pooled = pool_representation(tokens, pool);
  if (projector) return projector->apply(pooled);
  return pooled;
}

InterleavedSequence query_sequence(const InterleavedSequence& seq, std::optional<std::size_t> captions,
                                   std::optional<std::size_t> images) {
  if (!captions && !images) return seq;
  return make_interleaved_query(seq, captions.value_or(0), images.value_or(0));
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad k value '{}'", item));
    }
  }
  if (ks.empty()) throw UsageError("no k values given");
  return ks;
}

Json ranking_json(const std::vector<ScoredDoc>& ranking) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    rows.push_back({{"rank", r + 1}, {"doc_id", ranking[r].doc_id}, {"score", ranking[r].score}});
  }
  return rows;
}

Json path_json(const AlignmentPath& path) {
  std::string s;
  for (const auto& [i, j] : path.pairs) {
    if (!s.empty()) s += ',';
    s += fmt::format("{}:{}", i, j);
  }
  return s;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, fmt::format("cannot open '{}'", path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

Json parse_json_line(const std::string& line, std::size_t line_no, const std::string& file) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kFormatError, fmt::format("{} line {}: {}", file, line_no, e.what()));
  }
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

KernelConfig CliConfig::kernel() const {
  KernelConfig k;
  k.delta = delta;
  k.normalize_gak = normalize_gak;
  k.kernel_mode = kernel_mode;
  k.label_single_slice_mode = label_single_slice_mode;
  k.cell_cap = cell_cap;
  return k;
}

void apply_config_setting(const std::string& key, const std::string& value, CliConfig& cfg) {
  auto bad = [&](std::string_view why) {
    return Error(ErrorCode::kFormatError, fmt::format("config key '{}': {} ('{}')", key, why, value));
  };
  if (key == "delta") {
    double d = 0.0;
    try {
      std::size_t used = 0;
      d = std::stod(value, &used);
      if (used != value.size()) throw bad("not a number");
    } catch (const std::logic_error&) {
      throw bad("not a number");
    }
    if (!(d > 0.0) || !std::isfinite(d)) throw bad("must be a positive real");
    cfg.delta = d;
  } else if (key == "normalize_gak") {
    cfg.normalize_gak = parse_bool(key, value);
  } else if (key == "kernel_mode") {
    if (value == "triple" || value == "Triple") cfg.kernel_mode = KernelMode::Triple;
    else if (value == "shared-only" || value == "SharedOnly") cfg.kernel_mode = KernelMode::SharedOnly;
    else throw bad("expected triple or shared-only");
  } else if (key == "label_single_slice_mode") {
    if (value == "cosine" || value == "Cosine") cfg.label_single_slice_mode = LabelSingleSliceMode::Cosine;
    else if (value == "closed-form" || value == "ClosedForm")
      cfg.label_single_slice_mode = LabelSingleSliceMode::ClosedForm;
    else throw bad("expected cosine or closed-form");
  } else if (key == "seed" || key == "cell_cap") {
    unsigned long long v = 0;
    try {
      std::size_t used = 0;
      if (!value.empty() && value.front() == '-') throw bad("must be non-negative");
      v = std::stoull(value, &used);
      if (used != value.size()) throw bad("not an integer");
    } catch (const std::logic_error&) {
      throw bad("not an integer");
    }
    if (key == "seed") {
      cfg.seed = v;
    } else {
      if (v == 0) throw bad("must be >= 1");
      cfg.cell_cap = static_cast<std::size_t>(v);
    }
  } else {
    throw Error(ErrorCode::kFormatError, fmt::format("unknown config key '{}'", key));
  }
}

void apply_config_text(const std::string& text, CliConfig& cfg) {
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kFormatError, fmt::format("config line {}: expected key=value", line_no));
    }
    apply_config_setting(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), cfg);
  }
}

std::string describe(const CliConfig& cfg) {
  return fmt::format("delta={} normalize_gak={} kernel_mode={} label_single_slice_mode={} seed={} cell_cap={}",
                     cfg.delta, cfg.normalize_gak, kernel_mode_name(cfg.kernel_mode),
                     label_mode_name(cfg.label_single_slice_mode), cfg.seed, cfg.cell_cap);
}

std::string format_real(double v) {
  if (!std::isfinite(v)) return fmt::format("{}", v);
  const double a = std::abs(v);
  if (a == 0.0 || (a >= 1e-6 && a < 1e6)) return fmt::format("{:.12f}", v);
  return fmt::format("{:.12e}", v);
}

Projector read_projector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, fmt::format("cannot open projector '{}'", path.string()));
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kFormatError, fmt::format("projector '{}': {}", path.string(), e.what()));
  }
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("weights") || !j["weights"].is_array()) {
    throw Error(ErrorCode::kFormatError, "projector needs rows, cols and weights");
  }
  const auto rows = j["rows"].get<Eigen::Index>();
  const auto cols = j["cols"].get<Eigen::Index>();
  if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(j["weights"].size()) != rows * cols) {
    throw Error(ErrorCode::kFormatError, "projector weights do not match rows*cols");
  }
  Projector p{Eigen::MatrixXd(rows, cols)};
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) p.weights(r, c) = j["weights"][static_cast<std::size_t>(r * cols + c)].get<double>();
  }
  return p;
}

void write_projector(const Projector& p, const std::filesystem::path& path) {
  Json j;
  j["rows"] = p.weights.rows();
  j["cols"] = p.weights.cols();
  Json w = Json::array();
  for (Eigen::Index r = 0; r < p.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.weights.cols(); ++c) w.push_back(p.weights(r, c));
  }
  j["weights"] = std::move(w);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, fmt::format("cannot write projector '{}'", path.string()));
  out << j.dump() << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global alignment kernels, structure-induced loss and retrieval"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  double delta = 1.0;
  bool normalize = false;
  std::string kernel_mode;
  std::string label_mode;
  std::uint64_t seed = 42;
  std::size_t cell_cap = 16384;
  app.add_option("--config", common.config_path, "Flat key=value config file");
  auto* delta_opt = app.add_option("--delta", delta, "Kernel bandwidth hyperparameter (> 0)");
  auto* norm_opt = app.add_flag("--normalize-gak", normalize, "Report K(x,y)/sqrt(K(x,x)K(y,y))");
  auto* mode_opt = app.add_option("--kernel-mode", kernel_mode, "triple | shared-only");
  auto* label_opt = app.add_option("--label-mode", label_mode, "cosine | closed-form");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  auto* cap_opt = app.add_option("--cell-cap", cell_cap, "Maximum n*m DP cells");
  app.add_flag("--json", common.json, "Emit one JSON object instead of key=value lines");
  app.add_flag("-v,--verbose", common.verbose, "Debug logging on standard error");

  // kernel-eval
  auto* kernel_eval = app.add_subcommand("kernel-eval", "GAK, normalized GAK and mean-pairwise baseline");
  std::string ke_manifest, ke_a, ke_b;
  bool ke_path = false;
  kernel_eval->add_option("--manifest", ke_manifest)->required();
  kernel_eval->add_option("--doc-a", ke_a)->required();
  kernel_eval->add_option("--doc-b", ke_b)->required();
  kernel_eval->add_flag("--show-path", ke_path, "Print the max-product alignment (display only)");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "Run the oracle suites");
  bool st_list = false;
  std::string st_fault;
  selftest->add_flag("--list", st_list, "List suite names without running");
  selftest->add_option("--inject-fault", st_fault, "Test hook: dp-boundary")->group("");

  // index
  auto* index = app.add_subcommand("index", "Build an SGIX index from a manifest");
  std::string ix_manifest, ix_out, ix_pool = "avg", ix_projector, ix_hidden;
  index->add_option("--manifest", ix_manifest)->required();
  index->add_option("--out", ix_out)->required();
  index->add_option("--pool", ix_pool, "avg | last");
  index->add_option("--projector", ix_projector, "Projector JSON from train-projector");
  index->add_option("--hidden", ix_hidden, "JSONL of {doc_id, hidden}; indexes these vectors instead of pooled slices");

  // query
  auto* query = app.add_subcommand("query", "Top-k query against an index");
  std::string q_index, q_manifest, q_doc, q_vector, q_pool = "avg", q_projector;
  std::size_t q_k = 5;
  std::optional<std::size_t> q_captions, q_images;
  bool q_gak = false;
  query->add_option("--index", q_index);
  query->add_option("--manifest", q_manifest, "Manifest holding the query document (and the corpus with --gak)");
  query->add_option("--doc", q_doc, "Query document id");
  query->add_option("--vector", q_vector, "Query vector as base64 little-endian f32");
  query->add_option("-k", q_k);
  query->add_option("--captions", q_captions, "Keep the first N captions of the query document");
  query->add_option("--images", q_images, "Keep the first N images of the query document");
  query->add_option("--pool", q_pool, "avg | last");
  query->add_option("--projector", q_projector);
  query->add_flag("--gak", q_gak, "Rank manifest documents by GAK instead of the index (slow)");

  // eval-recall
  auto* eval_recall = app.add_subcommand("eval-recall", "Recall@k over a case file");
  std::string er_index, er_cases, er_manifest, er_ks = "1,5,10", er_pool = "avg", er_projector;
  bool er_gak = false;
  eval_recall->add_option("--index", er_index);
  eval_recall->add_option("--cases", er_cases)->required();
  eval_recall->add_option("--manifest", er_manifest, "Resolves query_doc cases (and the corpus with --gak)");
  eval_recall->add_option("--ks", er_ks, "Comma-separated k values");
  eval_recall->add_option("--pool", er_pool, "avg | last");
  eval_recall->add_option("--projector", er_projector);
  eval_recall->add_flag("--gak", er_gak, "Rank by GAK over the manifest (slow)");

  // eval-winoground
  auto* eval_wino = app.add_subcommand("eval-winoground", "Text/Image/Group scores");
  std::string ew_input;
  eval_wino->add_option("--input", ew_input)->required();

  // train-projector
  auto* train = app.add_subcommand("train-projector", "Fit a linear retrieval projector on the structure loss");
  std::string tp_manifest, tp_hidden, tp_out, tp_trace, tp_pool = "avg";
  std::size_t tp_steps = 200;
  double tp_lr = 0.5;
  Eigen::Index tp_output_dim = 16;
  std::size_t tp_views = 0;
  train->add_option("--manifest", tp_manifest)->required();
  train->add_option("--hidden", tp_hidden, "JSONL of {doc_id, cut, hidden}; defines the batch");
  train->add_option("--out", tp_out)->required();
  train->add_option("--trace", tp_trace, "Loss trace file (step<TAB>loss)");
  train->add_option("--steps", tp_steps);
  train->add_option("--lr", tp_lr);
  train->add_option("--output-dim", tp_output_dim);
  train->add_option("--views-per-doc", tp_views, "Sample this many prefix cuts per document (0 = full documents)");
  train->add_option("--pool", tp_pool, "avg | last (hidden vectors from slices when --hidden is absent)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUserInput;
  }

  if (delta_opt->count() > 0) common.delta = delta;
  if (norm_opt->count() > 0) common.normalize_gak = normalize;
  if (mode_opt->count() > 0) common.kernel_mode = kernel_mode;
  if (label_opt->count() > 0) common.label_mode = label_mode;
  if (seed_opt->count() > 0) common.seed = seed;
  if (cap_opt->count() > 0) common.cell_cap = cell_cap;

  const auto previous_level = spdlog::get_level();
  spdlog::set_level(common.verbose ? spdlog::level::debug : spdlog::level::warn);
  struct LevelGuard {
    spdlog::level::level_enum level;
    ~LevelGuard() { spdlog::set_level(level); }
  } guard{previous_level};

  Json result;
  bool ok = true;
  try {
    const CliConfig cfg = resolve_config(common, err);
    const KernelConfig kcfg = cfg.kernel();

    if (*kernel_eval) {
      result["command"] = "kernel-eval";
      const Manifest m = read_manifest(ke_manifest);
      const auto& a = require_doc(m, ke_a).sequence;
      const auto& b = require_doc(m, ke_b).sequence;
      KernelConfig raw = kcfg;
      raw.normalize_gak = false;
      KernelConfig norm = kcfg;
      norm.normalize_gak = true;
      result["doc_a"] = ke_a;
      result["doc_b"] = ke_b;
      result["n"] = a.size();
      result["m"] = b.size();
      result["sigma"] = sigma(a.size(), b.size(), cfg.delta);
      result["raw_gak"] = gak_forward(a, b, raw);
      result["normalized_gak"] = gak_forward(a, b, norm);
      result["mean_pairwise"] = mean_pairwise_similarity(a, b, kcfg);
      if (ke_path) result["path"] = path_json(best_alignment(a, b, kcfg));
    } else if (*selftest) {
      result["command"] = "selftest";
      Json suites = Json::array();
      if (st_list) {
        for (const auto& name : selftest_suite_names()) suites.push_back({{"suite", name}});
        result["suites"] = std::move(suites);
      } else {
        SelftestOptions options;
        options.seed = cfg.seed;
        options.delta = cfg.delta;
        if (!st_fault.empty()) {
          if (st_fault != "dp-boundary") throw UsageError(fmt::format("unknown fault '{}'", st_fault));
          options.faults.boundary_flip = true;
        }
        for (const auto& r : run_selftest(options)) {
          ok = ok && r.passed;
          suites.push_back({{"suite", r.name},
                            {"status", r.passed ? "pass" : "fail"},
                            {"worst_error", r.worst_error},
                            {"detail", r.detail}});
        }
        result["suites"] = std::move(suites);
        result["passed"] = ok;
      }
    } else if (*index) {
      result["command"] = "index";
      const Manifest m = read_manifest(ix_manifest);
      const auto pool = parse_pool(ix_pool);
      std::optional<Projector> projector;
      if (!ix_projector.empty()) projector = read_projector(ix_projector);
      std::vector<IndexInput> inputs;
      if (!ix_hidden.empty()) {
        const auto lines = read_lines(ix_hidden);
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (blank(lines[i])) continue;
          const Json h = parse_json_line(lines[i], i + 1, ix_hidden);
          if (!h.is_object() || !h.contains("doc_id") || !h.contains("hidden")) {
            throw Error(ErrorCode::kFormatError,
                        fmt::format("{} line {}: needs doc_id and hidden", ix_hidden, i + 1));
          }
          const auto& doc = require_doc(m, h["doc_id"].get<std::string>());
          Vector v = decode_f32_base64(h["hidden"].get<std::string>());
          inputs.push_back({doc.sequence.doc_id, projector ? projector->apply(v) : v, doc.meta});
        }
      } else {
        for (const auto& doc : m.documents) {
          inputs.push_back({doc.sequence.doc_id, represent(doc.sequence, pool, projector), doc.meta});
        }
      }
      if (inputs.empty()) throw UsageError("manifest has no documents");
      const auto idx = RetrievalIndex::build(inputs, fingerprint(kcfg));
      save_index(idx, ix_out);
      result["entries"] = idx.size();
      result["dim"] = idx.dim();
      result["fingerprint"] = fmt::format("{:016x}", idx.config_fingerprint());
      result["out"] = ix_out;
    } else if (*query) {
      result["command"] = "query";
      if (q_k < 1) throw UsageError("-k must be >= 1");
      const auto pool = parse_pool(q_pool);
      std::optional<Projector> projector;
      if (!q_projector.empty()) projector = read_projector(q_projector);
      std::vector<ScoredDoc> ranking;
      if (q_gak) {
        if (q_manifest.empty() || q_doc.empty()) throw UsageError("--gak needs --manifest and --doc");
        const Manifest m = read_manifest(q_manifest);
        const auto seq = query_sequence(require_doc(m, q_doc).sequence, q_captions, q_images);
        std::vector<InterleavedSequence> corpus;
        for (const auto& d : m.documents) corpus.push_back(d.sequence);
        ranking = query_topk_gak(corpus, seq, q_k, kcfg);
      } else {
        if (q_index.empty()) throw UsageError("--index is required unless --gak is given");
        const auto idx = load_index(q_index);
        Vector qv;
        if (!q_vector.empty()) {
          qv = decode_f32_base64(q_vector);
        } else if (!q_manifest.empty() && !q_doc.empty()) {
          const Manifest m = read_manifest(q_manifest);
          qv = represent(query_sequence(require_doc(m, q_doc).sequence, q_captions, q_images), pool,
                         projector);
        } else {
          throw UsageError("give --vector, or --manifest with --doc");
        }
        ranking = query_topk(idx, qv, q_k);
      }
      result["k"] = q_k;
      result["results"] = ranking_json(ranking);
    } else if (*eval_recall) {
      result["command"] = "eval-recall";
      const auto ks = parse_ks(er_ks);
      const auto pool = parse_pool(er_pool);
      std::optional<Projector> projector;
      if (!er_projector.empty()) projector = read_projector(er_projector);
      std::optional<Manifest> manifest;
      if (!er_manifest.empty()) manifest = read_manifest(er_manifest);
      std::vector<EvalCase> cases;
      std::vector<std::string> labels;
      const auto lines = read_lines(er_cases);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const Json c = parse_json_line(lines[i], i + 1, er_cases);
        const std::string where = fmt::format("{} line {}", er_cases, i + 1);
        if (!c.is_object() || !c.contains("gold") || !c["gold"].is_array() || c["gold"].empty()) {
          throw Error(ErrorCode::kFormatError, where + ": needs a non-empty 'gold' array");
        }
        EvalCase ec;
        for (const auto& g : c["gold"]) {
          if (!g.is_string()) throw Error(ErrorCode::kFormatError, where + ": gold ids must be strings");
          ec.gold_doc_ids.insert(g.get<std::string>());
        }
        std::optional<std::size_t> captions, images;
        if (c.contains("captions")) captions = c["captions"].get<std::size_t>();
        if (c.contains("images")) images = c["images"].get<std::size_t>();
        if (c.contains("query") && c["query"].is_string()) {
          if (er_gak) throw UsageError(where + ": --gak needs query_doc cases");
          ec.query = RepresentationVector{fmt::format("case{}", i + 1), 0,
                                          decode_f32_base64(c["query"].get<std::string>())};
          labels.push_back(fmt::format("case{}", i + 1));
        } else if (c.contains("query_doc") && c["query_doc"].is_string()) {
          if (!manifest) throw UsageError(where + ": query_doc cases need --manifest");
          const std::string id = c["query_doc"].get<std::string>();
          const auto seq = query_sequence(require_doc(*manifest, id).sequence, captions, images);
          if (er_gak) {
            ec.query = seq;
          } else {
            ec.query = RepresentationVector{id, seq.size(), represent(seq, pool, projector)};
          }
          labels.push_back(id);
        } else {
          throw Error(ErrorCode::kFormatError, where + ": needs 'query' (base64) or 'query_doc'");
        }
        cases.push_back(std::move(ec));
      }
      EvalReport report;
      if (er_gak) {
        if (!manifest) throw UsageError("--gak needs --manifest");
        std::vector<InterleavedSequence> corpus;
        for (const auto& d : manifest->documents) corpus.push_back(d.sequence);
        report = recall_at_k_gak(cases, corpus, ks, kcfg);
      } else {
        if (er_index.empty()) throw UsageError("--index is required unless --gak is given");
        report = recall_at_k(cases, load_index(er_index), ks);
      }
      result["cases"] = cases.size();
      for (std::size_t i = 0; i < report.ks.size(); ++i) {
        result[fmt::format("recall@{}", report.ks[i])] = report.recall[i];
      }
      Json ranks = Json::array();
      for (std::size_t i = 0; i < report.first_gold_rank.size(); ++i) {
        ranks.push_back({{"case", labels[i]}, {"gold_rank", report.first_gold_rank[i]}});
      }
      result["ranks"] = std::move(ranks);
    } else if (*eval_wino) {
      result["command"] = "eval-winoground";
      std::vector<WinogroundExample> examples;
      const auto lines = read_lines(ew_input);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const Json j = parse_json_line(lines[i], i + 1, ew_input);
        const Json& s = j.is_object() && j.contains("s") ? j["s"] : j;
        if (!s.is_array() || s.size() != 2 || !s[0].is_array() || !s[1].is_array() ||
            s[0].size() != 2 || s[1].size() != 2) {
          throw Error(ErrorCode::kMalformedExample,
                      fmt::format("{} line {}: expected a 2x2 similarity matrix", ew_input, i + 1));
        }
        WinogroundExample ex{};
        for (std::size_t r = 0; r < 2; ++r) {
          for (std::size_t c = 0; c < 2; ++c) {
            if (!s[r][c].is_number()) {
              throw Error(ErrorCode::kMalformedExample,
                          fmt::format("{} line {}: non-numeric similarity", ew_input, i + 1));
            }
            ex[r][c] = s[r][c].get<double>();
          }
        }
        examples.push_back(ex);
      }
      const auto scores = winoground_scores(examples);
      result["examples"] = examples.size();
      result["text"] = scores.text;
      result["image"] = scores.image;
      result["group"] = scores.group;
    } else if (*train) {
      result["command"] = "train-projector";
      const Manifest m = read_manifest(tp_manifest);
      std::vector<PrefixView> views;
      std::vector<Vector> hidden;
      if (!tp_hidden.empty()) {
        const auto lines = read_lines(tp_hidden);
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (blank(lines[i])) continue;
          const Json h = parse_json_line(lines[i], i + 1, tp_hidden);
          const std::string where = fmt::format("{} line {}", tp_hidden, i + 1);
          if (!h.is_object() || !h.contains("doc_id") || !h.contains("hidden")) {
            throw Error(ErrorCode::kFormatError, where + ": needs doc_id and hidden");
          }
          const auto& seq = require_doc(m, h["doc_id"].get<std::string>()).sequence;
          const std::size_t cut = h.contains("cut") ? h["cut"].get<std::size_t>() : seq.size();
          const std::size_t cuts[] = {cut};
          views.push_back(make_prefix_views(seq, cuts).front());
          hidden.push_back(decode_f32_base64(h["hidden"].get<std::string>()));
        }
      } else {
        const auto pool = parse_pool(tp_pool);
        std::uint64_t doc_seed = cfg.seed;
        for (const auto& doc : m.documents) {
          std::vector<std::size_t> cuts{doc.sequence.size()};
          if (tp_views > 0) {
            cuts = sample_cuts(doc.sequence.size(), std::min(tp_views, doc.sequence.size()), doc_seed++);
          }
          for (auto& v : make_prefix_views(doc.sequence, cuts)) {
            hidden.push_back(represent(v.as_sequence(), pool, std::nullopt));
            views.push_back(std::move(v));
          }
        }
      }
      if (views.empty()) throw UsageError("no training views");
      TrainerConfig tcfg;
      tcfg.learning_rate = tp_lr;
      tcfg.steps = tp_steps;
      tcfg.seed = cfg.seed;
      tcfg.input_dim = hidden.front().size();
      tcfg.output_dim = tp_output_dim;
      const auto trained = train_projector(hidden, views, kcfg, tcfg);
      write_projector(trained.projector, tp_out);
      if (!tp_trace.empty()) {
        std::ofstream trace(tp_trace);
        if (!trace) throw Error(ErrorCode::kIoFailure, fmt::format("cannot write trace '{}'", tp_trace));
        for (std::size_t s = 0; s < trained.loss_trace.size(); ++s) {
          trace << s << '\t' << format_real(trained.loss_trace[s]) << '\n';
        }
      }
      result["views"] = views.size();
      result["steps"] = tcfg.steps;
      result["initial_loss"] = trained.loss_trace.front();
      result["final_loss"] = trained.loss_trace.back();
      result["out"] = tp_out;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUserInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }

  if (common.json) {
    out << result.dump() << '\n';
  } else {
    render_kv(result, out);
  }
  return ok ? kExitOk : kExitInternal;
}

}  // namespace sgak::cli
