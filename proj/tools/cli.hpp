#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgak/core.hpp"
#include "sgak/structure_loss.hpp"

namespace sgak::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUserInput = 2,
  kExitFormat = 3,
};

struct CliConfig {
  double delta = 1.0;
  bool normalize_gak = false;
  KernelMode kernel_mode = KernelMode::Triple;
  LabelSingleSliceMode label_single_slice_mode = LabelSingleSliceMode::Cosine;
  std::uint64_t seed = 42;
  std::size_t cell_cap = 16384;

  KernelConfig kernel() const;
};

// Applies flat key=value lines (blank lines and '#' comments skipped) on top
// of `cfg`. Throws Error(kFormatError) naming the offending key or line.
void apply_config_text(const std::string& text, CliConfig& cfg);
void apply_config_setting(const std::string& key, const std::string& value, CliConfig& cfg);
std::string describe(const CliConfig& cfg);

// Fixed 12 decimals in the normal range, scientific otherwise.
std::string format_real(double v);

Projector read_projector(const std::filesystem::path& path);
void write_projector(const Projector& p, const std::filesystem::path& path);

// Entry point shared by main() and the tests. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgak::cli
