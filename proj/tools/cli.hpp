#pragma once

#include "av2t/config.hpp"
#include "av2t/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace av2t::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitMissing = 2;

/// Entry point shared by the `av2t` executable and the tests.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

struct AblationRow {
    Subset subset = Subset::S4;
    PromptSource arm = PromptSource::fused;
    bool adapter = true;
    double m_j = 0.0;
    double m_f = 0.0;
};

struct VisionBias {
    Subset subset = Subset::S4;
    bool adapter = true;
    double delta = 0.0;  // fused m_j - clip_only m_j
    double margin = 0.0;
    bool flagged = false;
};

/// Flags every (subset, adapter) pair where fused m_j exceeds clip_only m_j by
/// no more than `margin`.
std::vector<VisionBias> vision_bias(const std::vector<AblationRow>& rows, double margin);

/// Footnote marker for a grid row, or "-" when no reference value exists.
std::string reference_marker(PromptSource arm, bool adapter);

/// Reference footnotes, one line each, keyed by the markers above.
std::vector<std::string> reference_footnotes();

/// Tab-separated grid with one row per (subset, arm, adapter) and trailing
/// `#` comment lines for the vision-bias verdicts and footnotes.
std::string render_grid_tsv(const std::vector<AblationRow>& rows, const std::vector<VisionBias>& bias);

/// `<dir>/<subset>/<arm>_adapter-<on|off>/last.ckpt`
std::filesystem::path arm_checkpoint(const std::filesystem::path& dir, Subset subset, PromptSource arm, bool adapter);

}  // namespace av2t::cli
