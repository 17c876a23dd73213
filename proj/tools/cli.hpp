#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "maskwarp/interest.hpp"
#include "maskwarp/io.hpp"
#include "maskwarp/metrics.hpp"
#include "maskwarp/schedule.hpp"

namespace maskwarp::cli {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

// Everything a run needs. Loaded from a flat JSON object; command-line
// flags are applied on top.
struct RunConfig {
  WarpSchedule schedule;
  IRParams ir;
  SsimParams ssim;

  std::filesystem::path source;
  std::filesystem::path source_mask;
  std::filesystem::path target_mask;
  std::filesystem::path source_labels;
  std::filesystem::path target_labels;
  LabelColors label_colors;
  std::filesystem::path field;
  std::filesystem::path out = ".";

  // Weights set explicitly are never truncated to fit a rounds setting;
  // the defaults are (by keeping their last entries).
  bool alpha_given = false;
  bool beta_given = false;

  bool save_field = false;
  bool save_intermediates = false;
  bool save_trace = true;
  int jobs = 1;
};

// Applies the keys of a JSON object to the config. Unknown keys and
// ill-typed values throw InvalidArgument.
void apply_json(RunConfig& config, const std::string& json_text);

int cmd_warp(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_smoothmask(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_apply_field(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const std::string& kind, const std::filesystem::path& manifest,
             const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command line without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maskwarp::cli
