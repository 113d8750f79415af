#pragma once

#include <filesystem>
#include <string>

#include "rbl/harness.hpp"

namespace rbl {

inline constexpr const char* kCsvHeader =
    "estimator,block,sigma,rmse,trials,failures,mean_iters,converged_frac";

/// CSV text of the report; floating-point fields use 9 significant digits.
std::string to_csv(const RmseReport& report);
/// Inverse of `to_csv`. Throws ErrorKind::kParse with the line number on
/// malformed input.
RmseReport parse_csv(const std::string& text);
RmseReport read_csv(const std::filesystem::path& path);

/// Python/matplotlib script drawing log-log RMSE-vs-sigma panels (one per
/// block, one series per estimator) from `csv_name`, which is resolved
/// relative to the script's own directory.
std::string plot_script(const std::string& csv_name, const std::string& image_name);

struct EmittedFiles {
  std::filesystem::path csv;
  std::filesystem::path script;
};

/// Writes `rmse.csv` and `plot_rmse.py` into `out_dir` (created if needed).
EmittedFiles emit_report(const RmseReport& report, const std::filesystem::path& out_dir);

/// Writes only the plot script next to an existing CSV.
std::filesystem::path emit_plot_script(const std::filesystem::path& csv_path,
                                       const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rbl
