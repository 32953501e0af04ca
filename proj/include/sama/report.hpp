#pragma once

#include <filesystem>

#include "sama/evalset.hpp"

namespace sama {

// Writes report.json (versioned), report.txt (per-sweep table) and the two
// comparison plots (cfr_vs_ws.svg, toyfid_vs_ws.svg) into `dir`.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

EvalReport load_report(const std::filesystem::path& json_path);

// Minimal line chart; xs/ys must have equal sizes.
void svg_line_chart(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace sama
