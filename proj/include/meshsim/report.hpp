#pragma once

#include <string>
#include <vector>

#include "meshsim/training.hpp"

namespace meshsim {

/// Column order of every metrics CSV.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
std::string metrics_csv(const std::vector<MetricsRow>& rows);

std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

/// Gathers every metrics.csv below `runs_dir` (sorted by path) into `csv_path`
/// and the test rows alone into the sibling "<stem>_final.csv". Returns the
/// number of rows written to the curve file.
int report(const std::string& runs_dir, const std::string& csv_path);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace meshsim
