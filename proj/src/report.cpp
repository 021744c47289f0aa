#include "meshsim/report.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "meshsim/errors.hpp"
#include "meshsim/mesh_io.hpp"

namespace meshsim {

namespace fs = std::filesystem;

std::string metrics_csv_header() {
  return "run_id,config,sampling_mode,propagation_mode,R,K,budget,seed,epoch,split,rmse,params,flops";
}

std::string metrics_csv_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.run_id << ',' << r.config.name << ',' << to_string(r.config.sampling) << ','
     << to_string(r.config.propagation) << ',' << r.config.R << ',' << r.config.K << ',' << r.config.budget << ','
     << r.seed << ',' << r.epoch << ',' << r.split << ',' << format_double(r.rmse) << ',' << r.params << ','
     << r.flops;
  return os.str();
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = metrics_csv_header() + "\n";
  for (const auto& r : rows) out += metrics_csv_row(r) + "\n";
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MetricsRow> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != metrics_csv_header()) throw ParseError("metrics csv: unexpected header", 1, "header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 13) throw ParseError("metrics csv: expected 13 columns", lineno, "row");
    try {
      MetricsRow r;
      r.run_id = f[0];
      r.config.name = f[1];
      r.config.sampling = sampling_mode_from_string(f[2]);
      r.config.propagation = propagation_mode_from_string(f[3]);
      r.config.R = std::stoi(f[4]);
      r.config.K = std::stoi(f[5]);
      r.config.budget = std::stoi(f[6]);
      r.seed = std::stoull(f[7]);
      r.epoch = std::stoi(f[8]);
      r.split = f[9];
      r.rmse = std::stod(f[10]);
      r.params = std::stoll(f[11]);
      r.flops = std::stoll(f[12]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError("metrics csv: malformed number", lineno, "row");
    }
  }
  return rows;
}

int report(const std::string& runs_dir, const std::string& csv_path) {
  if (!fs::is_directory(runs_dir)) throw IoError("report: no such directory " + runs_dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(runs_dir))
    if (e.is_regular_file() && e.path().filename() == "metrics.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<MetricsRow> all, final_rows;
  for (const auto& f : files)
    for (auto& r : parse_metrics_csv(read_text_file(f))) {
      if (r.split == "test") final_rows.push_back(r);
      all.push_back(std::move(r));
    }
  write_text_file(csv_path, metrics_csv(all));
  const fs::path p(csv_path);
  write_text_file(p.parent_path() / (p.stem().string() + "_final.csv"), metrics_csv(final_rows));
  return static_cast<int>(all.size());
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "config,seed,test_rmse,best_val_rmse,best_epoch,params,flops,steps,seconds\n";
  for (const auto& r : rows)
    os << r.config << ',' << r.seed << ',' << format_double(r.test_rmse) << ',' << format_double(r.best_val_rmse)
       << ',' << r.best_epoch << ',' << r.params << ',' << r.flops << ',' << r.steps << ',' << r.seconds << '\n';
  return os.str();
}

}  // namespace meshsim
