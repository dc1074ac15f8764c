#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace lqrlr {

// Doubles are serialized with 17 significant digits everywhere so that every
// written value round-trips bit-exactly.
std::string fmt_g17(double v);
std::string json_escape(const std::string& s);

// One per-trial record. Sentinels (-1 for counts, NaN for reals) mean "not
// applicable to this scenario/design" and serialize as empty CSV cells.
struct ReportRow {
  int scenario = 0;
  int n_agents = 0;
  std::string param_name = "none";
  bool has_param = false;
  double param_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string design;  // standard | sparse | lowrank
  bool has_gamma = false;
  double gamma = 0.0;
  int rank = -1;
  double J = std::numeric_limits<double>::quiet_NaN();
  double J_stand = std::numeric_limits<double>::quiet_NaN();
  double cost_ratio = std::numeric_limits<double>::quiet_NaN();
  int links_pairwise = -1;
  int links_offblock = -1;
  int critical_node_links = -1;
  int broadcast_tx = -1;
  long long success_count = -1;
  int trials_inner = -1;
  int shortfall = -1;
  std::string termination;
};

// Everything needed to reproduce a report bit-exactly, plus wall-clock
// timings which live in the (excluded-from-comparison) header section.
struct RunManifest {
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string config_json;  // resolved configuration as a JSON object
  std::vector<std::pair<std::string, double>> timings_ms;
};

struct AggregateCell {
  int n_agents = 0;
  std::string param_name = "none";
  bool has_param = false;
  double param_value = 0.0;
  std::string design;
  int rows = 0;
  int ratio_rows = 0;  // rows with a finite cost ratio
  double mean_cost_ratio = std::numeric_limits<double>::quiet_NaN();
  double min_cost_ratio = std::numeric_limits<double>::quiet_NaN();
  double max_cost_ratio = std::numeric_limits<double>::quiet_NaN();
  long long successes = -1;
  long long attempts = -1;
  double success_probability = std::numeric_limits<double>::quiet_NaN();
  double mean_links_pairwise = std::numeric_limits<double>::quiet_NaN();
  double mean_links_offblock = std::numeric_limits<double>::quiet_NaN();
  double mean_critical_node_links = std::numeric_limits<double>::quiet_NaN();
  // design == "sparse/lowrank" cells (scenario 4): per-trial cost quotient
  double median_ratio = std::numeric_limits<double>::quiet_NaN();
  double mean_ratio = std::numeric_limits<double>::quiet_NaN();
  double min_ratio = std::numeric_limits<double>::quiet_NaN();
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct ScenarioReport {
  int scenario_id = 0;
  std::vector<ReportRow> rows;
  RunManifest manifest;

  std::string to_csv() const;   // header line + one line per row, \n endings
  std::string to_json() const;  // {header, manifest, scenario, aggregates}
};

std::vector<AggregateCell> aggregate(const ScenarioReport& report);

std::string csv_header_line();
std::string row_to_csv(const ReportRow& row);

}  // namespace lqrlr
