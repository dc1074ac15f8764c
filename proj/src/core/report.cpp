#include "core/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <map>
#include <tuple>

namespace lqrlr {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

namespace {

std::string opt_int(long long v) { return v < 0 ? std::string() : std::to_string(v); }

std::string opt_real(double v) { return std::isnan(v) ? std::string() : fmt_g17(v); }

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string utc_now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string csv_header_line() {
  return "scenario,n_agents,param,param_value,trial,seed,design,gamma,rank,J,J_stand,"
         "cost_ratio,links_pairwise,links_offblock,critical_node_links,broadcast_tx,"
         "success_count,trials_inner,shortfall,termination";
}

std::string row_to_csv(const ReportRow& r) {
  std::string line;
  line += std::to_string(r.scenario);
  line += ',';
  line += std::to_string(r.n_agents);
  line += ',';
  line += r.param_name;
  line += ',';
  line += r.has_param ? fmt_g17(r.param_value) : std::string();
  line += ',';
  line += std::to_string(r.trial);
  line += ',';
  line += std::to_string(r.seed);
  line += ',';
  line += r.design;
  line += ',';
  line += r.has_gamma ? fmt_g17(r.gamma) : std::string();
  line += ',';
  line += opt_int(r.rank);
  line += ',';
  line += opt_real(r.J);
  line += ',';
  line += opt_real(r.J_stand);
  line += ',';
  line += opt_real(r.cost_ratio);
  line += ',';
  line += opt_int(r.links_pairwise);
  line += ',';
  line += opt_int(r.links_offblock);
  line += ',';
  line += opt_int(r.critical_node_links);
  line += ',';
  line += opt_int(r.broadcast_tx);
  line += ',';
  line += opt_int(r.success_count);
  line += ',';
  line += opt_int(r.trials_inner);
  line += ',';
  line += opt_int(r.shortfall);
  line += ',';
  line += r.termination;
  return line;
}

std::string ScenarioReport::to_csv() const {
  std::string out = csv_header_line();
  out += '\n';
  for (const auto& r : rows) {
    out += row_to_csv(r);
    out += '\n';
  }
  return out;
}

std::vector<AggregateCell> aggregate(const ScenarioReport& report) {
  using Key = std::tuple<int, double, std::string>;
  std::map<Key, AggregateCell> cells;

  for (const auto& r : report.rows) {
    const Key key{r.n_agents, r.has_param ? r.param_value : 0.0, r.design};
    auto& c = cells[key];
    if (c.rows == 0) {
      c.n_agents = r.n_agents;
      c.param_name = r.param_name;
      c.has_param = r.has_param;
      c.param_value = r.param_value;
      c.design = r.design;
    }
    ++c.rows;
    if (std::isfinite(r.cost_ratio)) {
      if (c.ratio_rows == 0) {
        c.mean_cost_ratio = 0.0;
        c.min_cost_ratio = r.cost_ratio;
        c.max_cost_ratio = r.cost_ratio;
      }
      ++c.ratio_rows;
      c.mean_cost_ratio += r.cost_ratio;
      c.min_cost_ratio = std::min(c.min_cost_ratio, r.cost_ratio);
      c.max_cost_ratio = std::max(c.max_cost_ratio, r.cost_ratio);
    }
    if (r.success_count >= 0 && r.trials_inner > 0) {
      if (c.attempts < 0) {
        c.attempts = 0;
        c.successes = 0;
      }
      c.attempts += r.trials_inner;
      c.successes += r.success_count;
    }
  }

  // Link-count means, averaged over the rows that actually carry them.
  std::map<Key, std::array<std::pair<double, int>, 3>> link_acc;
  for (const auto& r : report.rows) {
    const Key key{r.n_agents, r.has_param ? r.param_value : 0.0, r.design};
    auto& acc = link_acc[key];
    const int vals[3] = {r.links_pairwise, r.links_offblock, r.critical_node_links};
    for (int k = 0; k < 3; ++k) {
      if (vals[k] >= 0) {
        acc[k].first += vals[k];
        acc[k].second += 1;
      }
    }
  }

  std::vector<AggregateCell> out;
  out.reserve(cells.size());
  for (auto& [key, c] : cells) {
    if (c.ratio_rows > 0) c.mean_cost_ratio /= c.ratio_rows;
    if (c.attempts > 0) {
      c.success_probability =
          static_cast<double>(c.successes) / static_cast<double>(c.attempts);
    }
    const auto& acc = link_acc[key];
    if (acc[0].second > 0) c.mean_links_pairwise = acc[0].first / acc[0].second;
    if (acc[1].second > 0) c.mean_links_offblock = acc[1].first / acc[1].second;
    if (acc[2].second > 0) c.mean_critical_node_links = acc[2].first / acc[2].second;
    out.push_back(c);
  }

  // Scenario 4: per-trial sparse-to-lowrank cost quotient, keyed by (N, rank).
  if (report.scenario_id == 4) {
    using PairKey = std::tuple<int, double, int>;  // (N, rank, trial)
    std::map<PairKey, std::pair<double, double>> per_trial;  // (J_sparse, J_lowrank)
    for (const auto& r : report.rows) {
      if (!r.has_param) continue;
      auto& slot = per_trial[{r.n_agents, r.param_value, r.trial}];
      if (r.design == "sparse") slot.first = r.J;
      if (r.design == "lowrank") slot.second = r.J;
    }
    std::map<std::pair<int, double>, std::vector<double>> ratios;
    for (const auto& [key, js] : per_trial) {
      if (std::isfinite(js.first) && std::isfinite(js.second) && js.second > 0.0) {
        ratios[{std::get<0>(key), std::get<1>(key)}].push_back(js.first / js.second);
      }
    }
    for (const auto& [key, v] : ratios) {
      AggregateCell c;
      c.n_agents = key.first;
      c.param_name = "rank";
      c.has_param = true;
      c.param_value = key.second;
      c.design = "sparse/lowrank";
      c.rows = static_cast<int>(v.size());
      c.median_ratio = median_of(v);
      c.mean_ratio = mean_of(v);
      c.min_ratio = *std::min_element(v.begin(), v.end());
      c.max_ratio = *std::max_element(v.begin(), v.end());
      out.push_back(c);
    }
  }
  return out;
}

std::string ScenarioReport::to_json() const {
  std::string j = "{\n";
  j += "  \"header\": {\"created_utc\": \"" + utc_now_iso8601() + "\", \"timings_ms\": {";
  for (size_t i = 0; i < manifest.timings_ms.size(); ++i) {
    if (i) j += ", ";
    j += "\"" + json_escape(manifest.timings_ms[i].first) +
         "\": " + fmt_g17(manifest.timings_ms[i].second);
  }
  j += "}},\n";
  j += "  \"manifest\": {\"tool_version\": \"" + json_escape(manifest.tool_version) +
       "\", \"master_seed\": " + std::to_string(manifest.master_seed) +
       ", \"config\": " + manifest.config_json + "},\n";
  j += "  \"scenario\": " + std::to_string(scenario_id) + ",\n";
  j += "  \"row_count\": " + std::to_string(rows.size()) + ",\n";
  j += "  \"aggregates\": [\n";
  const auto cells = aggregate(*this);
  for (size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    std::string e = "    {\"n_agents\": " + std::to_string(c.n_agents);
    if (c.has_param) {
      e += ", \"param\": \"" + json_escape(c.param_name) +
           "\", \"param_value\": " + fmt_g17(c.param_value);
    }
    e += ", \"design\": \"" + json_escape(c.design) + "\", \"rows\": " + std::to_string(c.rows);
    if (c.ratio_rows > 0) {
      e += ", \"ratio_rows\": " + std::to_string(c.ratio_rows) +
           ", \"mean_cost_ratio\": " + fmt_g17(c.mean_cost_ratio) +
           ", \"min_cost_ratio\": " + fmt_g17(c.min_cost_ratio) +
           ", \"max_cost_ratio\": " + fmt_g17(c.max_cost_ratio);
    }
    if (c.attempts >= 0) {
      e += ", \"successes\": " + std::to_string(c.successes) +
           ", \"attempts\": " + std::to_string(c.attempts) +
           ", \"success_probability\": " + fmt_g17(c.success_probability);
    }
    if (!std::isnan(c.mean_links_pairwise)) {
      e += ", \"mean_links_pairwise\": " + fmt_g17(c.mean_links_pairwise);
    }
    if (!std::isnan(c.mean_links_offblock)) {
      e += ", \"mean_links_offblock\": " + fmt_g17(c.mean_links_offblock);
    }
    if (!std::isnan(c.mean_critical_node_links)) {
      e += ", \"mean_critical_node_links\": " + fmt_g17(c.mean_critical_node_links);
    }
    if (!std::isnan(c.median_ratio)) {
      e += ", \"median_ratio\": " + fmt_g17(c.median_ratio) +
           ", \"mean_ratio\": " + fmt_g17(c.mean_ratio) +
           ", \"min_ratio\": " + fmt_g17(c.min_ratio) +
           ", \"max_ratio\": " + fmt_g17(c.max_ratio);
    }
    e += "}";
    if (i + 1 < cells.size()) e += ",";
    j += e + "\n";
  }
  j += "  ]\n}\n";
  return j;
}

}  // namespace lqrlr
