#include "core/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <vector>

namespace lqrlr {

namespace {

constexpr double kWidth = 800.0, kHeight = 600.0;
constexpr double kLeft = 80.0, kRight = 30.0, kTop = 50.0, kBottom = 70.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void text(std::string& s, double x, double y, const std::string& t, const char* anchor = "middle",
          int size = 13, const char* fill = "#222") {
  s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
       "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) + "\" fill=\"" + fill +
       "\">" + json_escape(t) + "</text>\n";
}

void line(std::string& s, double x1, double y1, double x2, double y2, const char* stroke,
          double width = 1.0, const char* dash = nullptr) {
  s += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
       num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"";
  if (dash) s += std::string(" stroke-dasharray=\"") + dash + "\"";
  s += "/>\n";
}

void rect(std::string& s, double x, double y, double w, double h, const std::string& fill,
          const char* stroke = nullptr) {
  s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
       num(h) + "\" fill=\"" + fill + "\"";
  if (stroke) s += std::string(" stroke=\"") + stroke + "\" stroke-width=\"0.5\"";
  s += "/>\n";
}

struct Series {
  std::string name;
  const char* color;
  const char* dash;  // nullptr = solid
  std::vector<std::array<double, 2>> points;  // (x, mean)
  std::vector<double> mins, maxs;
};

// Line chart with min/max envelope bars over a numeric x sweep.
std::string envelope_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, std::vector<Series> series) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.points.size(); ++i) {
      xmin = std::min(xmin, s.points[i][0]);
      xmax = std::max(xmax, s.points[i][0]);
      ymin = std::min({ymin, s.mins[i]});
      ymax = std::max({ymax, s.maxs[i]});
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) {
    xmax += 0.5;
    xmin -= 0.5;
  }
  ymin = std::min(ymin, 1.0);
  ymax = std::max(ymax, 1.0 + 1e-9);
  const double ypad = 0.05 * (ymax - ymin + 1e-12);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double v) { return kTop + ph - (v - ymin) / (ymax - ymin) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
       "viewBox=\"0 0 800 600\">\n";
  rect(s, 0, 0, kWidth, kHeight, "#ffffff");
  text(s, kWidth / 2, 28, title, "middle", 16);
  line(s, kLeft, kTop, kLeft, kTop + ph, "#222");
  line(s, kLeft, kTop + ph, kLeft + pw, kTop + ph, "#222");
  text(s, kLeft + pw / 2, kHeight - 20, x_label);
  s += "<g transform=\"translate(22," + num(kTop + ph / 2) + ") rotate(-90)\">";
  text(s, 0, 0, y_label);
  s += "</g>\n";

  for (int t = 0; t <= 5; ++t) {
    const double v = ymin + (ymax - ymin) * t / 5.0;
    line(s, kLeft - 4, Y(v), kLeft, Y(v), "#222");
    line(s, kLeft, Y(v), kLeft + pw, Y(v), "#eee");
    text(s, kLeft - 8, Y(v) + 4, short_num(v), "end", 11);
  }
  std::set<double> xticks;
  for (const auto& sr : series)
    for (const auto& p : sr.points) xticks.insert(p[0]);
  for (double v : xticks) {
    line(s, X(v), kTop + ph, X(v), kTop + ph + 4, "#222");
    text(s, X(v), kTop + ph + 18, short_num(v), "middle", 11);
  }

  line(s, kLeft, Y(1.0), kLeft + pw, Y(1.0), "#999", 1.0, "2,3");  // standard reference

  double offset = -3.0 * (static_cast<double>(series.size()) - 1.0) / 2.0;
  for (const auto& sr : series) {
    std::string pts;
    for (size_t i = 0; i < sr.points.size(); ++i) {
      const double px = X(sr.points[i][0]) + offset;
      pts += num(px) + "," + num(Y(sr.points[i][1])) + " ";
      line(s, px, Y(sr.mins[i]), px, Y(sr.maxs[i]), sr.color, 1.2);
      line(s, px - 3, Y(sr.mins[i]), px + 3, Y(sr.mins[i]), sr.color, 1.2);
      line(s, px - 3, Y(sr.maxs[i]), px + 3, Y(sr.maxs[i]), sr.color, 1.2);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(sr.color) + "\" stroke-width=\"1.8\"";
    if (sr.dash) s += std::string(" stroke-dasharray=\"") + sr.dash + "\"";
    s += " points=\"" + pts + "\"/>\n";
    offset += 6.0;
  }

  double ly = kTop + 12;
  for (const auto& sr : series) {
    line(s, kLeft + pw - 150, ly - 4, kLeft + pw - 120, ly - 4, sr.color, 2.0, sr.dash);
    text(s, kLeft + pw - 114, ly, sr.name, "start", 12);
    ly += 18;
  }
  s += "</svg>\n";
  return s;
}

// One grayscale probability panel per design.
std::string heatmap_chart(const std::string& title, const std::string& x_label,
                          const std::vector<AggregateCell>& cells) {
  std::vector<std::string> designs = {"standard", "sparse", "lowrank"};
  std::set<double> params;
  std::set<int> agents;
  std::map<std::pair<std::string, std::pair<int, double>>, double> prob;
  for (const auto& c : cells) {
    if (std::isnan(c.success_probability)) continue;
    params.insert(c.param_value);
    agents.insert(c.n_agents);
    prob[{c.design, {c.n_agents, c.param_value}}] = c.success_probability;
  }
  std::vector<double> pv(params.begin(), params.end());
  std::vector<int> av(agents.begin(), agents.end());

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
       "viewBox=\"0 0 800 600\">\n";
  rect(s, 0, 0, kWidth, kHeight, "#ffffff");
  text(s, kWidth / 2, 28, title, "middle", 16);
  if (pv.empty() || av.empty()) {
    text(s, kWidth / 2, kHeight / 2, "no data");
    s += "</svg>\n";
    return s;
  }

  const double panel_gap = 24.0;
  const double panel_w = (kWidth - kLeft - kRight - 2 * panel_gap) / 3.0;
  const double panel_h = kHeight - kTop - kBottom - 30.0;
  const double cw = panel_w / static_cast<double>(pv.size());
  const double ch = panel_h / static_cast<double>(av.size());

  for (size_t d = 0; d < designs.size(); ++d) {
    const double x0 = kLeft + static_cast<double>(d) * (panel_w + panel_gap);
    const double y0 = kTop + 30.0;
    text(s, x0 + panel_w / 2, y0 - 10, designs[d], "middle", 13);
    for (size_t pi = 0; pi < pv.size(); ++pi) {
      for (size_t ai = 0; ai < av.size(); ++ai) {
        const auto it = prob.find({designs[d], {av[ai], pv[pi]}});
        std::string fill = "#f3e3e3";  // missing cell
        if (it != prob.end()) {
          const int g = static_cast<int>(std::lround(255.0 * std::clamp(it->second, 0.0, 1.0)));
          char buf[16];
          std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", g, g, g);
          fill = buf;
        }
        // larger N drawn upward
        const double y = y0 + panel_h - (static_cast<double>(ai) + 1.0) * ch;
        rect(s, x0 + static_cast<double>(pi) * cw, y, cw, ch, fill, "#888");
      }
      text(s, x0 + (static_cast<double>(pi) + 0.5) * cw, y0 + panel_h + 16, short_num(pv[pi]),
           "middle", 10);
    }
    if (d == 0) {
      for (size_t ai = 0; ai < av.size(); ++ai) {
        const double y = y0 + panel_h - (static_cast<double>(ai) + 0.5) * ch;
        text(s, x0 - 8, y + 4, std::to_string(av[ai]), "end", 10);
      }
      s += "<g transform=\"translate(22," + num(y0 + panel_h / 2) + ") rotate(-90)\">";
      text(s, 0, 0, "number of agents");
      s += "</g>\n";
    }
    text(s, x0 + panel_w / 2, kHeight - 24, x_label, "middle", 12);
  }
  text(s, kWidth / 2, kHeight - 6, "white = probability 1, black = probability 0", "middle", 11,
       "#555");
  s += "</svg>\n";
  return s;
}

}  // namespace

std::string render_svg(const ScenarioReport& report) {
  const auto cells = aggregate(report);
  switch (report.scenario_id) {
    case 1: {
      Series lowrank{"lowrank", "#c62828", nullptr, {}, {}, {}};
      Series sparse{"sparse", "#1565c0", "6,4", {}, {}, {}};
      for (const auto& c : cells) {
        if (c.ratio_rows == 0) continue;
        Series* s = nullptr;
        if (c.design == "lowrank") s = &lowrank;
        if (c.design == "sparse") s = &sparse;
        if (!s) continue;
        s->points.push_back({static_cast<double>(c.n_agents), c.mean_cost_ratio});
        s->mins.push_back(c.min_cost_ratio);
        s->maxs.push_back(c.max_cost_ratio);
      }
      return envelope_chart("LQR cost increment vs. number of agents", "number of agents",
                            "J(K) / J_stand", {lowrank, sparse});
    }
    case 2:
      return heatmap_chart("Success probability under communication noise", "noise variance",
                           cells);
    case 3:
      return heatmap_chart("Success probability under link removal", "links under attack", cells);
    case 4: {
      Series ratio{"sparse / lowrank", "#222222", nullptr, {}, {}, {}};
      for (const auto& c : cells) {
        if (c.design != "sparse/lowrank" || std::isnan(c.median_ratio)) continue;
        ratio.points.push_back({c.param_value, c.median_ratio});
        ratio.mins.push_back(c.min_ratio);
        ratio.maxs.push_back(c.max_ratio);
      }
      return envelope_chart("Cost of link-matched sparse design relative to low-rank", "rank",
                            "J_sparse / J_lowrank", {ratio});
    }
    default:
      return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\"/>\n";
  }
}

}  // namespace lqrlr
