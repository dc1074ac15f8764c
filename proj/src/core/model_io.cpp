#include "core/model_io.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "core/report.hpp"
#include "core/version.hpp"
#include "json.hpp"

namespace lqrlr {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(Errc::parse, msg); }

const json& get_field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) parse_fail(std::string(name) + ": missing");
  return *it;
}

Eigen::Index get_dim(const json& j, const char* name) {
  const json& f = get_field(j, name);
  if (!f.is_number_integer() || f.get<long long>() < 1) {
    parse_fail(std::string(name) + ": must be a positive integer");
  }
  return static_cast<Eigen::Index>(f.get<long long>());
}

Matrix get_matrix(const json& j, const char* name, Eigen::Index rows, Eigen::Index cols) {
  const json& f = get_field(j, name);
  if (!f.is_array()) parse_fail(std::string(name) + ": must be an array of numbers");
  const size_t expected = static_cast<size_t>(rows * cols);
  if (f.size() != expected) {
    parse_fail(std::string(name) + ": expected " + std::to_string(expected) + " entries, got " +
               std::to_string(f.size()));
  }
  Matrix M(rows, cols);
  for (size_t k = 0; k < expected; ++k) {
    const json& e = f[k];
    if (!e.is_number()) parse_fail(std::string(name) + "[" + std::to_string(k) + "]: not a number");
    const double v = e.get<double>();
    if (!std::isfinite(v)) {
      parse_fail(std::string(name) + "[" + std::to_string(k) + "]: non-finite value");
    }
    M(static_cast<Eigen::Index>(k) / cols, static_cast<Eigen::Index>(k) % cols) = v;
  }
  return M;
}

std::vector<int> get_int_array(const json& j, const char* name, size_t expected) {
  const json& f = get_field(j, name);
  if (!f.is_array() || f.size() != expected) {
    parse_fail(std::string(name) + ": expected an array of " + std::to_string(expected) +
               " integers");
  }
  std::vector<int> out(expected);
  for (size_t k = 0; k < expected; ++k) {
    if (!f[k].is_number_integer()) {
      parse_fail(std::string(name) + "[" + std::to_string(k) + "]: not an integer");
    }
    out[k] = f[k].get<int>();
  }
  return out;
}

void append_matrix_data(std::string& s, const Matrix& M) {
  s += "[";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (i != 0 || j != 0) s += ", ";
      s += fmt_g17(M(i, j));
    }
  }
  s += "]";
}

std::string matrix_object(const Matrix& M) {
  std::string s = "{\"rows\": " + std::to_string(M.rows()) +
                  ", \"cols\": " + std::to_string(M.cols()) + ", \"data\": ";
  append_matrix_data(s, M);
  return s + "}";
}

std::string real_or_null(double v) { return std::isfinite(v) ? fmt_g17(v) : "null"; }

}  // namespace

ModelFile parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail("top-level value must be an object");
  if (j.contains("format") && j["format"] != "lqrlr-model") {
    parse_fail("format: expected \"lqrlr-model\"");
  }

  ModelFile mf;
  const Eigen::Index n = get_dim(j, "n");
  const Eigen::Index m = get_dim(j, "m");
  const Eigen::Index l = get_dim(j, "l");
  mf.model.A = get_matrix(j, "A", n, n);
  mf.model.B1 = get_matrix(j, "B1", n, m);
  mf.model.B2 = get_matrix(j, "B2", n, l);
  mf.model.Q = get_matrix(j, "Q", n, n);
  mf.model.R = get_matrix(j, "R", m, m);
  if (j.contains("C")) {
    const Eigen::Index p = get_dim(j, "p");
    mf.model.C = get_matrix(j, "C", p, n);
    if (j.contains("D")) mf.model.D = get_matrix(j, "D", p, m);
  } else if (j.contains("D")) {
    parse_fail("D: given without C");
  }

  const json& st = get_field(j, "structure");
  if (!st.is_object()) parse_fail("structure: must be an object");
  mf.structure.agent_count = static_cast<int>(get_dim(st, "agent_count"));
  mf.structure.input_groups = get_int_array(st, "input_groups", static_cast<size_t>(m));
  mf.structure.state_groups = get_int_array(st, "state_groups", static_cast<size_t>(n));

  if (j.contains("layout")) {
    const json& lay = j["layout"];
    if (!lay.is_object()) parse_fail("layout: must be an object");
    AgentLayout layout;
    const json& ext = get_field(lay, "extent");
    if (!ext.is_number()) parse_fail("layout.extent: not a number");
    layout.extent = ext.get<double>();
    const json& pos = get_field(lay, "positions");
    if (!pos.is_array()) parse_fail("layout.positions: must be an array");
    for (size_t k = 0; k < pos.size(); ++k) {
      if (!pos[k].is_array() || pos[k].size() != 2 || !pos[k][0].is_number() ||
          !pos[k][1].is_number()) {
        parse_fail("layout.positions[" + std::to_string(k) + "]: expected [x, y]");
      }
      layout.positions.push_back({pos[k][0].get<double>(), pos[k][1].get<double>()});
    }
    mf.layout = std::move(layout);
    if (lay.contains("coupling_sign")) mf.coupling_sign = lay["coupling_sign"].get<int>();
    if (lay.contains("seed")) mf.gen_seed = lay["seed"].get<std::uint64_t>();
  }

  try {
    mf.model.validate();
    mf.structure.validate(m, n);
  } catch (const Error& e) {
    parse_fail(e.what());
  }
  return mf;
}

ModelFile load_model_file(const std::string& path) {
  return parse_model_json(read_text_file(path));
}

std::string model_file_to_json(const ModelFile& mf) {
  const Eigen::Index n = mf.model.states(), m = mf.model.inputs(), l = mf.model.disturbances();
  std::string s = "{\n";
  s += "  \"format\": \"lqrlr-model\",\n  \"version\": 1,\n";
  s += "  \"n\": " + std::to_string(n) + ",\n  \"m\": " + std::to_string(m) +
       ",\n  \"l\": " + std::to_string(l) + ",\n";
  auto field = [&](const char* name, const Matrix& M) {
    s += std::string("  \"") + name + "\": ";
    append_matrix_data(s, M);
    s += ",\n";
  };
  field("A", mf.model.A);
  field("B1", mf.model.B1);
  field("B2", mf.model.B2);
  field("Q", mf.model.Q);
  field("R", mf.model.R);
  if (mf.model.C) {
    s += "  \"p\": " + std::to_string(mf.model.C->rows()) + ",\n";
    field("C", *mf.model.C);
    if (mf.model.D) field("D", *mf.model.D);
  }
  s += "  \"structure\": {\"agent_count\": " + std::to_string(mf.structure.agent_count) +
       ", \"input_groups\": [";
  for (size_t i = 0; i < mf.structure.input_groups.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(mf.structure.input_groups[i]);
  }
  s += "], \"state_groups\": [";
  for (size_t i = 0; i < mf.structure.state_groups.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(mf.structure.state_groups[i]);
  }
  s += "]}";
  if (mf.layout) {
    s += ",\n  \"layout\": {\"extent\": " + fmt_g17(mf.layout->extent) + ", \"positions\": [";
    for (size_t k = 0; k < mf.layout->positions.size(); ++k) {
      if (k) s += ", ";
      s += "[" + fmt_g17(mf.layout->positions[k][0]) + ", " + fmt_g17(mf.layout->positions[k][1]) +
           "]";
    }
    s += "]";
    if (mf.coupling_sign) s += ", \"coupling_sign\": " + std::to_string(*mf.coupling_sign);
    if (mf.gen_seed) s += ", \"seed\": " + std::to_string(*mf.gen_seed);
    s += "}";
  }
  s += "\n}\n";
  return s;
}

void save_model_file(const ModelFile& mf, const std::string& path) {
  write_text_file(path, model_file_to_json(mf));
}

std::string design_result_to_json(const StateSpaceModel& model, const DesignResult& result,
                                  const OptimalityReport& optimality, const AdmmConfig& cfg,
                                  const std::string& variant_label,
                                  const std::string& model_path) {
  (void)model;
  std::string s = "{\n";
  {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    s += std::string("  \"header\": {\"created_utc\": \"") + buf + "\"},\n";
  }
  s += std::string("  \"manifest\": {\"tool_version\": \"") + kToolVersion +
       "\", \"config\": {\"variant\": \"" + json_escape(variant_label) +
       "\", \"rho\": " + fmt_g17(cfg.rho) + ", \"gamma\": " + fmt_g17(cfg.gamma);
  if (cfg.rank) s += ", \"rank\": " + std::to_string(*cfg.rank);
  s += ", \"eps_pri\": " + fmt_g17(cfg.eps_pri) + ", \"eps_dual\": " + fmt_g17(cfg.eps_dual) +
       ", \"max_outer\": " + std::to_string(cfg.max_outer) +
       ", \"max_inner\": " + std::to_string(cfg.max_inner) +
       ", \"inner_tol\": " + fmt_g17(cfg.inner_tol) + ", \"model_path\": \"" +
       json_escape(model_path) + "\"}},\n";

  s += "  \"result\": {\n";
  s += std::string("    \"termination\": \"") + termination_name(result.termination) + "\",\n";
  s += "    \"iterations\": " + std::to_string(result.iterations) + ",\n";
  s += "    \"inner_cap_hits\": " + std::to_string(result.inner_cap_hits) + ",\n";
  s += "    \"J\": " + real_or_null(result.J) + ",\n";
  s += "    \"J_stand\": " + real_or_null(result.J_stand) + ",\n";
  {
    // broadcast bookkeeping: rank of K_low and the one-time scale vectors
    // each sender shares with the other agents before operation starts
    int rank = 0;
    if (result.K_low.size() > 0 && result.K_low.norm() > 0.0) {
      const Vector sigma = svd(result.K_low).sigma;
      for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > 1e-9 * sigma(0)) ++rank;
      }
    }
    const long long m = result.K.rows();
    s += "    \"rank_K_low\": " + std::to_string(rank) + ",\n";
    s += "    \"init_scale_shares\": " + std::to_string(rank * std::max(0ll, m - 1)) + ",\n";
  }
  s += "    \"residual_history\": [";
  for (size_t i = 0; i < result.residual_history.size(); ++i) {
    if (i) s += ", ";
    s += "[" + fmt_g17(result.residual_history[i].first) + ", " +
         fmt_g17(result.residual_history[i].second) + "]";
  }
  s += "],\n";
  s += "    \"K\": " + matrix_object(result.K) + ",\n";
  s += "    \"K_diag\": " + matrix_object(result.K_diag) + ",\n";
  s += "    \"K_low\": " + matrix_object(result.K_low) + ",\n";
  s += "    \"dual\": " + matrix_object(result.dual) + ",\n";
  s += "    \"optimality\": {\"primal_residual\": " + fmt_g17(optimality.primal_residual) +
       ", \"dual_residual\": " + fmt_g17(optimality.dual_residual) +
       ", \"stationarity_residual\": " + fmt_g17(optimality.stationarity_residual) +
       ", \"stationarity_tol\": " + fmt_g17(optimality.stationarity_tol) +
       std::string(", \"primal_ok\": ") + (optimality.primal_ok ? "true" : "false") +
       std::string(", \"dual_ok\": ") + (optimality.dual_ok ? "true" : "false") +
       std::string(", \"stationarity_ok\": ") + (optimality.stationarity_ok ? "true" : "false") +
       "}\n";
  s += "  }\n}\n";
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, path + ": read failed");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, path + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw Error(Errc::io, path + ": write failed");
}

}  // namespace lqrlr
