#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thinscat/asymptotics.hpp"
#include "thinscat/energy.hpp"
#include "thinscat/mie.hpp"
#include "thinscat/solvers.hpp"

namespace thinscat {

// ---------------------------------------------------------------------------
// numeric result table with exact-round-trip CSV I/O

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw config_error("table: no column named " + name);
  }
  std::vector<double> column(const std::string& name) const {
    int c = col(name);
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_header(std::ostream& os, const Table& t) {
  for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
}

inline void write_csv_row(std::ostream& os, const std::vector<double>& row) {
  for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
  os << "\n";
  os.flush();  // partial sweeps stay usable
}

inline void write_csv(std::ostream& os, const Table& t) {
  write_csv_header(os, t);
  for (const auto& r : t.rows) write_csv_row(os, r);
}

inline Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw config_error("csv: empty input");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.columns.size()) throw config_error("csv: ragged row: " + line);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// rate fitting and far-field comparison

/// Least-squares power-law fit log y = p log x + c.
struct RateFit {
  double exponent = 0.0;
  double log_constant = 0.0;  // natural log of the prefactor
  double r_squared = 0.0;
  int n_points = 0;
};

inline RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw config_error("fit_rate: need at least 3 matched samples");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    if (x[i] <= 0 || y[i] <= 0) throw config_error("fit_rate: samples must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  RateFit f;
  f.n_points = n;
  double den = n * sxx - sx * sx;
  f.exponent = (n * sxy - sx * sy) / den;
  f.log_constant = (sy - f.exponent * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    double pred = f.exponent * std::log(x[i]) + f.log_constant;
    ss_res += (std::log(y[i]) - pred) * (std::log(y[i]) - pred);
  }
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

struct FieldComparison {
  double max_abs = 0.0;
  double max_rel = 0.0;  // relative to the sup of the reference field
  double rms = 0.0;
};

inline FieldComparison compare_fields(const FarField& a, const FarField& b) {
  if (a.dirs.size() != b.dirs.size()) throw config_error("compare_fields: grid size mismatch");
  for (size_t i = 0; i < a.dirs.size(); ++i)
    if ((a.dirs[i] - b.dirs[i]).norm() > 1e-12)
      throw config_error("compare_fields: direction grids differ");
  FieldComparison c;
  double sumsq = 0, ref = 0;
  for (Eigen::Index i = 0; i < a.u.size(); ++i) {
    double d = std::abs(a.u[i] - b.u[i]);
    c.max_abs = std::max(c.max_abs, d);
    sumsq += d * d;
    ref = std::max(ref, std::abs(b.u[i]));
  }
  c.rms = std::sqrt(sumsq / double(a.u.size()));
  c.max_rel = ref > 0 ? c.max_abs / ref : (c.max_abs > 0 ? 1e300 : 0.0);
  return c;
}

// ---------------------------------------------------------------------------
// sweep configuration (plain "key = value" text files, '#' comments)

enum class ExperimentKind {
  soundhard_tube,
  cloak_tube,
  soundhard_screen,
  cloak_screen,
  asymptotic_compare
};

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::soundhard_tube: return "soundhard_tube";
    case ExperimentKind::cloak_tube: return "cloak_tube";
    case ExperimentKind::soundhard_screen: return "soundhard_screen";
    case ExperimentKind::cloak_screen: return "cloak_screen";
    case ExperimentKind::asymptotic_compare: return "asymptotic_compare";
  }
  return "?";
}

struct SweepConfig {
  ExperimentKind kind = ExperimentKind::soundhard_tube;
  std::string geometry = "tube";  // tube | screen (asymptotic_compare only)

  // physics
  double omega = 1.0;
  LossyLayerSpec lossy;
  ContentSpec content;
  std::vector<double> delta_ladder{0.2, 0.14, 0.1, 0.07, 0.05};
  std::vector<double> eps_ladder;  // screen incidences; empty = grazing only
  double eps_fixed = 0.0;          // |d.n| for screen delta-ladders

  // geometry
  double tube_length = 1.0;
  double screen_side = 1.0;

  // resolutions
  int n_t = 10, q_t = 4, n_theta = 12, cap_panels = 2, q_cap = 4, seam_grading = 2;
  int inner_n_t = 8, inner_n_theta = 12, inner_cap_panels = 2;
  int scr_n_face = 5, scr_q = 4, scr_n_edge = 5, scr_n_beta = 2, scr_n_corner = 1;
  int inner_scr_n_face = 4, inner_scr_n_edge = 4, inner_scr_n_beta = 2, inner_scr_n_corner = 1;
  int obs_polar = 12, obs_azimuth = 24;
  int n_incident = 6;      // tube full-aperture incidence set
  int panel_n = 6, panel_q = 4;  // flat-panel rule of the screen asymptotics
  int volume_level = 1;
  int energy = 1;          // 0 disables the energy column (faster sweeps)
  unsigned seed = 12345;   // randomized probe choices
  std::string output = "sweep.csv";

  void validate() const {
    if (omega <= 0) throw config_error("config: omega must be > 0");
    lossy.validate();
    content.validate();
    if (delta_ladder.empty()) throw config_error("config: delta_ladder is empty");
    for (size_t i = 0; i + 1 < delta_ladder.size(); ++i)
      if (delta_ladder[i + 1] >= delta_ladder[i])
        throw config_error("config: delta_ladder must be strictly decreasing");
    for (size_t i = 0; i + 1 < eps_ladder.size(); ++i)
      if (eps_ladder[i + 1] >= eps_ladder[i])
        throw config_error("config: eps_ladder must be strictly decreasing");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

inline std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::strtod(tok.c_str(), nullptr));
  }
  return out;
}

}  // namespace detail

/// Applies one "key = value" assignment; unknown keys are errors.
inline void apply_config_entry(SweepConfig& c, const std::string& key, const std::string& value) {
  auto d = [&] { return std::strtod(value.c_str(), nullptr); };
  auto i = [&] { return static_cast<int>(std::strtol(value.c_str(), nullptr, 10)); };
  if (key == "experiment") {
    if (value == "soundhard_tube") c.kind = ExperimentKind::soundhard_tube;
    else if (value == "cloak_tube") c.kind = ExperimentKind::cloak_tube;
    else if (value == "soundhard_screen") c.kind = ExperimentKind::soundhard_screen;
    else if (value == "cloak_screen") c.kind = ExperimentKind::cloak_screen;
    else if (value == "asymptotic_compare") c.kind = ExperimentKind::asymptotic_compare;
    else throw config_error("config: unknown experiment '" + value + "'");
  } else if (key == "geometry") {
    if (value != "tube" && value != "screen")
      throw config_error("config: geometry must be tube or screen");
    c.geometry = value;
  } else if (key == "omega") c.omega = d();
  else if (key == "gamma") c.lossy.gamma = d();
  else if (key == "alpha") c.lossy.alpha = d();
  else if (key == "beta") c.lossy.beta = d();
  else if (key == "sigma_a") c.content.sigma = d();
  else if (key == "q_a_re") c.content.q.real(d());
  else if (key == "q_a_im") c.content.q.imag(d());
  else if (key == "delta_ladder") c.delta_ladder = detail::parse_list(value);
  else if (key == "eps_ladder") c.eps_ladder = detail::parse_list(value);
  else if (key == "eps") c.eps_fixed = d();
  else if (key == "tube_length") c.tube_length = d();
  else if (key == "screen_side") c.screen_side = d();
  else if (key == "n_t") c.n_t = i();
  else if (key == "q_t") c.q_t = i();
  else if (key == "n_theta") c.n_theta = i();
  else if (key == "cap_panels") c.cap_panels = i();
  else if (key == "q_cap") c.q_cap = i();
  else if (key == "seam_grading") c.seam_grading = i();
  else if (key == "inner_n_t") c.inner_n_t = i();
  else if (key == "inner_n_theta") c.inner_n_theta = i();
  else if (key == "inner_cap_panels") c.inner_cap_panels = i();
  else if (key == "scr_n_face") c.scr_n_face = i();
  else if (key == "scr_q") c.scr_q = i();
  else if (key == "scr_n_edge") c.scr_n_edge = i();
  else if (key == "scr_n_beta") c.scr_n_beta = i();
  else if (key == "scr_n_corner") c.scr_n_corner = i();
  else if (key == "inner_scr_n_face") c.inner_scr_n_face = i();
  else if (key == "inner_scr_n_edge") c.inner_scr_n_edge = i();
  else if (key == "inner_scr_n_beta") c.inner_scr_n_beta = i();
  else if (key == "inner_scr_n_corner") c.inner_scr_n_corner = i();
  else if (key == "obs_polar") c.obs_polar = i();
  else if (key == "obs_azimuth") c.obs_azimuth = i();
  else if (key == "n_incident") c.n_incident = i();
  else if (key == "panel_n") c.panel_n = i();
  else if (key == "panel_q") c.panel_q = i();
  else if (key == "volume_level") c.volume_level = i();
  else if (key == "energy") c.energy = i();
  else if (key == "seed") c.seed = static_cast<unsigned>(std::strtoul(value.c_str(), nullptr, 10));
  else if (key == "output") c.output = value;
  else throw config_error("config: unknown key '" + key + "'");
}

inline SweepConfig parse_config(std::istream& is) {
  SweepConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
    apply_config_entry(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("config: cannot open " + path);
  return parse_config(f);
}

}  // namespace thinscat
