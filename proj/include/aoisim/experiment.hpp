#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "aoisim/analytics.hpp"
#include "aoisim/error.hpp"
#include "aoisim/failure_detector.hpp"
#include "aoisim/metrics.hpp"
#include "aoisim/oracle.hpp"
#include "aoisim/params.hpp"

namespace aoisim::experiment {

enum class SweepVariable { rho, expected_T, threshold };

inline std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::rho: return "rho";
    case SweepVariable::expected_T: return "expected_T";
    case SweepVariable::threshold: return "threshold";
  }
  return "?";
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::rho;
  double start = 0.05;
  double stop = 0.95;
  double step = 0.05;
  SimParams fixed;

  std::vector<double> grid() const {
    if (!(start < stop)) throw ParameterError("sweep needs start < stop");
    if (!(step > 0.0)) throw ParameterError("sweep needs step > 0");
    auto g = oracle::make_grid(start, stop, step);
    for (double v : g) {
      switch (variable) {
        case SweepVariable::rho:
          if (!(v > 0.0 && v < 1.0)) throw ParameterError("swept rho values must lie in (0, 1)");
          break;
        case SweepVariable::expected_T:
          if (!(v > 0.0)) throw ParameterError("swept E[T] values must be > 0");
          break;
        case SweepVariable::threshold:
          if (!(v >= 0.0)) throw ParameterError("swept thresholds must be >= 0");
          break;
      }
    }
    return g;
  }
};

// One line of a result table. Empirical fields are empty when nothing was
// simulated. Empirical error columns cover R2 and R3 (see oracle).
struct ResultRow {
  std::string swept_var;
  double swept_value = 0.0;
  std::optional<double> aoi_analytic;
  std::optional<double> aoi_empirical;
  std::optional<double> aoi_ci;
  std::optional<double> err_analytic;
  std::optional<double> err_empirical;
  std::optional<double> err_ci;
  std::optional<double> fp_rate;
  std::optional<double> fn_rate;
  std::uint64_t seed = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "swept_var,swept_value,aoi_analytic,aoi_empirical,aoi_ci,err_analytic,err_empirical,err_ci,"
    "fp_rate,fn_rate,seed";

inline constexpr std::array<std::string_view, 11> kColumns = {
    "swept_var", "swept_value", "aoi_analytic", "aoi_empirical", "aoi_ci", "err_analytic",
    "err_empirical", "err_ci", "fp_rate", "fn_rate", "seed"};

// Numeric value of a named column, if present in the row.
inline std::optional<double> column_value(const ResultRow& row, std::string_view column) {
  if (column == "swept_value") return row.swept_value;
  if (column == "aoi_analytic") return row.aoi_analytic;
  if (column == "aoi_empirical") return row.aoi_empirical;
  if (column == "aoi_ci") return row.aoi_ci;
  if (column == "err_analytic") return row.err_analytic;
  if (column == "err_empirical") return row.err_empirical;
  if (column == "err_ci") return row.err_ci;
  if (column == "fp_rate") return row.fp_rate;
  if (column == "fn_rate") return row.fn_rate;
  if (column == "seed") return static_cast<double>(row.seed);
  throw ParameterError("unknown column '" + std::string(column) + "'");
}

// ---------------------------------------------------------------------------
// Running experiments

struct PointOptions {
  bool simulate = true;
  unsigned threads = 0;
  std::size_t resamples = 1000;
};

namespace detail {

inline ResultRow analytic_row(SweepVariable var, double value, const SimParams& p,
                              std::optional<double> tau_override = std::nullopt) {
  ResultRow row;
  row.swept_var = std::string(to_string(var));
  row.swept_value = value;
  row.seed = p.master_seed;
  if (p.stable()) {
    row.aoi_analytic = analytics::mean_aoi_closed_form(p.lambda, p.mu, p.nu, p.r);
    if (tau_override)
      row.err_analytic = oracle::quadrature_error_rate(p.lambda, p.nu, p.r, *tau_override);
    else
      row.err_analytic = analytics::error_rate_closed_form(p.lambda, p.nu, p.r).value;
  }
  return row;
}

inline void fill_empirical(ResultRow& row, const RunMetrics& m, const RunIntervals& ci,
                           std::size_t rule) {
  const auto& e = m.errors[rule];
  const double span = e.measured_time - e.r1_time;
  row.aoi_empirical = m.mean_aoi();
  row.aoi_ci = ci.aoi;
  row.err_empirical = e.error_rate_excluding_r1();
  row.err_ci = ci.error_no_r1[rule];
  row.fp_rate = (e.false_positive_time - e.r1_false_positive_time) / span;
  row.fn_rate = e.false_negative_time / span;
}

}  // namespace detail

// Evaluates one configuration with its MAP rule.
inline ResultRow evaluate_point(SweepVariable var, double value, const SimParams& p,
                                const PointOptions& opt) {
  ResultRow row = detail::analytic_row(var, value, p);
  if (opt.simulate) {
    const auto m = run_metrics(p, {DecisionRule::map(p.lambda, p.nu, p.r)}, opt.threads);
    detail::fill_empirical(row, m, bootstrap_intervals(m, opt.resamples), 0);
  }
  return row;
}

// Rows in grid order. Rho sweeps hold mu fixed and set lambda = rho * mu;
// expected_T sweeps set nu = 1 / E[T]; threshold sweeps simulate once and
// apply every threshold to the same timeline.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec, const PointOptions& opt) {
  validate(spec.fixed);
  const auto grid = spec.grid();
  std::vector<ResultRow> rows;
  rows.reserve(grid.size());

  if (spec.variable == SweepVariable::threshold) {
    const SimParams& p = spec.fixed;
    validate(p, /*require_stable=*/true);
    for (double tau : grid) rows.push_back(detail::analytic_row(spec.variable, tau, p, tau));
    if (opt.simulate) {
      std::vector<DecisionRule> rules;
      for (double tau : grid) rules.push_back(DecisionRule::threshold(tau));
      const auto m = run_metrics(p, rules, opt.threads);
      const auto ci = bootstrap_intervals(m, opt.resamples);
      for (std::size_t i = 0; i < grid.size(); ++i) detail::fill_empirical(rows[i], m, ci, i);
    }
    return rows;
  }

  for (double v : grid) {
    SimParams p = spec.fixed;
    if (spec.variable == SweepVariable::rho)
      p.lambda = v * p.mu;
    else
      p.nu = 1.0 / v;
    validate(p, /*require_stable=*/true);
    rows.push_back(evaluate_point(spec.variable, v, p, opt));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

// Shortest decimal that parses back to the same double.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    out += r.swept_var;
    for (const auto& cell :
         {format_number(r.swept_value), opt(r.aoi_analytic), opt(r.aoi_empirical), opt(r.aoi_ci),
          opt(r.err_analytic), opt(r.err_empirical), opt(r.err_ci), opt(r.fp_rate),
          opt(r.fn_rate), std::to_string(r.seed)}) {
      out += ',';
      out += cell;
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw ParameterError("refusing to write an empty result table");
  write_text(path, to_csv(rows));
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("bad number '" + s + "' in " + context);
  return v;
}

}  // namespace detail

inline std::vector<ResultRow> parse_csv(const std::string& text, const std::string& context = "csv") {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || detail::split_fields(line).size() != kColumns.size() ||
      line.rfind(std::string(kCsvHeader), 0) != 0)
    throw IoError("unexpected header in " + context);
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    const std::string where = context + ":" + std::to_string(lineno);
    if (f.size() != kColumns.size()) throw IoError("wrong field count at " + where);
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return detail::parse_double(s, where);
    };
    ResultRow r;
    r.swept_var = f[0];
    r.swept_value = detail::parse_double(f[1], where);
    r.aoi_analytic = opt(f[2]);
    r.aoi_empirical = opt(f[3]);
    r.aoi_ci = opt(f[4]);
    r.err_analytic = opt(f[5]);
    r.err_empirical = opt(f[6]);
    r.err_ci = opt(f[7]);
    r.fp_rate = opt(f[8]);
    r.fn_rate = opt(f[9]);
    r.seed = std::stoull(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_csv(ss.str(), path.string());
}

// ---------------------------------------------------------------------------
// SVG line chart

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

struct ChartSeries {
  std::string x_column;
  std::string y_column;
  std::string label;
};

// Standalone SVG line chart, one polyline per series. Series whose label
// contains "analytic" are drawn solid, the rest dashed with point markers.
inline std::string svg_chart(const std::vector<ResultRow>& rows,
                             const std::vector<ChartSeries>& specs, std::string_view x_label,
                             std::string_view y_label, std::string_view title = "") {
  if (rows.size() < 2) throw ParameterError("a chart needs at least two rows");
  if (specs.empty()) throw ParameterError("a chart needs at least one series");
  constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 50;
  static constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                         "#9467bd", "#ff7f0e", "#8c564b"};

  std::vector<std::vector<std::pair<double, double>>> pts(specs.size());
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& r : rows) {
      const auto x = column_value(r, specs[i].x_column);
      const auto y = column_value(r, specs[i].y_column);
      if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) continue;
      pts[i].emplace_back(*x, *y);
      xmin = std::min(xmin, *x), xmax = std::max(xmax, *x);
      ymin = std::min(ymin, *y), ymax = std::max(ymax, *y);
    }
  }
  if (!(xmax >= xmin) || !(ymax >= ymin)) throw ParameterError("no plottable values");
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad, ymax += ypad;

  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  using detail::svg_num;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::xml_escape(title) << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    os << "<line x1=\"" << svg_num(px(xv)) << "\" y1=\"" << H - B << "\" x2=\"" << svg_num(px(xv))
       << "\" y2=\"" << H - B + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(px(xv)) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\">" << svg_num(xv) << "</text>\n";
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << svg_num(py(yv)) << "\" x2=\"" << L << "\" y2=\""
       << svg_num(py(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << svg_num(py(yv) + 4)
       << "\" text-anchor=\"end\">" << svg_num(yv) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">"
     << detail::xml_escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const char* color = kColors[i % kColors.size()];
    const bool analytic = specs[i].label.find("analytic") != std::string::npos;
    const char* dash = analytic ? "" : " stroke-dasharray=\"5,3\"";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << dash
       << " points=\"";
    for (std::size_t k = 0; k < pts[i].size(); ++k)
      os << (k ? " " : "") << svg_num(px(pts[i][k].first)) << ','
         << svg_num(py(pts[i][k].second));
    os << "\"/>\n";
    if (!analytic)
      for (const auto& [x, y] : pts[i])
        os << "<circle cx=\"" << svg_num(px(x)) << "\" cy=\"" << svg_num(py(y))
           << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = T + 16 + 18 * static_cast<double>(i);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << dash
       << "/>\n";
    os << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">"
       << detail::xml_escape(specs[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Chart of `y_columns` against `x_column`; axis labels are the column names.
inline std::string svg_chart(const std::vector<ResultRow>& rows, std::string_view x_column,
                             const std::vector<std::string>& y_columns,
                             std::string_view title = "") {
  std::vector<ChartSeries> specs;
  std::string y_label;
  for (const auto& y : y_columns) {
    specs.push_back({std::string(x_column), y, y});
    y_label += (y_label.empty() ? "" : ", ") + y;
  }
  return svg_chart(rows, specs, x_column, y_label, title);
}

inline void render_svg(const std::vector<ResultRow>& rows, std::string_view x_column,
                       const std::vector<std::string>& y_columns, const std::filesystem::path& path,
                       std::string_view title = "") {
  write_text(path, svg_chart(rows, x_column, y_columns, title));
}

// ---------------------------------------------------------------------------
// Run metadata: everything needed to regenerate a table.

inline nlohmann::json params_to_json(const SimParams& p) {
  return {{"lambda", p.lambda}, {"mu", p.mu},           {"nu", p.nu},
          {"r", p.r},           {"periods", p.periods}, {"master_seed", p.master_seed},
          {"enforce_assumption3", p.enforce_assumption3}};
}

inline SimParams params_from_json(const nlohmann::json& j) {
  SimParams p;
  p.lambda = j.at("lambda").get<double>();
  p.mu = j.at("mu").get<double>();
  p.nu = j.at("nu").get<double>();
  p.r = j.at("r").get<double>();
  p.periods = j.at("periods").get<std::uint64_t>();
  p.master_seed = j.at("master_seed").get<std::uint64_t>();
  p.enforce_assumption3 = j.at("enforce_assumption3").get<bool>();
  return p;
}

inline nlohmann::json sweep_to_json(const SweepSpec& s, const PointOptions& opt) {
  return {{"variable", std::string(to_string(s.variable))},
          {"start", s.start},
          {"stop", s.stop},
          {"step", s.step},
          {"fixed", params_to_json(s.fixed)},
          {"simulate", opt.simulate},
          {"resamples", opt.resamples}};
}

inline SweepVariable parse_variable(std::string_view name) {
  if (name == "rho") return SweepVariable::rho;
  if (name == "expected_T") return SweepVariable::expected_T;
  if (name == "threshold") return SweepVariable::threshold;
  throw ParameterError("unknown sweep variable '" + std::string(name) + "'");
}

inline std::pair<SweepSpec, PointOptions> sweep_from_json(const nlohmann::json& j) {
  SweepSpec s;
  s.variable = parse_variable(j.at("variable").get<std::string>());
  s.start = j.at("start").get<double>();
  s.stop = j.at("stop").get<double>();
  s.step = j.at("step").get<double>();
  s.fixed = params_from_json(j.at("fixed"));
  PointOptions opt;
  opt.simulate = j.at("simulate").get<bool>();
  opt.resamples = j.at("resamples").get<std::size_t>();
  return {s, opt};
}

inline nlohmann::json report_to_json(const oracle::CrossCheckReport& r) {
  return {{"params", params_to_json(r.params)},
          {"tau", r.rule.tau},
          {"degenerate", r.rule.degenerate},
          {"periods_without_delivery", r.periods_without_delivery},
          {"aoi", {{"analytic", r.aoi_analytic},
                   {"empirical", r.aoi_empirical},
                   {"rel_dev", r.aoi_rel_dev},
                   {"ci_halfwidth", r.aoi_ci}}},
          {"error_rate", {{"analytic", r.err_analytic},
                          {"empirical", r.err_empirical},
                          {"rel_dev", r.err_rel_dev},
                          {"ci_halfwidth", r.err_ci},
                          {"fp_rate", r.fp_rate},
                          {"fn_rate", r.fn_rate},
                          {"empirical_including_r1", r.err_empirical_full},
                          {"rel_dev_including_r1", r.err_full_rel_dev},
                          {"ci_halfwidth_including_r1", r.err_full_ci}}},
          {"regions", {{"empirical", {r.regions.avg_r1, r.regions.avg_r2, r.regions.avg_r3}},
                       {"analytic", {r.region_analytic.r1, r.region_analytic.r2,
                                     r.region_analytic.r3}},
                       {"time", {r.regions.time_r1, r.regions.time_r2, r.regions.time_r3}}}}};
}

}  // namespace aoisim::experiment
