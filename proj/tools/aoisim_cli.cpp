// aoisim: command-line front end for the failing-sensor AoI / detection toolkit.

#include <array>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aoisim/aoisim.hpp"

namespace fs = std::filesystem;
using namespace aoisim;
using experiment::ResultRow;
using experiment::SweepSpec;
using experiment::SweepVariable;

namespace {

struct Options {
  SimParams params;
  std::string out;
  std::string svg;
  std::string grid;
  unsigned threads = 0;
  std::size_t resamples = 1000;
  bool no_simulate = false;
  std::optional<double> expected_t;
};

void add_common(CLI::App* cmd, Options& o, bool sweep) {
  cmd->add_option("--lambda", o.params.lambda, "update generation rate (1/s)")->capture_default_str();
  cmd->add_option("--mu", o.params.mu, "service rate (1/s)")->capture_default_str();
  cmd->add_option("--nu", o.params.nu, "failure rate (1/s), E[T] = 1/nu")->capture_default_str();
  cmd->add_option("--recovery", o.params.r, "recovery duration r (s)")->capture_default_str();
  cmd->add_option("--periods", o.params.periods, "number of failure/recovery periods")
      ->capture_default_str();
  cmd->add_option("--seed", o.params.master_seed, "master seed")->capture_default_str();
  cmd->add_flag("--enforce-assumption3", o.params.enforce_assumption3,
                "redraw periods in which no update is delivered before the failure");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--resamples", o.resamples, "bootstrap resamples")->capture_default_str();
  cmd->add_option("--out", o.out, "CSV output path");
  cmd->add_option("--svg", o.svg, "SVG chart output path");
  if (sweep) {
    cmd->add_option("--grid", o.grid, "sweep grid start:stop:step");
    cmd->add_flag("--analytic-only", o.no_simulate, "skip simulation; empirical columns stay empty");
  }
}

std::array<double, 3> parse_grid(const std::string& text) {
  std::array<double, 3> v{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const auto colon = text.find(':', pos);
    if ((i < 2) == (colon == std::string::npos))
      throw CLI::ValidationError("--grid", "expected start:stop:step, got '" + text + "'");
    const std::string part = text.substr(pos, i < 2 ? colon - pos : std::string::npos);
    try {
      std::size_t used = 0;
      v[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--grid", "not a number: '" + part + "'");
    }
    pos = colon + 1;
  }
  return v;
}

// Default outputs land in $AOISIM_OUT_DIR (or the working directory).
fs::path output_path(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  const char* dir = std::getenv("AOISIM_OUT_DIR");
  return fs::path(dir && *dir ? dir : ".") / fallback_name;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_filename(p.stem().string() + suffix + p.extension().string());
  return out;
}

void write_outputs(const std::vector<ResultRow>& rows, const SweepSpec& spec,
                   const experiment::PointOptions& opt, const fs::path& csv) {
  experiment::write_csv(rows, csv);
  fs::path meta = csv;
  meta += ".json";
  experiment::write_text(meta, experiment::sweep_to_json(spec, opt).dump(2) + "\n");
  std::cout << "wrote " << csv.string() << " (" << rows.size() << " rows) and " << meta.string()
            << '\n';
}

int cmd_analytic(const Options& o) {
  const auto rep = analytics::report(o.params);
  std::cout << "tau=" << experiment::format_number(rep.tau) << '\n'
            << "degenerate=" << (rep.degenerate ? "true" : "false") << '\n'
            << "error_rate=" << experiment::format_number(rep.error_rate) << '\n'
            << "aoi_mm1=" << experiment::format_number(rep.aoi_mm1) << '\n'
            << "mean_aoi=" << experiment::format_number(rep.mean_aoi) << '\n'
            << "prior_s1=" << experiment::format_number(rep.prior_s1) << '\n'
            << "region_means=" << experiment::format_number(rep.region_means.r1) << ','
            << experiment::format_number(rep.region_means.r2) << ','
            << experiment::format_number(rep.region_means.r3) << '\n';
  if (!o.out.empty()) {
    SweepSpec spec{SweepVariable::rho, o.params.rho(), o.params.rho(), 1.0, o.params};
    experiment::PointOptions opt{false, o.threads, o.resamples};
    const auto row = experiment::evaluate_point(SweepVariable::rho, o.params.rho(), o.params, opt);
    write_outputs({row}, spec, opt, o.out);
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto rule = DecisionRule::map(o.params.lambda, o.params.nu, o.params.r);
  const auto rep = oracle::monte_carlo_cross_check(o.params, rule, o.threads, o.resamples);
  std::cout << experiment::report_to_json(rep).dump(2) << '\n';
  if (!o.out.empty()) {
    ResultRow row;
    row.swept_var = "rho";
    row.swept_value = o.params.rho();
    row.aoi_analytic = rep.aoi_analytic;
    row.aoi_empirical = rep.aoi_empirical;
    row.aoi_ci = rep.aoi_ci;
    row.err_analytic = rep.err_analytic;
    row.err_empirical = rep.err_empirical;
    row.err_ci = rep.err_ci;
    row.fp_rate = rep.fp_rate;
    row.fn_rate = rep.fn_rate;
    row.seed = o.params.master_seed;
    SweepSpec spec{SweepVariable::rho, o.params.rho(), o.params.rho(), 1.0, o.params};
    write_outputs({row}, spec, {true, o.threads, o.resamples}, o.out);
  }
  return 0;
}

int cmd_sweep(const Options& o, SweepVariable var, const std::string& name,
              std::array<double, 3> default_grid) {
  SweepSpec spec;
  spec.variable = var;
  spec.fixed = o.params;
  if (o.expected_t) spec.fixed.nu = 1.0 / *o.expected_t;
  const auto g = o.grid.empty() ? default_grid : parse_grid(o.grid);
  spec.start = g[0], spec.stop = g[1], spec.step = g[2];
  experiment::PointOptions opt{!o.no_simulate, o.threads, o.resamples};

  const auto rows = experiment::run_sweep(spec, opt);
  write_outputs(rows, spec, opt, output_path(o.out, name + ".csv"));

  if (!o.svg.empty()) {
    const fs::path svg = o.svg;
    using experiment::ChartSeries;
    if (name == "tradeoff") {
      experiment::write_text(
          svg, experiment::svg_chart(rows,
                                     {{"aoi_analytic", "err_analytic", "analytic"},
                                      {"aoi_empirical", "err_empirical", "simulation"}},
                                     "average AoI (s)", "error rate", "AoI / error-rate trade-off"));
    } else if (name == "sweep-threshold") {
      experiment::render_svg(rows, "swept_value", {"err_analytic", "err_empirical"}, svg,
                             "error rate vs threshold");
    } else {
      experiment::render_svg(rows, "swept_value", {"aoi_analytic", "aoi_empirical"}, svg,
                             "average AoI vs " + std::string(experiment::to_string(var)));
      const auto err_svg = with_suffix(svg, "_error");
      experiment::render_svg(rows, "swept_value", {"err_analytic", "err_empirical"}, err_svg,
                             "error rate vs " + std::string(experiment::to_string(var)));
      std::cout << "wrote " << err_svg.string() << '\n';
    }
    std::cout << "wrote " << svg.string() << '\n';
  }
  return 0;
}

int cmd_validate(const Options& o) {
  using nlohmann::json;
  const SimParams& p = o.params;
  json report;

  report["tau"] = map_threshold(p.lambda, p.nu);

  // Closed form vs quadrature over the reference grid (non-degenerate cells).
  double worst = 0.0;
  int cells = 0;
  for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double nu : {0.001, 0.005, 0.01, 0.02, 0.05})
      for (double r : {5.0, 20.0, 50.0}) {
        const double tau = map_threshold(lambda, nu);
        if (tau >= r) continue;
        const double closed = analytics::error_rate_closed_form(lambda, nu, r).value;
        worst = std::max(worst, std::abs(closed - oracle::quadrature_error_rate(lambda, nu, r, tau)));
        ++cells;
      }
  report["formula_vs_quadrature"] = {{"cells", cells}, {"max_abs_diff", worst}, {"pass", worst <= 1e-6}};

  const auto grid = oracle::make_grid(0.0, 2.0 * p.r, 0.02);
  const double best = oracle::scan_optimal_threshold(p.lambda, p.nu, p.r, grid);
  report["threshold_scan"] = {{"argmin", best},
                              {"tau", report["tau"]},
                              {"pass", std::abs(best - report["tau"].get<double>()) <= 0.02}};

  if (!o.no_simulate) {
    const auto rule = DecisionRule::map(p.lambda, p.nu, p.r);
    report["monte_carlo"] =
        experiment::report_to_json(oracle::monte_carlo_cross_check(p, rule, o.threads, o.resamples));
  }

  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    experiment::write_text(o.out, text);
    std::cout << "wrote " << o.out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age of information and failure detection for an intermittently failing sensor"};
  app.require_subcommand(1);
  Options o;

  auto* analytic = app.add_subcommand("analytic", "print the closed-form results");
  add_common(analytic, o, false);
  auto* simulate = app.add_subcommand("simulate", "simulate one configuration and compare");
  add_common(simulate, o, false);
  auto* sweep_rho = app.add_subcommand("sweep-rho", "AoI and error rate over rho (mu fixed)");
  add_common(sweep_rho, o, true);
  sweep_rho->add_option("--expected-T", o.expected_t, "mean time to failure; overrides --nu");
  auto* sweep_t = app.add_subcommand("sweep-expected-t", "AoI and error rate over E[T] = 1/nu");
  add_common(sweep_t, o, true);
  auto* sweep_thr = app.add_subcommand("sweep-threshold", "error rate over detection thresholds");
  add_common(sweep_thr, o, true);
  auto* tradeoff = app.add_subcommand("tradeoff", "(AoI, error rate) pairs over rho");
  add_common(tradeoff, o, true);
  tradeoff->add_option("--expected-T", o.expected_t, "mean time to failure; overrides --nu");
  auto* validate_cmd = app.add_subcommand("validate", "oracle report (JSON)");
  add_common(validate_cmd, o, false);
  validate_cmd->add_flag("--analytic-only", o.no_simulate, "skip the Monte Carlo cross-check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analytic) return cmd_analytic(o);
    if (*simulate) return cmd_simulate(o);
    if (*sweep_rho) return cmd_sweep(o, SweepVariable::rho, "sweep-rho", {0.05, 0.95, 0.05});
    if (*sweep_t) return cmd_sweep(o, SweepVariable::expected_T, "sweep-expected-t", {20, 400, 20});
    if (*sweep_thr) return cmd_sweep(o, SweepVariable::threshold, "sweep-threshold", {1, 20, 1});
    if (*tradeoff) return cmd_sweep(o, SweepVariable::rho, "tradeoff", {0.05, 0.95, 0.05});
    if (*validate_cmd) return cmd_validate(o);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const aoisim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
