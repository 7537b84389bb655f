#include "checks.hpp"

#include "tvf/densities.hpp"
#include "tvf/serialize.hpp"
#include "tvf/simharness.hpp"
#include "tvf/vfold.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Common
{
  std::string family = "R";
  std::string test = "birge";
  double theta = 0.25;
  std::string mode = "fast";
  std::string final_mode = "refit";
  std::string warm_start = "lsvf";
  std::uint64_t seed = 1;
  double quad_tol = 1e-8;
};

void add_common(CLI::App* cmd, Common& c)
{
  cmd->add_option("--family", c.family, "Estimator family: R, K or KR")->check(CLI::IsMember({ "R", "K", "KR" }));
  cmd->add_option("--test", c.test, "Robust test statistic: birge or baraud")
    ->check(CLI::IsMember({ "birge", "baraud" }));
  cmd->add_option("--theta", c.theta, "Test parameter in (0, 1/2)");
  cmd->add_option("--mode", c.mode, "Selection algorithm: fast or naive")->check(CLI::IsMember({ "fast", "naive" }));
  cmd->add_option("--final", c.final_mode, "Final estimator: refit or average")
    ->check(CLI::IsMember({ "refit", "average" }));
  cmd->add_option("--warm-start", c.warm_start, "Fast algorithm start: lsvf, none or a family index");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--quad-tol", c.quad_tol, "Absolute quadrature tolerance");
}

tvf::QuadratureConfig quadrature(const Common& c)
{
  tvf::QuadratureConfig q;
  q.abs_tol = c.quad_tol;
  q.validate();
  return q;
}

std::vector<double> read_points(const std::string& path)
{
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file)
      throw tvf::IoFailure("cannot read '" + path + "'");
    in = &file;
  }
  std::vector<double> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(*in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    const auto last = line.find_last_not_of(" \t\r");
    double v = 0.0;
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
      throw tvf::InvalidArgument("line " + std::to_string(number) + " of '" + path + "' is not a finite real");
    out.push_back(v);
  }
  if (out.empty())
    throw tvf::InvalidArgument("no observations in '" + path + "'");
  return out;
}

void emit(const std::string& path, const std::string& text)
{
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw tvf::IoFailure("cannot write '" + path + "'");
}

// tvf, tvf:baraud, tvf:birge:0.125, klvf, lsvf
tvf::MethodSpec parse_method_spec(const std::string& text, const Common& c)
{
  tvf::MethodSpec spec;
  spec.final_mode = tvf::parse_final_mode(c.final_mode);
  spec.test = tvf::parse_statistic(c.test);
  spec.theta = c.theta;
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string p; std::getline(in, p, ':');)
    parts.push_back(p);
  if (parts.empty())
    throw tvf::InvalidArgument("empty method");
  spec.method = tvf::parse_method(parts[0]);
  if (parts.size() > 1 && spec.method != tvf::Method::tvf)
    throw tvf::InvalidArgument("only tvf takes a test and theta: '" + text + "'");
  if (parts.size() > 1)
    spec.test = tvf::parse_statistic(parts[1]);
  if (parts.size() > 2)
    spec.theta = std::stod(parts[2]);
  if (parts.size() > 3)
    throw tvf::InvalidArgument("bad method '" + text + "'");
  return spec;
}

std::vector<tvf::MethodSpec> expand_methods(const std::vector<std::string>& names,
                                            const std::vector<std::string>& tests,
                                            const std::vector<double>& thetas,
                                            const Common& c)
{
  std::vector<tvf::MethodSpec> out;
  for (const auto& name : names) {
    auto base = parse_method_spec(name, c);
    if (base.method != tvf::Method::tvf || name.find(':') != std::string::npos) {
      out.push_back(base);
      continue;
    }
    for (const auto& t : tests) {
      for (double th : thetas) {
        auto spec = base;
        spec.test = tvf::parse_statistic(t);
        spec.theta = th;
        out.push_back(spec);
      }
    }
  }
  return out;
}

struct SimOptions
{
  std::string density = "s1";
  std::size_t n = 500;
  std::size_t replications = 1000;
  std::string loss = "h2";
  unsigned workers = 0;
  std::string hist_support = "range";
};

void add_sim_options(CLI::App* cmd, SimOptions& s)
{
  cmd->add_option("--n", s.n, "Sample size");
  cmd->add_option("--reps", s.replications, "Monte Carlo replications");
  cmd->add_option("--loss", s.loss, "Loss: h2, l1 or l2")->check(CLI::IsMember({ "h2", "l1", "l2" }));
  cmd->add_option("--workers", s.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--hist-support", s.hist_support, "Histogram support: range or declared")
    ->check(CLI::IsMember({ "range", "declared" }));
}

tvf::SimulationSetup make_setup(const SimOptions& s, const Common& c)
{
  tvf::SimulationSetup setup;
  setup.density = s.density;
  setup.family = tvf::parse_family(c.family);
  setup.n = s.n;
  setup.replications = s.replications;
  setup.loss = tvf::parse_loss(s.loss);
  setup.seed = c.seed;
  setup.algorithm = tvf::parse_algorithm(c.mode);
  setup.workers = s.workers;
  setup.quadrature = quadrature(c);
  setup.histogram_support = tvf::parse_histogram_support(s.hist_support);
  if (c.warm_start == "none")
    setup.lsvf_warm_start = false;
  else if (c.warm_start != "lsvf")
    throw tvf::InvalidArgument("simulations accept --warm-start lsvf or none");
  return setup;
}

int run_select(const Common& c, const std::string& input, std::size_t folds, const std::string& output)
{
  const auto sample = read_points(input);
  const auto support = tvf::data_support(sample);
  const auto family = tvf::make_family(tvf::parse_family(c.family), sample.size(), support);
  tvf::TestConfig cfg;
  cfg.kind = tvf::parse_statistic(c.test);
  cfg.theta = c.theta;
  cfg.quadrature = quadrature(c);
  cfg.validate();
  tvf::FoldWorkspace ws(family, sample, tvf::make_splits(sample.size(), folds, c.seed), cfg);

  tvf::SelectionResult result;
  if (c.mode == "naive") {
    result = tvf::select_naive(ws);
  } else {
    tvf::FastOptions opt;
    if (c.warm_start == "none") {
      opt.lsvf_warm_start = false;
    } else if (c.warm_start != "lsvf") {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(c.warm_start.data(), c.warm_start.data() + c.warm_start.size(), idx);
      if (ec != std::errc() || ptr != c.warm_start.data() + c.warm_start.size())
        throw tvf::InvalidArgument("--warm-start takes lsvf, none or an index");
      opt.warm_start = idx;
    }
    result = tvf::select_fast(ws, opt);
  }
  const auto mode = tvf::parse_final_mode(c.final_mode);
  const auto estimate = tvf::final_estimator(ws, result.chosen, mode);

  nlohmann::json report{ { "n", sample.size() },
                         { "support", { support.lo, support.hi } },
                         { "family", c.family },
                         { "V", folds },
                         { "test", c.test },
                         { "theta", c.theta },
                         { "mode", c.mode },
                         { "final", c.final_mode },
                         { "seed", c.seed },
                         { "selection", tvf::to_json(result, family) },
                         { "estimate", tvf::to_json(estimate) } };
  for (const auto& w : result.warnings)
    std::cerr << "warning: " << w << "\n";
  emit(output, report.dump(2) + "\n");
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Test-based V-fold selection of density estimators" };
  app.set_config("--config", "", "TOML or INI file holding any of the options below");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;

  auto* select = app.add_subcommand("select", "Select an estimator for the points in a file");
  std::string input;
  std::size_t select_folds = 5;
  std::string select_out = "-";
  select->add_option("--input", input, "One real per line ('-' for stdin)")->required();
  select->add_option("--V", select_folds, "Number of folds");
  select->add_option("--output", select_out, "JSON report path ('-' for stdout)");
  add_common(select, common);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo risk of one (density, family, V) cell");
  SimOptions sim;
  std::size_t sim_folds = 2;
  std::vector<std::string> sim_methods{ "tvf" };
  std::string sim_format = "csv";
  std::string sim_out = "-";
  simulate->add_option("--density", sim.density, "Registry density id");
  simulate->add_option("--V", sim_folds, "Number of folds");
  simulate->add_option("--methods", sim_methods, "Methods: tvf[:test[:theta]], klvf, lsvf")->delimiter(',');
  simulate->add_option("--format", sim_format, "csv or json")->check(CLI::IsMember({ "csv", "json" }));
  simulate->add_option("--output", sim_out, "Output path ('-' for stdout)");
  add_sim_options(simulate, sim);
  add_common(simulate, common);

  auto* table = app.add_subcommand("run-table", "Risk table over densities, families, V, tests and theta");
  SimOptions tab;
  std::vector<std::string> tab_densities = tvf::table_densities();
  std::vector<std::string> tab_families{ "R" };
  std::vector<std::size_t> tab_folds{ 2, 5, 10, 20 };
  std::vector<std::string> tab_methods{ "tvf" };
  std::vector<std::string> tab_tests{ "birge" };
  std::vector<double> tab_thetas{ 0.25 };
  std::string tab_external;
  std::string tab_out;
  table->add_option("--densities", tab_densities, "Density ids")->delimiter(',');
  table->add_option("--families", tab_families, "Families")->delimiter(',');
  table->add_option("--V", tab_folds, "Fold counts")->delimiter(',');
  table->add_option("--methods", tab_methods, "Methods: tvf[:test[:theta]], klvf, lsvf")->delimiter(',');
  table->add_option("--tests", tab_tests, "Statistics for plain 'tvf'")->delimiter(',');
  table->add_option("--thetas", tab_thetas, "Theta values for plain 'tvf'")->delimiter(',');
  table->add_option("--external", tab_external, "CSV of externally computed rows to append");
  table->add_option("--output", tab_out, "CSV path")->required();
  add_sim_options(table, tab);
  add_common(table, common);

  auto* compare = app.add_subcommand("compare", "log2 risk ratios of a reference method against others");
  SimOptions cmp;
  std::vector<std::string> cmp_densities = tvf::table_densities();
  std::vector<std::size_t> cmp_folds{ 2, 5, 10, 20 };
  std::string cmp_reference = "tvf";
  std::vector<std::string> cmp_others{ "lsvf", "klvf" };
  std::string cmp_out;
  compare->add_option("--densities", cmp_densities, "Density ids")->delimiter(',');
  compare->add_option("--V", cmp_folds, "Fold counts")->delimiter(',');
  compare->add_option("--reference", cmp_reference, "Reference method");
  compare->add_option("--others", cmp_others, "Methods compared with the reference")->delimiter(',');
  compare->add_option("--output", cmp_out, "CSV path")->required();
  add_sim_options(compare, cmp);
  add_common(compare, common);

  auto* check = app.add_subcommand("check", "Run a property suite; exit status 1 on any failure");
  std::string suite;
  check->add_option("--suite", suite, "bounds, invariants or oracle")
    ->required()
    ->check(CLI::IsMember({ "bounds", "invariants", "oracle" }));

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed())
      return run_select(common, input, select_folds, select_out);

    if (simulate->parsed()) {
      const auto setup = [&] {
        auto s = make_setup(sim, common);
        s.folds = sim_folds;
        return s;
      }();
      std::vector<tvf::MethodSpec> methods;
      for (const auto& m : sim_methods)
        methods.push_back(parse_method_spec(m, common));
      const auto reports = tvf::simulate(setup, methods);
      if (sim_format == "csv") {
        emit(sim_out, std::string(tvf::kRiskCsvHeader) + "\n" + tvf::risk_rows(reports));
      } else {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : reports)
          out.push_back(tvf::to_json(r));
        emit(sim_out, out.dump(2) + "\n");
      }
      return 0;
    }

    if (table->parsed()) {
      std::vector<tvf::ExperimentConfig> configs;
      const auto methods = expand_methods(tab_methods, tab_tests, tab_thetas, common);
      for (const auto& fam : tab_families) {
        for (const auto& d : tab_densities) {
          tvf::ExperimentConfig cfg;
          auto c = common;
          c.family = fam;
          tab.density = d;
          cfg.setup = make_setup(tab, c);
          cfg.folds = tab_folds;
          cfg.methods = methods;
          configs.push_back(cfg);
        }
      }
      std::optional<std::string> external;
      if (!tab_external.empty())
        external = tab_external;
      tvf::run_table(configs, tab_out, external);
      return 0;
    }

    if (compare->parsed()) {
      std::vector<tvf::MethodSpec> others;
      for (const auto& m : cmp_others)
        others.push_back(parse_method_spec(m, common));
      tvf::run_compare(
        cmp_densities, make_setup(cmp, common), cmp_folds, parse_method_spec(cmp_reference, common), others, cmp_out);
      return 0;
    }

    if (check->parsed())
      return tvf_cli::run_suite(suite, std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
