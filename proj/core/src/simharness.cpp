#include "tvf/simharness.hpp"

#include "tvf/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace tvf {

Method parse_method(const std::string& name)
{
  if (name == "tvf")
    return Method::tvf;
  if (name == "klvf")
    return Method::klvf;
  if (name == "lsvf")
    return Method::lsvf;
  throw InvalidArgument("unknown method '" + name + "' (expected tvf, klvf or lsvf)");
}

std::string to_string(Method m)
{
  switch (m) {
    case Method::tvf:
      return "tvf";
    case Method::klvf:
      return "klvf";
    case Method::lsvf:
      return "lsvf";
  }
  return "?";
}

LossKind parse_loss(const std::string& name)
{
  if (name == "h2" || name == "hellinger")
    return LossKind::hellinger_sq;
  if (name == "l1")
    return LossKind::l1;
  if (name == "l2" || name == "l2sq")
    return LossKind::l2_sq;
  throw InvalidArgument("unknown loss '" + name + "' (expected h2, l1 or l2)");
}

std::string to_string(LossKind l)
{
  switch (l) {
    case LossKind::hellinger_sq:
      return "h2";
    case LossKind::l1:
      return "l1";
    case LossKind::l2_sq:
      return "l2";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name)
{
  if (name == "fast")
    return Algorithm::fast;
  if (name == "naive")
    return Algorithm::naive;
  throw InvalidArgument("unknown selection mode '" + name + "' (expected fast or naive)");
}

std::string to_string(Algorithm a)
{
  return a == Algorithm::fast ? "fast" : "naive";
}

HistogramSupport parse_histogram_support(const std::string& name)
{
  if (name == "range")
    return HistogramSupport::sample_range;
  if (name == "declared")
    return HistogramSupport::declared;
  throw InvalidArgument("unknown histogram support '" + name + "' (expected range or declared)");
}

std::string to_string(HistogramSupport h)
{
  return h == HistogramSupport::sample_range ? "range" : "declared";
}

double loss_value(LossKind loss, const Density& s, const Density& t, const QuadratureConfig& cfg)
{
  switch (loss) {
    case LossKind::hellinger_sq:
      return hellinger_sq(s, t, cfg);
    case LossKind::l1:
      return l1_distance(s, t, cfg);
    case LossKind::l2_sq:
      return l2_sq_distance(s, t, cfg);
  }
  return 0.0;
}

std::string MethodSpec::label() const
{
  if (method != Method::tvf)
    return to_string(method);
  std::ostringstream out;
  out << "tvf-" << to_string(test) << "(" << theta << ")";
  return out.str();
}

void SimulationSetup::validate() const
{
  if (replications < 1)
    throw InvalidArgument("at least one replication is required");
  if (folds < 2)
    throw InvalidArgument("V-fold needs at least two folds");
  if (folds > n)
    throw InvalidArgument("more folds than observations");
  quadrature.validate();
  find_density(density);
}

Interval simulation_support(const BenchmarkDensity& truth, std::span<const double> sample)
{
  return truth.bounded() ? truth.support() : data_support(sample);
}

double pairwise_sum(std::span<const double> values)
{
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values)
      s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

struct Replication
{
  std::vector<double> losses;
  std::vector<std::size_t> chosen;
};

Replication run_replication(const SimulationSetup& setup,
                            const std::vector<MethodSpec>& methods,
                            const BenchmarkDensity& truth,
                            std::uint64_t seed)
{
  const auto sample = truth.sample(setup.n, seed);
  const Interval support = simulation_support(truth, sample);
  std::optional<Interval> hist_support;
  if (setup.histogram_support == HistogramSupport::declared)
    hist_support = support;
  const EstimatorFamily family =
    setup.custom_family ? setup.custom_family(setup.n, support) : make_family(setup.family, setup.n, hist_support);
  auto splits = make_splits(setup.n, setup.folds, derive_seed(seed, 1));
  TestConfig tc;
  tc.quadrature = setup.quadrature;
  FoldWorkspace ws(family, sample, std::move(splits), tc);

  std::optional<std::size_t> lsvf;
  std::optional<std::size_t> klvf;
  auto classical = [&](ClassicalKind kind) {
    auto& slot = kind == ClassicalKind::lsvf ? lsvf : klvf;
    if (!slot)
      slot = select_classical(ws, kind).chosen;
    return *slot;
  };

  Replication out;
  for (const auto& spec : methods) {
    std::size_t chosen = 0;
    switch (spec.method) {
      case Method::klvf:
        chosen = classical(ClassicalKind::klvf);
        break;
      case Method::lsvf:
        chosen = classical(ClassicalKind::lsvf);
        break;
      case Method::tvf: {
        tc.kind = spec.test;
        tc.theta = spec.theta;
        ws.set_config(tc);
        if (setup.algorithm == Algorithm::naive) {
          chosen = select_naive(ws).chosen;
        } else {
          FastOptions opt;
          opt.lsvf_warm_start = setup.lsvf_warm_start;
          if (setup.lsvf_warm_start)
            opt.warm_start = classical(ClassicalKind::lsvf);
          chosen = select_fast(ws, opt).chosen;
        }
        break;
      }
    }
    const auto estimate = final_estimator(ws, chosen, spec.final_mode);
    out.losses.push_back(loss_value(setup.loss, truth, estimate, setup.quadrature));
    out.chosen.push_back(chosen);
  }
  return out;
}

std::size_t family_size(const SimulationSetup& setup)
{
  // Histogram support only changes where bins sit, not how many there are.
  if (setup.custom_family)
    return setup.custom_family(setup.n, Interval{ 0.0, 1.0 }).size();
  return make_family(setup.family, setup.n, Interval{ 0.0, 1.0 }).size();
}

} // namespace

std::vector<RiskReport> simulate(const SimulationSetup& setup, const std::vector<MethodSpec>& methods)
{
  setup.validate();
  for (const auto& m : methods) {
    TestConfig tc;
    tc.theta = m.theta;
    tc.validate();
  }
  const auto& truth = find_density(setup.density);
  const std::size_t reps = setup.replications;

  std::vector<Replication> results(reps);
  std::atomic<std::size_t> next{ 0 };
  std::mutex failure_mutex;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::string failure_message;

  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps)
        return;
      {
        std::lock_guard lock(failure_mutex);
        if (r > failed_index)
          return;
      }
      try {
        results[r] = run_replication(setup, methods, truth, derive_seed(setup.seed, r));
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (r < failed_index) {
          failed_index = r;
          failure_message = e.what();
        }
      }
    }
  };

  unsigned workers = setup.workers != 0 ? setup.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, reps));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(worker);
    for (auto& t : pool)
      t.join();
  }
  if (failed_index != std::numeric_limits<std::size_t>::max()) {
    const std::uint64_t seed = derive_seed(setup.seed, failed_index);
    std::ostringstream msg;
    msg << "replication " << failed_index << " (seed " << seed << ") failed: " << failure_message;
    throw ReplicationFailure(msg.str(), failed_index, seed);
  }

  const std::size_t models = family_size(setup);
  std::vector<RiskReport> out;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    RiskReport rep;
    rep.density = setup.density;
    rep.family = setup.custom_family ? "custom" : to_string(setup.family);
    rep.method = methods[k];
    rep.n = setup.n;
    rep.folds = setup.folds;
    rep.replications = reps;
    rep.loss = setup.loss;
    rep.seed = setup.seed;
    rep.losses.resize(reps);
    rep.selected.assign(models, 0);
    for (std::size_t r = 0; r < reps; ++r) {
      rep.losses[r] = results[r].losses[k];
      const std::size_t c = results[r].chosen[k];
      if (c >= rep.selected.size())
        rep.selected.resize(c + 1, 0);
      ++rep.selected[c];
    }
    const double mean = pairwise_sum(rep.losses) / static_cast<double>(reps);
    rep.mean_risk = mean;
    if (reps > 1) {
      std::vector<double> sq(reps);
      for (std::size_t r = 0; r < reps; ++r)
        sq[r] = (rep.losses[r] - mean) * (rep.losses[r] - mean);
      const double var = pairwise_sum(sq) / static_cast<double>(reps - 1);
      rep.mc_stderr = std::sqrt(var / static_cast<double>(reps));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

RiskReport empirical_risk(const SimulationSetup& setup, const MethodSpec& method)
{
  return simulate(setup, { method }).front();
}

double log2_risk_ratio(double risk_a, double risk_b)
{
  if (!(risk_a > 0.0) || !(risk_b > 0.0))
    throw DegenerateComparison("log2 risk ratio needs two positive risks");
  return std::log2(risk_a) - std::log2(risk_b);
}

double log2_risk_ratio(const RiskReport& a, const RiskReport& b)
{
  return log2_risk_ratio(a.mean_risk, b.mean_risk);
}

double theta_stability_ratio(const std::vector<std::vector<double>>& risks)
{
  if (risks.empty())
    throw InvalidArgument("stability ratio needs at least one density");
  double out = 1.0;
  for (const auto& row : risks) {
    if (row.empty())
      throw InvalidArgument("stability ratio needs at least one theta per density");
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    if (!(*lo > 0.0))
      throw DegenerateComparison("stability ratio needs positive risks");
    out = std::min(out, *lo / *hi);
  }
  return out;
}

double upsilon_ratio(std::span<const double> birge_risks, double baraud_risk)
{
  if (birge_risks.empty())
    throw InvalidArgument("upsilon ratio needs at least one theta");
  if (!(baraud_risk > 0.0))
    throw DegenerateComparison("upsilon ratio needs a positive Baraud risk");
  return *std::min_element(birge_risks.begin(), birge_risks.end()) / baraud_risk;
}

UpsilonSummary upsilon_summary(const std::vector<std::vector<double>>& birge_risks,
                               std::span<const double> baraud_risks)
{
  if (birge_risks.size() != baraud_risks.size() || birge_risks.empty())
    throw InvalidArgument("upsilon summary needs one Baraud risk per density");
  UpsilonSummary out;
  for (std::size_t s = 0; s < birge_risks.size(); ++s)
    out.per_density.push_back(upsilon_ratio(birge_risks[s], baraud_risks[s]));
  const auto [lo, hi] = std::minmax_element(out.per_density.begin(), out.per_density.end());
  out.inf = *lo;
  out.sup = *hi;
  return out;
}

double histogram_risk_bound(const Density& s,
                            Interval support,
                            std::size_t bins,
                            std::size_t n,
                            const QuadratureConfig& cfg)
{
  if (bins < 1 || n < 1)
    throw InvalidArgument("histogram bound needs m >= 1 and n >= 1");
  if (!(support.hi > support.lo))
    throw InvalidArgument("histogram bound needs a nonempty support");
  PiecewiseConstant proj;
  proj.breaks.resize(bins + 1);
  const double width = support.hi - support.lo;
  for (std::size_t i = 0; i <= bins; ++i)
    proj.breaks[i] = support.lo + width * (static_cast<double>(i) / static_cast<double>(bins));
  proj.breaks.back() = support.hi;
  const auto knots = s.knots();
  auto f = [&s](double x) { return std::max(0.0, s.pdf(x)); };
  for (std::size_t i = 0; i < bins; ++i) {
    const double lo = proj.breaks[i];
    const double hi = proj.breaks[i + 1];
    proj.heights.push_back(integrate(f, { lo, hi }, cfg, knots) / (hi - lo));
  }
  const double bias = hellinger_sq(s, make_histogram(std::move(proj)), cfg);
  return bias + static_cast<double>(bins - 1) / (2.0 * static_cast<double>(n));
}

double histogram_risk_bound(std::size_t bins, std::size_t n)
{
  if (bins < 1 || n < 1)
    throw InvalidArgument("histogram bound needs m >= 1 and n >= 1");
  return static_cast<double>(bins - 1) / (2.0 * static_cast<double>(n));
}

KernelConstants kernel_constants(Kernel kernel, const QuadratureConfig& cfg)
{
  switch (kernel) {
    case Kernel::gaussian: {
      constexpr double inv_sqrt_2pi = 0.39894228040143267794;
      auto weighted = [](double x) { return std::max(1.0, x * x) * inv_sqrt_2pi * std::exp(-0.5 * x * x); };
      const std::vector<double> cuts{ -1.0, 1.0 };
      KernelConstants k;
      k.c = integrate(weighted, { -40.0, 40.0 }, cfg, cuts);
      k.sup = inv_sqrt_2pi;
      k.big_c = 1.0;
      return k;
    }
  }
  throw InvalidArgument("unknown kernel");
}

double kernel_risk_bound(double bandwidth,
                         std::size_t n,
                         double two_l,
                         const std::function<double(double)>& phi,
                         const KernelConstants& k)
{
  if (!(bandwidth > 0.0) || n < 1)
    throw InvalidArgument("kernel bound needs w > 0 and n >= 1");
  const double p = phi(bandwidth);
  const double nn = static_cast<double>(n);
  return 2.0 * k.c * p * p + two_l * k.sup / (nn * bandwidth) + k.big_c / nn;
}

namespace {

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoFailure("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out)
    throw IoFailure("write to '" + path + "' failed");
}

std::vector<std::string> external_rows(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoFailure("cannot read external results '" + path + "'");
  std::vector<std::string> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (header) {
      if (line != kRiskCsvHeader)
        throw InvalidArgument("external results must start with the header '" + std::string(kRiskCsvHeader) + "'");
      header = false;
      continue;
    }
    if (!line.empty())
      rows.push_back(line);
  }
  if (header)
    throw InvalidArgument("external results file '" + path + "' is empty");
  return rows;
}

} // namespace

std::string risk_rows(const std::vector<RiskReport>& reports)
{
  std::string out;
  for (const auto& r : reports) {
    const bool tvf = r.method.method == Method::tvf;
    out += r.density + "," + r.family + "," + r.method.label() + "," + std::to_string(r.folds) + "," +
           (tvf ? fmt(r.method.theta) : "NA") + "," + (tvf ? to_string(r.method.test) : "NA") + "," +
           std::to_string(r.n) + "," + std::to_string(r.replications) + "," + to_string(r.loss) + "," +
           fmt(r.mean_risk) + "," + fmt(r.mc_stderr) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

void run_table(const std::vector<ExperimentConfig>& configs,
               const std::string& output_path,
               const std::optional<std::string>& external_csv)
{
  std::vector<std::string> extra;
  if (external_csv)
    extra = external_rows(*external_csv);

  std::string text = std::string(kRiskCsvHeader) + "\n";
  for (const auto& cfg : configs) {
    for (std::size_t v : cfg.folds) {
      SimulationSetup setup = cfg.setup;
      setup.folds = v;
      text += risk_rows(simulate(setup, cfg.methods));
    }
  }
  for (const auto& row : extra)
    text += row + "\n";
  write_file(output_path, text);
}

void run_compare(const std::vector<std::string>& densities,
                 const SimulationSetup& setup,
                 const std::vector<std::size_t>& folds,
                 const MethodSpec& reference,
                 const std::vector<MethodSpec>& others,
                 const std::string& output_path)
{
  std::string text = "density,V,family,method_pair,final_mode,w_value\n";
  std::vector<MethodSpec> methods{ reference };
  methods.insert(methods.end(), others.begin(), others.end());
  for (const auto& d : densities) {
    for (std::size_t v : folds) {
      SimulationSetup s = setup;
      s.density = d;
      s.folds = v;
      const auto reports = simulate(s, methods);
      for (std::size_t k = 1; k < reports.size(); ++k) {
        text += d + "," + std::to_string(v) + "," + reports[0].family + "," + reference.label() + "/" +
                others[k - 1].label() + "," + to_string(reference.final_mode) + "," +
                fmt(log2_risk_ratio(reports[0], reports[k])) + "\n";
      }
    }
  }
  write_file(output_path, text);
}

} // namespace tvf
