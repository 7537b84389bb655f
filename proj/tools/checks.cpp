#include "checks.hpp"

#include "tvf/densities.hpp"
#include "tvf/estimators.hpp"
#include "tvf/metrics.hpp"
#include "tvf/rng.hpp"
#include "tvf/simharness.hpp"
#include "tvf/vfold.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

namespace tvf_cli {
namespace {

struct Property
{
  std::string name;
  std::function<std::string(bool&)> run;
};

std::vector<std::size_t> bins_upto(std::size_t m)
{
  std::vector<std::size_t> b(m);
  for (std::size_t i = 0; i < m; ++i)
    b[i] = i + 1;
  return b;
}

struct Instance
{
  std::vector<double> sample;
  tvf::EstimatorFamily family;
  tvf::SplitScheme splits;
};

Instance make_instance(std::uint64_t seed)
{
  tvf::Philox rng(seed);
  Instance out;
  const std::size_t n = rng.below(2) ? 100 : 200;
  const std::size_t v = rng.below(2) ? 2 : 5;
  const std::size_t m = 2 + rng.below(24);
  const auto& reg = tvf::registry();
  const auto& truth = reg[rng.below(reg.size())];
  out.sample = truth.sample(n, tvf::derive_seed(seed, 1));
  const auto bins = bins_upto(m);
  out.family = tvf::histogram_family(bins, tvf::simulation_support(truth, out.sample));
  out.splits = tvf::make_splits(n, v, tvf::derive_seed(seed, 2));
  return out;
}

std::string str(auto... parts)
{
  std::ostringstream s;
  (s << ... << parts);
  return s.str();
}

std::vector<Property> bounds_suite()
{
  return {
    { "histogram risk bound (uniform truth, m = 5 and 20, n = 500)",
      [](bool& ok) {
        std::string d;
        for (std::size_t m : { 5, 20 }) {
          tvf::SimulationSetup s;
          s.n = 500;
          s.replications = 300;
          s.custom_family = [m](std::size_t, tvf::Interval) {
            const std::vector<std::size_t> bins{ m };
            return tvf::histogram_family(bins, tvf::Interval{ 0.0, 1.0 });
          };
          const auto r = tvf::empirical_risk(s, {});
          const double bound = tvf::histogram_risk_bound(m, 500);
          ok = ok && r.mean_risk <= bound + 3.0 * r.mc_stderr;
          d += str("m=", m, " risk ", r.mean_risk, " bound ", bound, "; ");
        }
        return d;
      } },
    { "kernel risk bound (uniform truth, w = 0.02 and 0.1, n = 500)",
      [](bool& ok) {
        const auto k = tvf::kernel_constants(tvf::Kernel::gaussian);
        std::string d;
        for (double w : { 0.02, 0.1 }) {
          tvf::SimulationSetup s;
          s.n = 500;
          s.replications = 100;
          s.custom_family = [w](std::size_t, tvf::Interval) {
            const std::vector<double> bw{ w };
            return tvf::kernel_family(bw);
          };
          const auto r = tvf::empirical_risk(s, {});
          const double bound =
            tvf::kernel_risk_bound(w, 500, 1.0, [](double eta) { return std::sqrt(2.0 * eta); }, k);
          ok = ok && r.mean_risk <= bound;
          d += str("w=", w, " risk ", r.mean_risk, " bound ", bound, "; ");
        }
        return d;
      } },
    { "kernel constant c_K against its closed form",
      [](bool& ok) {
        const auto k = tvf::kernel_constants(tvf::Kernel::gaussian);
        const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * M_PI);
        const double big_phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
        const double exact = 2.0 * big_phi1 - 1.0 + 2.0 * (phi1 + 1.0 - big_phi1);
        ok = std::abs(k.c - exact) < 1e-9;
        return str("c_K ", k.c, " closed form ", exact);
      } },
    { "test level against exp(-n(1-2 theta)^2 h^2)",
      [](bool& ok) {
        const auto t = tvf::make_histogram(tvf::PiecewiseConstant{ { 0.0, 1.0 }, { 1.0 } });
        const auto u = tvf::make_histogram(tvf::PiecewiseConstant{ { 0.0, 0.5, 1.0 }, { 1.6, 0.4 } });
        const double h2 = 1.0 - 0.5 * (std::sqrt(1.6) + std::sqrt(0.4));
        const double level = std::exp(-50.0 * 0.25 * h2);
        const int reps = 4000;
        std::string d;
        for (auto kind : { tvf::StatisticKind::birge, tvf::StatisticKind::baraud }) {
          tvf::TestConfig cfg;
          cfg.kind = kind;
          int wrong = 0;
          for (int r = 0; r < reps; ++r) {
            const auto xs = tvf::find_density("s1").sample(50, 1000 + static_cast<std::uint64_t>(r));
            wrong += tvf::run_test(t, u, 0.0, cfg, xs).winner == tvf::Winner::second;
          }
          const double p = static_cast<double>(wrong) / reps;
          ok = ok && p <= level + 3.0 * std::sqrt(p * (1 - p) / reps);
          d += str(tvf::to_string(kind), " ", p, " vs ", level, "; ");
        }
        return d;
      } },
  };
}

std::vector<Property> invariants_suite()
{
  return {
    { "h(l, m) <= max(D_j(l), D_j(m)) in every fold",
      [](bool& ok) {
        std::size_t bad = 0;
        std::size_t seen = 0;
        for (std::uint64_t i = 0; i < 10; ++i) {
          auto inst = make_instance(100 + i);
          tvf::FoldWorkspace ws(inst.family, inst.sample, inst.splits, {});
          const auto r = tvf::select_naive(ws);
          for (std::size_t j = 0; j < inst.splits.folds(); ++j)
            for (std::size_t a = 0; a < inst.family.size(); ++a)
              for (std::size_t b = a + 1; b < inst.family.size(); ++b) {
                ++seen;
                const double h = std::sqrt(ws.hellinger_sq(j, a, b));
                bad += h > std::max(std::sqrt(r.lower_bounds[j][a]), std::sqrt(r.lower_bounds[j][b])) + 1e-10;
              }
        }
        ok = bad == 0;
        return str(bad, " violations in ", seen, " checks");
      } },
    { "full-sample fit equals the mean of its partials",
      [](bool& ok) {
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 10; ++i) {
          tvf::Philox rng(200 + i);
          const std::size_t v = 2 + rng.below(4);
          const std::size_t n = v * (10 + rng.below(20));
          const auto xs = tvf::find_density("s2").sample(n, i);
          const auto splits = tvf::make_splits(n, v, i);
          const auto support = tvf::data_support(xs);
          for (int kind = 0; kind < 2; ++kind) {
            auto fit = [&](std::span<const double> s) {
              return kind == 0 ? tvf::fit_histogram(s, 7, support) : tvf::fit_kernel(s, 0.2);
            };
            const auto full = fit(xs);
            std::vector<tvf::DensityEstimate> parts;
            for (std::size_t j = 0; j < v; ++j)
              parts.push_back(fit(tvf::gather(xs, splits.training(j))));
            for (int k = 0; k < 500; ++k) {
              const double x = support.lo + support.length() * k / 499.0;
              double mean = 0.0;
              for (const auto& p : parts)
                mean += p.pdf(x) / static_cast<double>(v);
              worst = std::max(worst, std::abs(mean - full.pdf(x)));
            }
          }
        }
        ok = worst <= 1e-12;
        return str("max gap ", worst);
      } },
    { "averaging partials does not increase Hellinger loss",
      [](bool& ok) {
        int good = 0;
        const int total = 20;
        for (int c = 0; c < total; ++c) {
          const auto& truth = tvf::registry()[static_cast<std::size_t>(c) % tvf::registry().size()];
          const std::size_t v = 2 + static_cast<std::size_t>(c) % 4;
          const auto xs = truth.sample(80, 300 + static_cast<std::uint64_t>(c));
          const auto splits = tvf::make_splits(80, v, static_cast<std::uint64_t>(c));
          const auto support = tvf::simulation_support(truth, xs);
          std::vector<tvf::DensityEstimate> parts;
          double mean = 0.0;
          for (std::size_t j = 0; j < v; ++j) {
            const auto train = tvf::gather(xs, splits.training(j));
            parts.push_back(c % 2 ? tvf::fit_kernel(train, 0.15) : tvf::fit_histogram(train, 6, support));
            mean += tvf::hellinger_sq(truth, parts.back(), {}) / static_cast<double>(v);
          }
          good += tvf::hellinger_sq(truth, tvf::average_estimates(parts), {}) <= mean + 1e-6;
        }
        ok = good == total;
        return str(good, "/", total, " configurations");
      } },
    { "shifting every weight by 3.7 changes nothing",
      [](bool& ok) {
        int changes = 0;
        for (std::uint64_t i = 0; i < 5; ++i) {
          auto inst = make_instance(400 + i);
          tvf::Philox rng(i);
          for (auto& d : inst.family.weights)
            d = 2.0 * rng.uniform();
          auto shifted = inst.family;
          for (auto& d : shifted.weights)
            d += 3.7;
          tvf::FoldWorkspace a(inst.family, inst.sample, inst.splits, {});
          tvf::FoldWorkspace b(shifted, inst.sample, inst.splits, a.partials(), {});
          const auto ra = tvf::select_naive(a);
          const auto rb = tvf::select_naive(b);
          changes += ra.chosen != rb.chosen;
          for (std::size_t j = 0; j < inst.splits.folds(); ++j)
            for (std::size_t m = 0; m < inst.family.size(); ++m)
              changes += std::abs(ra.lower_bounds[j][m] - rb.lower_bounds[j][m]) > 1e-12;
        }
        ok = changes == 0;
        return str(changes, " changes");
      } },
    { "log2 risk ratio is antisymmetric",
      [](bool& ok) {
        const double pairs[][2] = { { 1e-3, 2.5e-3 }, { 0.3, 0.07 }, { 5e-5, 5e-5 } };
        for (const auto& p : pairs)
          ok = ok && tvf::log2_risk_ratio(p[0], p[1]) == -tvf::log2_risk_ratio(p[1], p[0]);
        return std::string("3 pairs");
      } },
    { "results do not depend on the worker count",
      [](bool& ok) {
        tvf::SimulationSetup s;
        s.n = 100;
        s.folds = 5;
        s.replications = 12;
        s.workers = 1;
        const auto one = tvf::empirical_risk(s, {});
        s.workers = 3;
        const auto three = tvf::empirical_risk(s, {});
        ok = one.losses == three.losses;
        return str("mean risk ", one.mean_risk);
      } },
  };
}

std::vector<Property> oracle_suite()
{
  return {
    { "fast selection returns the naive index",
      [](bool& ok) {
        int same = 0;
        int fewer = 0;
        const int total = 30;
        for (int i = 0; i < total; ++i) {
          auto inst = make_instance(500 + static_cast<std::uint64_t>(i));
          tvf::FoldWorkspace ws(inst.family, inst.sample, inst.splits, {});
          const auto naive = tvf::select_naive(ws);
          const auto fast = tvf::select_fast(ws);
          same += fast.chosen == naive.chosen;
          fewer += fast.telemetry.tests_performed <= naive.telemetry.tests_performed;
        }
        ok = same == total && fewer == total;
        return str(same, "/", total, " same index, ", fewer, "/", total, " with no more tests");
      } },
    { "naive dispersions match a direct pairwise recomputation",
      [](bool& ok) {
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 5; ++i) {
          auto inst = make_instance(600 + i);
          tvf::FoldWorkspace ws(inst.family, inst.sample, inst.splits, {});
          const auto r = tvf::select_naive(ws);
          const auto& tp = ws.partials();
          for (std::size_t j = 0; j < inst.splits.folds(); ++j) {
            const auto block = tvf::gather(inst.sample, inst.splits.blocks[j]);
            for (std::size_t m = 0; m < inst.family.size(); ++m) {
              double d = 0.0;
              for (std::size_t l = 0; l < inst.family.size(); ++l) {
                if (l == m)
                  continue;
                const double h2 = tvf::hellinger_sq(tp.at(l, j), tp.at(m, j), {});
                if (h2 <= tvf::kDegenerateHellingerSq)
                  continue;
                const auto out = tvf::run_test(tp.at(l, j), tp.at(m, j), 0.0, {}, block, l, m);
                if (out.winner == tvf::Winner::first)
                  d = std::max(d, h2);
              }
              worst = std::max(worst, std::abs(d - r.lower_bounds[j][m]));
            }
          }
        }
        ok = worst <= 1e-12;
        return str("max difference ", worst);
      } },
    { "exact histogram distances match adaptive quadrature",
      [](bool& ok) {
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 10; ++i) {
          const auto a = tvf::fit_histogram(tvf::find_density("s3").sample(60, i), 3 + i, { 0.0, 5.0 });
          const auto b = tvf::fit_histogram(tvf::find_density("s3").sample(60, 50 + i), 9, { 0.0, 5.0 });
          const tvf::FunctionDensity fa([&a](double x) { return a.pdf(x); }, { 0.0, 5.0 }, a.knots());
          const tvf::FunctionDensity fb([&b](double x) { return b.pdf(x); }, { 0.0, 5.0 }, b.knots());
          worst = std::max(worst, std::abs(tvf::hellinger_sq(a, b, {}) - tvf::hellinger_sq(fa, fb, {})));
        }
        ok = worst <= 1e-7;
        return str("max difference ", worst);
      } },
    { "kernel lattice distances match adaptive quadrature",
      [](bool& ok) {
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 5; ++i) {
          const auto xs = tvf::find_density("s22").sample(40, i);
          const auto k = tvf::fit_kernel(xs, 0.1 + 0.1 * static_cast<double>(i));
          const auto& truth = tvf::find_density("s22");
          const auto ext = k.extent(1e-12);
          const tvf::FunctionDensity fk([&k](double x) { return k.pdf(x); }, ext);
          worst = std::max(worst, std::abs(tvf::hellinger_sq(truth, k, {}) - tvf::hellinger_sq(truth, fk, {})));
        }
        ok = worst <= 1e-6;
        return str("max difference ", worst);
      } },
  };
}

} // namespace

bool run_suite(const std::string& suite, std::ostream& out)
{
  std::vector<Property> props;
  if (suite == "bounds")
    props = bounds_suite();
  else if (suite == "invariants")
    props = invariants_suite();
  else if (suite == "oracle")
    props = oracle_suite();
  else
    throw tvf::InvalidArgument("unknown suite '" + suite + "'");

  bool all = true;
  for (const auto& p : props) {
    bool ok = true;
    std::string detail;
    try {
      detail = p.run(ok);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    out << (ok ? "PASS " : "FAIL ") << p.name << " (" << detail << ")\n";
    all = all && ok;
  }
  return all;
}

} // namespace tvf_cli
