#pragma once

// Reference computations used by the tests. They are written independently
// of the library code paths they check: fixed-step Simpson instead of the
// adaptive engine, direct pairwise loops instead of the memoized workspace.

#include "tvf/estimators.hpp"
#include "tvf/metrics.hpp"
#include "tvf/robust_tests.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Composite Simpson with `panels` panels on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 2000)
{
  if (panels % 2 != 0)
    ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Simpson on each piece between consecutive cuts.
inline double simpson_pieces(const std::function<double(double)>& f,
                             std::vector<double> cuts,
                             int panels_per_piece = 400)
{
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    // Evaluate strictly inside the piece so jump values never leak across.
    const double ea = std::nextafter(a, b);
    const double eb = std::nextafter(b, a);
    s += simpson(f, ea, eb, panels_per_piece);
  }
  return s;
}

/// Closed-form h² between two step functions by brute force over a common
/// fine evaluation: each refinement cell is probed at its midpoint.
inline double step_hellinger_sq(const tvf::PiecewiseConstant& p, const tvf::PiecewiseConstant& q)
{
  std::vector<double> cuts = p.breaks;
  cuts.insert(cuts.end(), q.breaks.begin(), q.breaks.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double d = std::sqrt(p(mid)) - std::sqrt(q(mid));
    s += 0.5 * d * d * (cuts[i + 1] - cuts[i]);
  }
  return s;
}

/// Random histogram density on `support` with `cells` random-width cells.
inline tvf::PiecewiseConstant random_histogram(std::mt19937_64& rng, tvf::Interval support, int cells)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> breaks{ support.lo, support.hi };
  for (int i = 1; i < cells; ++i)
    breaks.push_back(support.lo + (support.hi - support.lo) * u(rng));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> heights;
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    heights.push_back(0.05 + u(rng));
    mass += heights.back() * (breaks[i + 1] - breaks[i]);
  }
  for (auto& h : heights)
    h /= mass;
  return { breaks, heights };
}

/// D_j²(m) straight from the definition: every l ≠ m is tested against m with
/// run_test on the two densities, the winner's distance enters the max.
inline double dispersion_sq(const std::vector<tvf::DensityEstimate>& partials_j,
                            const std::vector<double>& weights,
                            std::span<const double> validation,
                            const tvf::TestConfig& cfg,
                            std::size_t m)
{
  double d = 0.0;
  for (std::size_t l = 0; l < partials_j.size(); ++l) {
    if (l == m)
      continue;
    const double h2 = tvf::hellinger_sq(partials_j[l], partials_j[m], cfg.quadrature);
    if (h2 <= tvf::kDegenerateHellingerSq)
      continue;
    const auto out =
      tvf::run_test(partials_j[l], partials_j[m], weights[l] - weights[m], cfg, validation, l, m);
    if (out.winner == tvf::Winner::first)
      d = std::max(d, h2);
  }
  return d;
}

inline double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

} // namespace oracle
