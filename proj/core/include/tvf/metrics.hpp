#pragma once

#include "tvf/common.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tvf {

struct QuadratureConfig
{
  double abs_tol = 1e-8;
  /// Bisection depth allowed per segment between breakpoints.
  unsigned max_depth = 30;
  /// Unbounded densities are integrated between this quantile and its mirror.
  double tail_quantile = 1e-12;

  void validate() const;
};

/// Adaptive Gauss-Kronrod quadrature of `f` over `domain`, split first at every
/// breakpoint that falls inside the domain. Throws NumericFailure when the
/// error estimate stays above tolerance.
double integrate(const std::function<double(double)>& f,
                 Interval domain,
                 const QuadratureConfig& cfg,
                 std::span<const double> breakpoints = {});

/// Step function with `heights[i]` on the i-th cell of `breaks`, zero outside.
///
/// Cells are right-closed, (b_i, b_{i+1}], except the first one which also
/// holds its left end. Values exactly on a break therefore belong to the cell
/// on their left.
struct PiecewiseConstant
{
  std::vector<double> breaks;
  std::vector<double> heights;

  std::size_t cells() const { return heights.size(); }
  Interval support() const { return { breaks.front(), breaks.back() }; }
  /// Cell containing x; x must lie within the support.
  std::size_t cell_of(double x) const;
  double operator()(double x) const;
  double integral() const;
};

/// Samples of a smooth density on the lattice x_k = k * step, k in
/// [first, first + size). Between nodes the density is recovered by cubic
/// Lagrange interpolation; outside the lattice it is zero.
class GridTable
{
public:
  GridTable(double step, std::int64_t first, std::vector<double> values);

  double step() const { return step_; }
  std::int64_t first() const { return first_; }
  std::int64_t last() const { return first_ + static_cast<std::int64_t>(values_.size()) - 1; }
  double lo() const { return static_cast<double>(first_) * step_; }
  double hi() const { return static_cast<double>(last()) * step_; }
  const std::vector<double>& values() const { return values_; }

  double node(std::int64_t k) const;
  double operator()(double x) const;

private:
  double step_;
  std::int64_t first_;
  std::vector<double> values_;
};

/// Anything that can be integrated against another density: benchmark truths,
/// fitted estimates, ad-hoc functions in tests.
class Density
{
public:
  virtual ~Density() = default;

  virtual double pdf(double x) const = 0;
  /// Interval carrying all the mass (bounded support) or all but `tail` of it
  /// on each side.
  virtual Interval extent(double tail) const = 0;
  /// Points where the density may jump or kink; quadrature splits there.
  virtual std::vector<double> knots() const { return {}; }

  /// Exact step-function representation, when the density is one.
  virtual const PiecewiseConstant* piecewise_constant() const { return nullptr; }
  /// Lattice representation, when the density is smooth at a known scale.
  virtual const GridTable* grid_table() const { return nullptr; }
};

/// Density given by a plain callable. Used for truths and test fixtures that
/// have no structure to exploit.
class FunctionDensity : public Density
{
public:
  FunctionDensity(std::function<double(double)> pdf,
                  Interval extent,
                  std::vector<double> knots = {});

  double pdf(double x) const override { return pdf_(x); }
  Interval extent(double) const override { return extent_; }
  std::vector<double> knots() const override { return knots_; }

private:
  std::function<double(double)> pdf_;
  Interval extent_;
  std::vector<double> knots_;
};

/// Integrand g(p(x), q(x)) of a pairwise functional. Must satisfy g(0, 0) = 0.
using PairIntegrand = double (*)(double, double);

/// ∫ g(p, q) dμ, dispatching on the representations of p and q:
/// step × step is summed exactly over the common refinement, any pair
/// involving a lattice uses composite Simpson on the finest lattice (plus
/// all breaks and knots), and everything else falls back to adaptive
/// quadrature on the union of extents.
double integrate_pair(const Density& p,
                      const Density& q,
                      PairIntegrand g,
                      const QuadratureConfig& cfg);

/// Squared Hellinger distance h²(p, q) = ½∫(√p − √q)², clamped into [0, 1].
double hellinger_sq(const Density& p, const Density& q, const QuadratureConfig& cfg);

/// Hellinger affinity ρ(p, q) = 1 − h²(p, q), in [0, 1].
double hellinger_affinity(const Density& p, const Density& q, const QuadratureConfig& cfg);

double l1_distance(const Density& p, const Density& q, const QuadratureConfig& cfg);
double l2_sq_distance(const Density& p, const Density& q, const QuadratureConfig& cfg);

} // namespace tvf
