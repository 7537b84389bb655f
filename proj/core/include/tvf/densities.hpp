#pragma once

#include "tvf/metrics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tvf {

/// Ground-truth density used by the simulation harness.
///
/// Every entry carries its closed-form pdf and cdf, a quantile (closed form or
/// numerical inversion of the cdf) and a seeded sampler. Densities with a
/// bounded support evaluate to zero outside it.
class BenchmarkDensity : public Density
{
public:
  using Sampler = std::function<double(class Philox&)>;

  struct Spec
  {
    std::string id;
    std::string description;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    /// Closed-form quantile; when empty the cdf is inverted numerically.
    std::function<double(double)> quantile;
    /// One draw from the density.
    Sampler draw;
    /// Declared support; nullopt for an unbounded one.
    std::optional<Interval> support;
    std::vector<double> knots;
    /// Set for densities that are step functions (the uniform).
    std::optional<PiecewiseConstant> steps;
  };

  explicit BenchmarkDensity(Spec spec);

  const std::string& id() const { return spec_.id; }
  const std::string& description() const { return spec_.description; }
  bool bounded() const { return spec_.support.has_value(); }
  /// Declared support. Unbounded densities report ±infinity.
  Interval support() const;

  double pdf(double x) const override;
  double cdf(double x) const;
  double quantile(double p) const;
  Interval extent(double tail) const override;
  std::vector<double> knots() const override { return spec_.knots; }
  const PiecewiseConstant* piecewise_constant() const override
  {
    return spec_.steps ? &*spec_.steps : nullptr;
  }

  /// `n` i.i.d. draws; identical output for identical (n, seed).
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

private:
  Spec spec_;
};

/// The shipped catalogue, in a fixed order. Always starts with "s1"
/// (uniform on [0, 1]).
const std::vector<BenchmarkDensity>& registry();

/// Ids of the eleven densities shown in risk tables, in table order.
const std::vector<std::string>& table_densities();

/// Registry lookup by id; throws InvalidArgument for an unknown id.
const BenchmarkDensity& find_density(const std::string& id);

} // namespace tvf
