#pragma once

#include "tvf/metrics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvf {

enum class EstimateKind
{
  histogram,
  kernel_mixture,
  convex_average,
  /// Output of the clip-and-renormalize operator applied to a plain function.
  clipped
};

enum class Kernel
{
  gaussian
};

/// Kernel mixture x ↦ Σ_i weight_i K((x − center_i)/w) / w.
/// Centers are kept sorted so evaluation only visits the ones within
/// `kKernelCutoff` bandwidths of x.
struct KernelMixture
{
  Kernel kernel = Kernel::gaussian;
  double bandwidth = 1.0;
  std::vector<double> centers;
  std::vector<double> weights;

  double operator()(double x) const;
};

/// Gaussian contributions beyond this many bandwidths are below 1e-21 of the
/// peak and are dropped.
inline constexpr double kKernelCutoff = 10.0;
/// Lattice resolution used to tabulate kernel mixtures for pairwise integrals.
inline constexpr double kTableNodesPerBandwidth = 8.0;

/// Immutable fitted density. Copies share the underlying representation, so
/// estimates are cheap to pass around and safe to read from many threads.
class DensityEstimate : public Density
{
public:
  EstimateKind kind() const;

  double pdf(double x) const override;
  Interval extent(double tail) const override;
  std::vector<double> knots() const override;
  const PiecewiseConstant* piecewise_constant() const override;
  const GridTable* grid_table() const override;

  /// Histogram view (kind histogram only).
  const PiecewiseConstant& histogram() const;
  /// Mixture view (kind kernel_mixture only).
  const KernelMixture& mixture() const;
  /// Single mixture equal to this estimate: set for kernel mixtures and for
  /// averages of mixtures that share a bandwidth.
  const KernelMixture* kernel_view() const;
  /// Components of a convex average (kind convex_average only).
  const std::vector<DensityEstimate>& components() const;
  /// Support and normalizing mass of a clipped function (kind clipped only).
  Interval clipped_support() const;
  double clipped_mass() const;

  struct Impl;

private:
  explicit DensityEstimate(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend DensityEstimate make_histogram(PiecewiseConstant steps);
  friend DensityEstimate make_kernel_mixture(KernelMixture mixture);
  friend DensityEstimate average_estimates(std::span<const DensityEstimate> parts);
  friend DensityEstimate normalize_pi(std::function<double(double)> f,
                                      Interval support,
                                      const QuadratureConfig& cfg,
                                      std::vector<double> knots);
};

/// Wraps a step function that already integrates to one.
DensityEstimate make_histogram(PiecewiseConstant steps);
/// Wraps a mixture whose weights sum to one; sorts the centers.
DensityEstimate make_kernel_mixture(KernelMixture mixture);

/// Regular histogram with `bins` equal cells on `support`. Points outside the
/// support are counted in the boundary cell.
DensityEstimate fit_histogram(std::span<const double> sample, std::size_t bins, Interval support);

/// Parzen estimator with the standard Gaussian kernel.
DensityEstimate fit_kernel(std::span<const double> sample, double bandwidth);

/// Pointwise mean of the parts, each with weight 1/V.
DensityEstimate average_estimates(std::span<const DensityEstimate> parts);

/// (f ∨ 0) / ∫(f ∨ 0) on `support`. Throws DegenerateInput when f has no
/// positive mass there.
DensityEstimate normalize_pi(std::function<double(double)> f,
                             Interval support,
                             const QuadratureConfig& cfg,
                             std::vector<double> knots = {});

/// ‖e‖² = ∫e². Exact for histograms and Gaussian mixtures (using
/// ∫φ_w(x−a)φ_w(x−b)dx = φ_{w√2}(a−b)), quadrature otherwise.
double l2_norm_sq(const DensityEstimate& e, const QuadratureConfig& cfg = {});

/// Bin counts 1, 2, …, ⌈n / log n⌉.
std::vector<std::size_t> bin_grid(std::size_t n);

/// Bandwidths w_m = (1 + 1.5/log n)^m / (n log n), m = 1, …, ⌊(log n)²⌋.
std::vector<double> bandwidth_grid(std::size_t n);

/// [min, max] of the data padded by 0.1% of the range on each side.
Interval data_support(std::span<const double> sample);

/// [min, max] of the sample; ±0.5 around the value when all points coincide.
Interval sample_range(std::span<const double> sample);

/// One member A_m of a family of procedures.
struct Procedure
{
  std::string label;
  EstimateKind kind = EstimateKind::histogram;
  /// Bin count for histograms, bandwidth for kernels.
  double parameter = 0.0;
  std::function<DensityEstimate(std::span<const double>)> fit;
};

/// Indexed set of procedures with per-index weights Δ_m (default 0).
struct EstimatorFamily
{
  std::vector<Procedure> procedures;
  std::vector<double> weights;

  std::size_t size() const { return procedures.size(); }
  DensityEstimate fit(std::size_t m, std::span<const double> sample) const
  {
    return procedures.at(m).fit(sample);
  }
  void validate() const;
  /// Γ = Σ exp(−Δ_m).
  double gamma() const;
};

enum class FamilyId
{
  R,
  K,
  KR
};

FamilyId parse_family(const std::string& name);
std::string to_string(FamilyId id);

/// Regular histograms on a fixed support, or, when `support` is empty, on
/// [min, max] of whatever sample each procedure is fitted to.
EstimatorFamily histogram_family(std::span<const std::size_t> bins, std::optional<Interval> support);
EstimatorFamily kernel_family(std::span<const double> bandwidths);

/// Regular histograms (R), Gaussian kernels (K) or both (KR: histograms first,
/// then kernels) for a sample of size n. Histograms live on `support`, or on
/// the range of their own training sample when it is empty.
EstimatorFamily make_family(FamilyId id, std::size_t n, std::optional<Interval> support);

} // namespace tvf
