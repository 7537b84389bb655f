#include "tvf/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

namespace tvf {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

} // namespace

double KernelMixture::operator()(double x) const
{
  const double reach = kKernelCutoff * bandwidth;
  const auto lo = std::lower_bound(centers.begin(), centers.end(), x - reach);
  const auto hi = std::upper_bound(lo, centers.end(), x + reach);
  double sum = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const double z = (x - *it) / bandwidth;
    sum += weights[static_cast<std::size_t>(it - centers.begin())] * std::exp(-0.5 * z * z);
  }
  return sum * kInvSqrt2Pi / bandwidth;
}

struct DensityEstimate::Impl
{
  EstimateKind kind = EstimateKind::histogram;

  // Histograms, and averages of histograms collapsed onto the common
  // refinement of their partitions.
  std::optional<PiecewiseConstant> steps;

  // Kernel mixtures, and averages of mixtures sharing one bandwidth merged
  // into a single mixture.
  std::optional<KernelMixture> mixture;
  std::optional<GridTable> table;

  std::vector<DensityEstimate> parts;

  std::function<double(double)> raw;
  Interval support{};
  double mass = 1.0;
  std::vector<double> knots;
};

DensityEstimate::DensityEstimate(std::shared_ptr<const Impl> impl)
  : impl_(std::move(impl))
{
}

EstimateKind DensityEstimate::kind() const
{
  return impl_->kind;
}

double DensityEstimate::pdf(double x) const
{
  switch (impl_->kind) {
    case EstimateKind::histogram:
      return (*impl_->steps)(x);
    case EstimateKind::kernel_mixture:
      return (*impl_->mixture)(x);
    case EstimateKind::convex_average: {
      double sum = 0.0;
      for (const auto& p : impl_->parts)
        sum += p.pdf(x);
      return sum / static_cast<double>(impl_->parts.size());
    }
    case EstimateKind::clipped: {
      if (!impl_->support.contains(x))
        return 0.0;
      const double v = impl_->raw(x);
      return v > 0.0 ? v / impl_->mass : 0.0;
    }
  }
  return 0.0;
}

Interval DensityEstimate::extent(double tail) const
{
  switch (impl_->kind) {
    case EstimateKind::histogram:
      return impl_->steps->support();
    case EstimateKind::kernel_mixture: {
      const auto& m = *impl_->mixture;
      const double reach = kKernelCutoff * m.bandwidth;
      return { m.centers.front() - reach, m.centers.back() + reach };
    }
    case EstimateKind::convex_average: {
      Interval out = impl_->parts.front().extent(tail);
      for (const auto& p : impl_->parts) {
        const Interval e = p.extent(tail);
        out.lo = std::min(out.lo, e.lo);
        out.hi = std::max(out.hi, e.hi);
      }
      return out;
    }
    case EstimateKind::clipped:
      return impl_->support;
  }
  return {};
}

std::vector<double> DensityEstimate::knots() const
{
  switch (impl_->kind) {
    case EstimateKind::histogram:
      return impl_->steps->breaks;
    case EstimateKind::kernel_mixture:
      return {};
    case EstimateKind::convex_average: {
      if (impl_->steps)
        return impl_->steps->breaks;
      std::vector<double> out;
      for (const auto& p : impl_->parts) {
        const auto k = p.knots();
        out.insert(out.end(), k.begin(), k.end());
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
    case EstimateKind::clipped:
      return impl_->knots;
  }
  return {};
}

const PiecewiseConstant* DensityEstimate::piecewise_constant() const
{
  return impl_->steps ? &*impl_->steps : nullptr;
}

const GridTable* DensityEstimate::grid_table() const
{
  return impl_->table ? &*impl_->table : nullptr;
}

const KernelMixture* DensityEstimate::kernel_view() const
{
  return impl_->mixture ? &*impl_->mixture : nullptr;
}

const PiecewiseConstant& DensityEstimate::histogram() const
{
  if (impl_->kind != EstimateKind::histogram)
    throw InvalidArgument("estimate is not a histogram");
  return *impl_->steps;
}

const KernelMixture& DensityEstimate::mixture() const
{
  if (impl_->kind != EstimateKind::kernel_mixture)
    throw InvalidArgument("estimate is not a kernel mixture");
  return *impl_->mixture;
}

const std::vector<DensityEstimate>& DensityEstimate::components() const
{
  if (impl_->kind != EstimateKind::convex_average)
    throw InvalidArgument("estimate is not a convex average");
  return impl_->parts;
}

Interval DensityEstimate::clipped_support() const
{
  if (impl_->kind != EstimateKind::clipped)
    throw InvalidArgument("estimate is not a clipped function");
  return impl_->support;
}

double DensityEstimate::clipped_mass() const
{
  if (impl_->kind != EstimateKind::clipped)
    throw InvalidArgument("estimate is not a clipped function");
  return impl_->mass;
}

namespace {

void require_sample(std::span<const double> sample)
{
  if (sample.empty())
    throw InvalidArgument("sample is empty");
  for (double x : sample)
    if (!std::isfinite(x))
      throw InvalidArgument("sample contains a non-finite value");
}

// Exact mixture values on the lattice k * w / kTableNodesPerBandwidth,
// covering the mixture's extent plus two guard nodes for interpolation.
GridTable tabulate(const KernelMixture& m)
{
  const double w = m.bandwidth;
  const double step = w / kTableNodesPerBandwidth;
  const double reach = kKernelCutoff * w;
  const auto first = static_cast<std::int64_t>(std::floor((m.centers.front() - reach) / step)) - 2;
  const auto last = static_cast<std::int64_t>(std::ceil((m.centers.back() + reach) / step)) + 2;

  std::vector<double> values(static_cast<std::size_t>(last - first + 1));
  std::size_t a = 0;
  std::size_t b = 0;
  const std::size_t n = m.centers.size();
  for (std::int64_t k = first; k <= last; ++k) {
    const double x = static_cast<double>(k) * step;
    while (a < n && m.centers[a] < x - reach)
      ++a;
    if (b < a)
      b = a;
    while (b < n && m.centers[b] <= x + reach)
      ++b;
    double sum = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      const double z = (x - m.centers[i]) / w;
      sum += m.weights[i] * std::exp(-0.5 * z * z);
    }
    values[static_cast<std::size_t>(k - first)] = sum * kInvSqrt2Pi / w;
  }
  return GridTable(step, first, std::move(values));
}

void sort_mixture(KernelMixture& m)
{
  std::vector<std::size_t> order(m.centers.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t k) {
    return m.centers[i] < m.centers[k];
  });
  std::vector<double> c(order.size());
  std::vector<double> wt(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    c[i] = m.centers[order[i]];
    wt[i] = m.weights[order[i]];
  }
  m.centers = std::move(c);
  m.weights = std::move(wt);
}

std::optional<PiecewiseConstant> merge_steps(std::span<const DensityEstimate> parts)
{
  std::vector<const PiecewiseConstant*> steps;
  for (const auto& p : parts) {
    const auto* s = p.piecewise_constant();
    if (s == nullptr)
      return std::nullopt;
    steps.push_back(s);
  }
  std::vector<double> breaks;
  for (const auto* s : steps)
    breaks.insert(breaks.end(), s->breaks.begin(), s->breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double v = static_cast<double>(parts.size());
  std::vector<double> heights(breaks.size() - 1, 0.0);
  for (std::size_t c = 0; c + 1 < breaks.size(); ++c) {
    const double mid = 0.5 * (breaks[c] + breaks[c + 1]);
    double sum = 0.0;
    for (const auto* s : steps)
      sum += (*s)(mid);
    heights[c] = sum / v;
  }
  return PiecewiseConstant{ std::move(breaks), std::move(heights) };
}

std::optional<KernelMixture> merge_mixtures(std::span<const DensityEstimate> parts)
{
  std::vector<const KernelMixture*> mixes;
  for (const auto& p : parts) {
    const auto* m = p.kernel_view();
    if (m == nullptr)
      return std::nullopt;
    if (!mixes.empty() && (m->bandwidth != mixes.front()->bandwidth || m->kernel != mixes.front()->kernel))
      return std::nullopt;
    mixes.push_back(m);
  }
  KernelMixture out;
  out.kernel = mixes.front()->kernel;
  out.bandwidth = mixes.front()->bandwidth;
  const double v = static_cast<double>(parts.size());
  for (const auto* m : mixes) {
    out.centers.insert(out.centers.end(), m->centers.begin(), m->centers.end());
    for (double wt : m->weights)
      out.weights.push_back(wt / v);
  }
  sort_mixture(out);
  return out;
}

} // namespace

DensityEstimate make_histogram(PiecewiseConstant steps)
{
  if (steps.breaks.size() < 2 || steps.heights.size() + 1 != steps.breaks.size())
    throw InvalidArgument("histogram needs k+1 breaks for k heights");
  if (!std::is_sorted(steps.breaks.begin(), steps.breaks.end()) ||
      std::adjacent_find(steps.breaks.begin(), steps.breaks.end()) != steps.breaks.end())
    throw InvalidArgument("histogram breaks must be strictly increasing");
  for (double h : steps.heights)
    if (!(h >= 0.0) || !std::isfinite(h))
      throw InvalidArgument("histogram heights must be finite and nonnegative");
  auto impl = std::make_shared<DensityEstimate::Impl>();
  impl->kind = EstimateKind::histogram;
  impl->steps = std::move(steps);
  return DensityEstimate(std::move(impl));
}

DensityEstimate make_kernel_mixture(KernelMixture mixture)
{
  if (!(mixture.bandwidth > 0.0) || !std::isfinite(mixture.bandwidth))
    throw InvalidArgument("bandwidth must be positive");
  if (mixture.centers.empty() || mixture.centers.size() != mixture.weights.size())
    throw InvalidArgument("kernel mixture needs one weight per center");
  sort_mixture(mixture);
  auto impl = std::make_shared<DensityEstimate::Impl>();
  impl->kind = EstimateKind::kernel_mixture;
  impl->table = tabulate(mixture);
  impl->mixture = std::move(mixture);
  return DensityEstimate(std::move(impl));
}

DensityEstimate fit_histogram(std::span<const double> sample, std::size_t bins, Interval support)
{
  require_sample(sample);
  if (bins < 1)
    throw InvalidArgument("histogram needs at least one bin");
  if (!(support.hi > support.lo) || !std::isfinite(support.lo) || !std::isfinite(support.hi))
    throw InvalidArgument("histogram support must be a finite, nonempty interval");

  PiecewiseConstant steps;
  steps.breaks.resize(bins + 1);
  const double width = support.hi - support.lo;
  const double m = static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i)
    steps.breaks[i] = support.lo + width * (static_cast<double>(i) / m);
  steps.breaks.back() = support.hi;

  std::vector<std::size_t> counts(bins, 0);
  for (double x : sample) {
    const double clipped = std::clamp(x, support.lo, support.hi);
    ++counts[steps.cell_of(clipped)];
  }
  const double n = static_cast<double>(sample.size());
  steps.heights.resize(bins);
  for (std::size_t i = 0; i < bins; ++i)
    steps.heights[i] = static_cast<double>(counts[i]) / (n * (steps.breaks[i + 1] - steps.breaks[i]));
  return make_histogram(std::move(steps));
}

DensityEstimate fit_kernel(std::span<const double> sample, double bandwidth)
{
  require_sample(sample);
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw InvalidArgument("bandwidth must be positive");
  KernelMixture m;
  m.bandwidth = bandwidth;
  m.centers.assign(sample.begin(), sample.end());
  m.weights.assign(sample.size(), 1.0 / static_cast<double>(sample.size()));
  return make_kernel_mixture(std::move(m));
}

DensityEstimate average_estimates(std::span<const DensityEstimate> parts)
{
  if (parts.empty())
    throw InvalidArgument("cannot average an empty list of estimates");
  auto impl = std::make_shared<DensityEstimate::Impl>();
  impl->kind = EstimateKind::convex_average;
  impl->parts.assign(parts.begin(), parts.end());
  impl->steps = merge_steps(parts);
  if (!impl->steps) {
    impl->mixture = merge_mixtures(parts);
    if (impl->mixture)
      impl->table = tabulate(*impl->mixture);
  }
  return DensityEstimate(std::move(impl));
}

DensityEstimate normalize_pi(std::function<double(double)> f,
                             Interval support,
                             const QuadratureConfig& cfg,
                             std::vector<double> knots)
{
  if (!(support.hi > support.lo) || !std::isfinite(support.lo) || !std::isfinite(support.hi))
    throw InvalidArgument("support must be a finite, nonempty interval");
  auto positive = [&f](double x) {
    const double v = f(x);
    return v > 0.0 ? v : 0.0;
  };
  // Zero crossings of f are kinks of f ∨ 0; locate them so quadrature can
  // split there.
  constexpr int kProbes = 1024;
  const double step = support.length() / kProbes;
  double prev_x = support.lo;
  double prev_f = f(prev_x);
  for (int i = 1; i <= kProbes; ++i) {
    const double x = i == kProbes ? support.hi : support.lo + step * i;
    const double fx = f(x);
    if ((prev_f > 0.0) != (fx > 0.0)) {
      double lo = prev_x;
      double hi = x;
      const bool rising = fx > 0.0;
      for (int it = 0; it < 60 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) > 0.0) == rising)
          hi = mid;
        else
          lo = mid;
      }
      knots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_f = fx;
  }
  const double mass = integrate(positive, support, cfg, knots);
  if (!(mass > 0.0))
    throw DegenerateInput("function has no positive mass on its support");

  knots.push_back(support.lo);
  knots.push_back(support.hi);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  auto impl = std::make_shared<DensityEstimate::Impl>();
  impl->kind = EstimateKind::clipped;
  impl->raw = std::move(f);
  impl->support = support;
  impl->mass = mass;
  impl->knots = std::move(knots);
  return DensityEstimate(std::move(impl));
}

namespace {

double mixture_l2_sq(const KernelMixture& m)
{
  // ∫φ_w(x−a)φ_w(x−b)dx = exp(−(a−b)²/(4w²)) / (2w√π); pairs further apart
  // than 2·kKernelCutoff bandwidths contribute below exp(−100).
  const double w = m.bandwidth;
  const double reach = 2.0 * kKernelCutoff * w;
  const std::size_t n = m.centers.size();
  double diag = 0.0;
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diag += m.weights[i] * m.weights[i];
    for (std::size_t k = i + 1; k < n && m.centers[k] - m.centers[i] <= reach; ++k) {
      const double d = (m.centers[k] - m.centers[i]) / w;
      off += m.weights[i] * m.weights[k] * std::exp(-0.25 * d * d);
    }
  }
  return (diag + 2.0 * off) / (2.0 * w * std::sqrt(std::numbers::pi));
}

double steps_l2_sq(const PiecewiseConstant& s)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i)
    sum += s.heights[i] * s.heights[i] * (s.breaks[i + 1] - s.breaks[i]);
  return sum;
}

} // namespace

double l2_norm_sq(const DensityEstimate& e, const QuadratureConfig& cfg)
{
  if (const auto* s = e.piecewise_constant())
    return steps_l2_sq(*s);
  if (const auto* m = e.kernel_view())
    return mixture_l2_sq(*m);
  auto sq = [&e](double x) {
    const double v = e.pdf(x);
    return v * v;
  };
  return integrate(sq, e.extent(cfg.tail_quantile), cfg, e.knots());
}

std::vector<std::size_t> bin_grid(std::size_t n)
{
  if (n < 2)
    throw InvalidArgument("bin grid needs n >= 2");
  const double nn = static_cast<double>(n);
  const auto top = static_cast<std::size_t>(std::ceil(nn / std::log(nn)));
  std::vector<std::size_t> out(top);
  std::iota(out.begin(), out.end(), std::size_t{ 1 });
  return out;
}

std::vector<double> bandwidth_grid(std::size_t n)
{
  if (n < 3)
    throw InvalidArgument("bandwidth grid needs n >= 3");
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  const auto count = static_cast<std::size_t>(std::floor(ln * ln));
  std::vector<double> out(count);
  for (std::size_t m = 1; m <= count; ++m)
    out[m - 1] = std::pow(1.0 + 1.5 / ln, static_cast<double>(m)) / (nn * ln);
  return out;
}

Interval data_support(std::span<const double> sample)
{
  require_sample(sample);
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  const double range = *hi - *lo;
  const double pad = range > 0.0 ? 1e-3 * range : 0.5;
  return { *lo - pad, *hi + pad };
}

Interval sample_range(std::span<const double> sample)
{
  require_sample(sample);
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  if (*hi > *lo)
    return { *lo, *hi };
  return { *lo - 0.5, *hi + 0.5 };
}

void EstimatorFamily::validate() const
{
  if (procedures.empty())
    throw InvalidArgument("estimator family is empty");
  if (weights.size() != procedures.size())
    throw InvalidArgument("estimator family needs one weight per procedure");
  for (double d : weights)
    if (!std::isfinite(d) || d < 0.0)
      throw InvalidArgument("family weights must be finite and nonnegative");
  for (const auto& p : procedures)
    if (!p.fit)
      throw InvalidArgument("procedure '" + p.label + "' has no fit function");
}

double EstimatorFamily::gamma() const
{
  double g = 0.0;
  for (double d : weights)
    g += std::exp(-d);
  return g;
}

FamilyId parse_family(const std::string& name)
{
  if (name == "R")
    return FamilyId::R;
  if (name == "K")
    return FamilyId::K;
  if (name == "KR")
    return FamilyId::KR;
  throw InvalidArgument("unknown family '" + name + "' (expected R, K or KR)");
}

std::string to_string(FamilyId id)
{
  switch (id) {
    case FamilyId::R:
      return "R";
    case FamilyId::K:
      return "K";
    case FamilyId::KR:
      return "KR";
  }
  return "?";
}

EstimatorFamily histogram_family(std::span<const std::size_t> bins, std::optional<Interval> support)
{
  EstimatorFamily fam;
  for (std::size_t m : bins) {
    if (m < 1)
      throw InvalidArgument("bin counts must be at least 1");
    fam.procedures.push_back({
      .label = "histogram(" + std::to_string(m) + ")",
      .kind = EstimateKind::histogram,
      .parameter = static_cast<double>(m),
      .fit =
        [m, support](std::span<const double> x) {
          return fit_histogram(x, m, support ? *support : sample_range(x));
        },
    });
  }
  fam.weights.assign(fam.procedures.size(), 0.0);
  return fam;
}

EstimatorFamily kernel_family(std::span<const double> bandwidths)
{
  EstimatorFamily fam;
  for (double w : bandwidths) {
    if (!(w > 0.0))
      throw InvalidArgument("bandwidths must be positive");
    std::ostringstream label;
    label.precision(6);
    label << "kernel(" << w << ")";
    fam.procedures.push_back({
      .label = label.str(),
      .kind = EstimateKind::kernel_mixture,
      .parameter = w,
      .fit = [w](std::span<const double> x) { return fit_kernel(x, w); },
    });
  }
  fam.weights.assign(fam.procedures.size(), 0.0);
  return fam;
}

EstimatorFamily make_family(FamilyId id, std::size_t n, std::optional<Interval> support)
{
  EstimatorFamily out;
  if (id == FamilyId::R || id == FamilyId::KR) {
    const auto bins = bin_grid(n);
    out = histogram_family(bins, support);
  }
  if (id == FamilyId::K || id == FamilyId::KR) {
    const auto bw = bandwidth_grid(n);
    auto k = kernel_family(bw);
    out.procedures.insert(out.procedures.end(), k.procedures.begin(), k.procedures.end());
    out.weights.insert(out.weights.end(), k.weights.begin(), k.weights.end());
  }
  return out;
}

} // namespace tvf
