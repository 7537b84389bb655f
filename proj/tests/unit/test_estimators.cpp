#include "tvf/densities.hpp"
#include "tvf/estimators.hpp"
#include "tvf/vfold.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using tvf::Interval;
using tvf::PiecewiseConstant;
using tvf::QuadratureConfig;

TEST(FitHistogram, CountsIntoHeights)
{
  const auto h = tvf::fit_histogram(std::vector<double>{ 0.1, 0.3, 0.9 }, 2, { 0.0, 1.0 });
  ASSERT_EQ(h.histogram().heights.size(), 2u);
  EXPECT_NEAR(h.histogram().heights[0], (2.0 / 3.0) / 0.5, 1e-15);
  EXPECT_NEAR(h.histogram().heights[1], (1.0 / 3.0) / 0.5, 1e-15);
}

TEST(FitHistogram, SingleBinIsUniform)
{
  const auto h = tvf::fit_histogram(std::vector<double>{ 0.2, 0.25, 0.99, 0.5 }, 1, { 0.0, 1.0 });
  EXPECT_EQ(h.histogram().heights, std::vector<double>{ 1.0 });
}

TEST(FitHistogram, IntegratesToOne)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t m : { 1u, 3u, 17u, 81u }) {
    std::vector<double> xs(123);
    for (auto& x : xs)
      x = u(rng);
    EXPECT_NEAR(tvf::fit_histogram(xs, m, { 0.0, 1.0 }).histogram().integral(), 1.0, 1e-14);
  }
}

TEST(FitHistogram, BreakpointConvention)
{
  // 0.5 sits on the inner break and goes left; 1.0 is in the closed last bin;
  // 0.0 is in the closed first bin.
  const auto h = tvf::fit_histogram(std::vector<double>{ 0.0, 0.5, 1.0, 0.75 }, 2, { 0.0, 1.0 });
  EXPECT_NEAR(h.histogram().heights[0], 2.0 / 4.0 / 0.5, 1e-15);
  EXPECT_NEAR(h.histogram().heights[1], 2.0 / 4.0 / 0.5, 1e-15);
  const auto g = tvf::fit_histogram(std::vector<double>{ 0.5 }, 2, { 0.0, 1.0 });
  EXPECT_EQ(g.histogram().heights[0], 2.0);
}

TEST(FitHistogram, OutsidePointsClipToBoundaryBins)
{
  const auto h = tvf::fit_histogram(std::vector<double>{ -3.0, 0.2, 7.0, 0.8 }, 2, { 0.0, 1.0 });
  EXPECT_NEAR(h.histogram().heights[0], 1.0, 1e-15);
  EXPECT_NEAR(h.histogram().heights[1], 1.0, 1e-15);
}

TEST(FitHistogram, InvalidInput)
{
  EXPECT_THROW(tvf::fit_histogram(std::vector<double>{}, 2, { 0.0, 1.0 }), tvf::InvalidArgument);
  EXPECT_THROW(tvf::fit_histogram(std::vector<double>{ 0.1 }, 0, { 0.0, 1.0 }), tvf::InvalidArgument);
  EXPECT_THROW(tvf::fit_histogram(std::vector<double>{ 0.1 }, 2, { 1.0, 1.0 }), tvf::InvalidArgument);
}

TEST(FitKernel, SinglePointAtCenter)
{
  const auto k = tvf::fit_kernel(std::vector<double>{ 0.0 }, 1.0);
  EXPECT_NEAR(k.pdf(0.0), 1.0 / std::sqrt(2.0 * M_PI), 1e-15);
}

TEST(FitKernel, TwoPointMidpoint)
{
  const auto k = tvf::fit_kernel(std::vector<double>{ 0.0, 1.0 }, 0.5);
  EXPECT_NEAR(k.pdf(0.5), 2.0 * oracle::normal_pdf(1.0), 1e-15);
  EXPECT_NEAR(k.pdf(0.5), 0.48394, 5e-6);
}

TEST(FitKernel, IntegratesToOne)
{
  QuadratureConfig cfg;
  const std::vector<double> xs{ -0.3, 0.1, 0.15, 2.0 };
  for (double w : { 0.01, 0.2, 1.5 }) {
    const auto k = tvf::fit_kernel(xs, w);
    auto f = [&k](double x) { return k.pdf(x); };
    std::vector<double> cuts(xs.begin(), xs.end());
    EXPECT_NEAR(tvf::integrate(f, { -0.3 - 8 * w, 2.0 + 8 * w }, cfg, cuts), 1.0, 1e-9) << w;
  }
}

TEST(FitKernel, InvalidInput)
{
  EXPECT_THROW(tvf::fit_kernel(std::vector<double>{ 0.0 }, 0.0), tvf::InvalidArgument);
  EXPECT_THROW(tvf::fit_kernel(std::vector<double>{ 0.0 }, -1.0), tvf::InvalidArgument);
  EXPECT_THROW(tvf::fit_kernel(std::vector<double>{}, 1.0), tvf::InvalidArgument);
}

TEST(Grids, BinGrid)
{
  const auto g = tvf::bin_grid(500);
  EXPECT_EQ(g.size(), static_cast<std::size_t>(std::ceil(500.0 / std::log(500.0))));
  EXPECT_EQ(g.size(), 81u);
  EXPECT_EQ(g.front(), 1u);
  EXPECT_EQ(g.back(), 81u);
  EXPECT_EQ(tvf::bin_grid(10), (std::vector<std::size_t>{ 1, 2, 3, 4, 5 }));
  EXPECT_EQ(tvf::bin_grid(2).front(), 1u);
  EXPECT_THROW(tvf::bin_grid(1), tvf::InvalidArgument);
}

TEST(Grids, BandwidthGrid)
{
  const auto g = tvf::bandwidth_grid(500);
  const double ln = std::log(500.0);
  EXPECT_EQ(g.size(), 38u);
  EXPECT_NEAR(g.front(), (1.0 + 1.5 / ln) / (500.0 * ln), 1e-18);
  EXPECT_NEAR(g.front(), 3.995e-4, 5e-7);
  for (std::size_t i = 1; i < g.size(); ++i)
    EXPECT_GT(g[i], g[i - 1]);
  EXPECT_THROW(tvf::bandwidth_grid(2), tvf::InvalidArgument);
}

TEST(NormalizePi, DensityUnchanged)
{
  QuadratureConfig cfg;
  const auto e = tvf::normalize_pi([](double x) { return 2.0 * x; }, { 0.0, 1.0 }, cfg);
  for (double x : { 0.1, 0.5, 0.9 })
    EXPECT_NEAR(e.pdf(x), 2.0 * x, 1e-9);
}

TEST(NormalizePi, ClipsNegativePart)
{
  QuadratureConfig cfg;
  const auto e = tvf::normalize_pi([](double x) { return x; }, { -1.0, 1.0 }, cfg, { 0.0 });
  EXPECT_NEAR(e.clipped_mass(), 0.5, 1e-12);
  EXPECT_EQ(e.pdf(-0.5), 0.0);
  EXPECT_NEAR(e.pdf(0.25), 0.5, 1e-12);
  EXPECT_NEAR(e.pdf(1.0), 2.0, 1e-12);
  EXPECT_EQ(e.pdf(1.5), 0.0);
}

TEST(NormalizePi, NonpositiveIsDegenerate)
{
  QuadratureConfig cfg;
  EXPECT_THROW(tvf::normalize_pi([](double) { return -1.0; }, { 0.0, 1.0 }, cfg), tvf::DegenerateInput);
  EXPECT_THROW(tvf::normalize_pi([](double) { return 0.0; }, { 0.0, 1.0 }, cfg), tvf::DegenerateInput);
}

TEST(NormalizePi, ProjectionInequality)
{
  // h²(s, π(f)) ≤ min(1, ‖√s − √(f ∨ 0)‖²) for random sign-changing f.
  QuadratureConfig cfg;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& s = tvf::find_density("beta22");
  for (int t = 0; t < 30; ++t) {
    const double a = u(rng);
    const double b = 2.0 * u(rng);
    const double c = 3.0 * u(rng);
    auto f = [=](double x) { return 1.0 + a + b * (x - 0.5) + c * std::sin(6.0 * x); };
    bool positive = false;
    for (double x = 0.0; x <= 1.0; x += 0.01)
      positive = positive || f(x) > 0.0;
    if (!positive)
      continue;
    const auto p = tvf::normalize_pi(f, { 0.0, 1.0 }, cfg);
    const double lhs = tvf::hellinger_sq(s, p, cfg);
    auto gap = [&](double x) {
      const double d = std::sqrt(s.pdf(x)) - std::sqrt(std::max(f(x), 0.0));
      return d * d;
    };
    const double rhs = std::min(1.0, oracle::simpson(gap, 0.0, 1.0, 20000));
    EXPECT_LE(lhs, rhs + 1e-6) << t;
  }
}

TEST(Average, IdenticalPartsGiveSameFunction)
{
  const auto h = tvf::fit_histogram(std::vector<double>{ 0.1, 0.2, 0.7 }, 3, { 0.0, 1.0 });
  const std::vector<tvf::DensityEstimate> parts{ h, h, h };
  const auto avg = tvf::average_estimates(parts);
  for (double x = -0.1; x <= 1.1; x += 0.01)
    EXPECT_NEAR(avg.pdf(x), h.pdf(x), 1e-15);
}

TEST(Average, UniformAndTwoBinHistogram)
{
  const auto u = tvf::make_histogram(PiecewiseConstant{ { 0.0, 1.0 }, { 1.0 } });
  const auto h = tvf::make_histogram(PiecewiseConstant{ { 0.0, 0.5, 1.0 }, { 4.0 / 3.0, 2.0 / 3.0 } });
  const std::vector<tvf::DensityEstimate> parts{ u, h };
  EXPECT_NEAR(tvf::average_estimates(parts).pdf(0.25), 7.0 / 6.0, 1e-15);
}

TEST(Average, EmptyRejected)
{
  EXPECT_THROW(tvf::average_estimates(std::vector<tvf::DensityEstimate>{}), tvf::InvalidArgument);
}

TEST(Average, CollapsedRepresentationsMatchPointwise)
{
  const std::vector<double> a{ 0.1, 0.4, 0.45, 0.8 };
  const std::vector<double> b{ 0.3, 0.35, 0.9 };
  const std::vector<tvf::DensityEstimate> hs{ tvf::fit_histogram(a, 3, { 0.0, 1.0 }),
                                              tvf::fit_histogram(b, 5, { 0.0, 1.0 }) };
  const auto ha = tvf::average_estimates(hs);
  ASSERT_NE(ha.piecewise_constant(), nullptr);
  const std::vector<tvf::DensityEstimate> ks{ tvf::fit_kernel(a, 0.1), tvf::fit_kernel(b, 0.1) };
  const auto ka = tvf::average_estimates(ks);
  ASSERT_NE(ka.grid_table(), nullptr);
  ASSERT_NE(ka.kernel_view(), nullptr);
  for (double x = -0.2; x <= 1.2; x += 0.0137) {
    EXPECT_NEAR((*ha.piecewise_constant())(x), ha.pdf(x), 1e-14);
    EXPECT_NEAR((*ka.kernel_view())(x), ka.pdf(x), 1e-13);
  }
  // Mixed kinds keep only the generic representation.
  const std::vector<tvf::DensityEstimate> mixed{ hs[0], ks[0] };
  const auto ma = tvf::average_estimates(mixed);
  EXPECT_EQ(ma.piecewise_constant(), nullptr);
  EXPECT_EQ(ma.grid_table(), nullptr);
  QuadratureConfig cfg;
  auto f = [&ma](double x) { return ma.pdf(x); };
  EXPECT_NEAR(tvf::integrate(f, ma.extent(1e-12), cfg, ma.knots()), 1.0, 1e-9);
}

class EqLinear : public ::testing::TestWithParam<int>
{
};

TEST_P(EqLinear, FullFitEqualsMeanOfPartials)
{
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const std::size_t v = 2 + static_cast<std::size_t>(GetParam()) % 4;
  const std::size_t n = v * (10 + static_cast<std::size_t>(GetParam()) * 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs)
    x = u(rng);
  const auto splits = tvf::make_splits(n, v, rng());
  const std::size_t bins = 1 + static_cast<std::size_t>(GetParam()) % 13;
  const double w = 0.01 + 0.2 * u(rng);

  std::vector<tvf::DensityEstimate> hp;
  std::vector<tvf::DensityEstimate> kp;
  for (std::size_t j = 0; j < v; ++j) {
    const auto train = tvf::gather(xs, splits.training(j));
    hp.push_back(tvf::fit_histogram(train, bins, { 0.0, 1.0 }));
    kp.push_back(tvf::fit_kernel(train, w));
  }
  const auto hfull = tvf::fit_histogram(xs, bins, { 0.0, 1.0 });
  const auto kfull = tvf::fit_kernel(xs, w);
  const auto havg = tvf::average_estimates(hp);
  const auto kavg = tvf::average_estimates(kp);
  for (int i = 0; i < 1000; ++i) {
    const double x = -0.1 + 1.2 * i / 999.0;
    EXPECT_NEAR(hfull.pdf(x), havg.pdf(x), 1e-12);
    EXPECT_NEAR(kfull.pdf(x), kavg.pdf(x), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Configurations, EqLinear, ::testing::Range(1, 9));

TEST(LossAssumption, AveragingDoesNotIncreaseMeanLoss)
{
  QuadratureConfig cfg;
  std::mt19937_64 rng(77);
  const auto& reg = tvf::registry();
  for (int t = 0; t < 20; ++t) {
    const auto& s = reg[static_cast<std::size_t>(t) % reg.size()];
    const std::size_t v = 2 + static_cast<std::size_t>(t) % 4;
    const auto xs = s.sample(60, rng());
    const auto support = s.bounded() ? s.support() : tvf::data_support(xs);
    const auto splits = tvf::make_splits(xs.size(), v, rng());
    const bool kernel = t % 2 == 1;
    std::vector<tvf::DensityEstimate> parts;
    for (std::size_t j = 0; j < v; ++j) {
      const auto train = tvf::gather(xs, splits.training(j));
      parts.push_back(kernel ? tvf::fit_kernel(train, 0.15) : tvf::fit_histogram(train, 6, support));
    }
    double mean = 0.0;
    for (const auto& p : parts)
      mean += tvf::hellinger_sq(s, p, cfg) / static_cast<double>(v);
    EXPECT_LE(tvf::hellinger_sq(s, tvf::average_estimates(parts), cfg), mean + 1e-6) << s.id();
  }
}

TEST(L2Norm, Histograms)
{
  EXPECT_DOUBLE_EQ(tvf::l2_norm_sq(tvf::make_histogram(PiecewiseConstant{ { 0.0, 1.0 }, { 1.0 } })), 1.0);
  const auto h = tvf::make_histogram(PiecewiseConstant{ { 0.0, 0.5, 1.0 }, { 4.0 / 3.0, 2.0 / 3.0 } });
  EXPECT_NEAR(tvf::l2_norm_sq(h), 10.0 / 9.0, 1e-15);
}

TEST(L2Norm, SingleGaussian)
{
  const auto k = tvf::fit_kernel(std::vector<double>{ 0.3 }, 1.0);
  EXPECT_NEAR(tvf::l2_norm_sq(k), 1.0 / (2.0 * std::sqrt(M_PI)), 1e-15);
}

TEST(L2Norm, MixtureMatchesQuadrature)
{
  const std::vector<double> xs{ -1.0, -0.2, 0.0, 0.05, 0.9, 3.0 };
  for (double w : { 0.02, 0.3, 2.0 }) {
    const auto k = tvf::fit_kernel(xs, w);
    auto sq = [&k](double x) { return k.pdf(x) * k.pdf(x); };
    const double ref = oracle::simpson(sq, -1.0 - 12 * w, 3.0 + 12 * w, 400000);
    EXPECT_NEAR(tvf::l2_norm_sq(k), ref, 1e-8 * std::max(1.0, ref)) << w;
  }
}

TEST(L2Norm, MixedAverageByQuadrature)
{
  const std::vector<double> xs{ 0.2, 0.4, 0.5 };
  const std::vector<tvf::DensityEstimate> parts{ tvf::fit_histogram(xs, 2, { 0.0, 1.0 }),
                                                 tvf::fit_kernel(xs, 0.1) };
  const auto avg = tvf::average_estimates(parts);
  auto sq = [&avg](double x) { return avg.pdf(x) * avg.pdf(x); };
  const double ref = oracle::simpson_pieces(sq, { -1.5, 0.0, 0.5, 1.0, 1.6 }, 20000);
  EXPECT_NEAR(tvf::l2_norm_sq(avg), ref, 1e-7);
}

TEST(Family, ShapesAndOrdering)
{
  const auto r = tvf::make_family(tvf::FamilyId::R, 500, tvf::Interval{ 0.0, 1.0 });
  const auto k = tvf::make_family(tvf::FamilyId::K, 500, tvf::Interval{ 0.0, 1.0 });
  const auto kr = tvf::make_family(tvf::FamilyId::KR, 500, tvf::Interval{ 0.0, 1.0 });
  EXPECT_EQ(r.size(), 81u);
  EXPECT_EQ(k.size(), 38u);
  ASSERT_EQ(kr.size(), 119u);
  EXPECT_EQ(kr.procedures.front().kind, tvf::EstimateKind::histogram);
  EXPECT_EQ(kr.procedures[81].kind, tvf::EstimateKind::kernel_mixture);
  EXPECT_EQ(kr.weights, std::vector<double>(119, 0.0));
  EXPECT_NO_THROW(kr.validate());
  EXPECT_DOUBLE_EQ(r.gamma(), 81.0);
  EXPECT_EQ(tvf::parse_family("KR"), tvf::FamilyId::KR);
  EXPECT_THROW(tvf::parse_family("X"), tvf::InvalidArgument);

  auto bad = r;
  bad.weights[3] = std::nan("");
  EXPECT_THROW(bad.validate(), tvf::InvalidArgument);
  bad.weights.pop_back();
  EXPECT_THROW(bad.validate(), tvf::InvalidArgument);
  EXPECT_THROW(tvf::EstimatorFamily{}.validate(), tvf::InvalidArgument);
}

TEST(DataSupport, PadsRange)
{
  const auto s = tvf::data_support(std::vector<double>{ 2.0, 4.0, 3.0 });
  EXPECT_DOUBLE_EQ(s.lo, 2.0 - 0.002);
  EXPECT_DOUBLE_EQ(s.hi, 4.0 + 0.002);
}

} // namespace

TEST(SampleRange, ExactExtremes)
{
  const std::vector<double> xs{ 0.3, -1.25, 2.5, 0.0 };
  const auto r = tvf::sample_range(xs);
  EXPECT_EQ(r.lo, -1.25);
  EXPECT_EQ(r.hi, 2.5);
  const std::vector<double> same{ 4.0, 4.0 };
  EXPECT_EQ(tvf::sample_range(same).lo, 3.5);
  EXPECT_EQ(tvf::sample_range(same).hi, 4.5);
}

TEST(Family, RangeAdaptiveHistograms)
{
  const std::vector<std::size_t> bins{ 1, 4 };
  const auto fam = tvf::histogram_family(bins, std::nullopt);
  const std::vector<double> xs{ 0.2, 0.4, 0.5, 0.9 };
  const auto one = fam.fit(0, xs);
  EXPECT_EQ(one.histogram().breaks, (std::vector<double>{ 0.2, 0.9 }));
  EXPECT_NEAR(one.histogram().heights[0], 1.0 / 0.7, 1e-12);
  const auto four = fam.fit(1, xs);
  EXPECT_EQ(four.histogram().breaks.front(), 0.2);
  EXPECT_EQ(four.histogram().breaks.back(), 0.9);
  // The minimum lands in the first cell and the maximum in the last.
  EXPECT_NEAR(four.histogram().heights.front() * 0.175, 0.25, 1e-12);
  EXPECT_NEAR(four.histogram().heights.back() * 0.175, 0.25, 1e-12);
}
