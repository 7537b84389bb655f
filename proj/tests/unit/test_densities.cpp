#include "tvf/densities.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace {

using tvf::find_density;
using tvf::registry;

TEST(Densities, UniformPdf)
{
  const auto& s1 = find_density("s1");
  EXPECT_DOUBLE_EQ(s1.pdf(0.5), 1.0);
  EXPECT_DOUBLE_EQ(s1.pdf(1.5), 0.0);
  EXPECT_DOUBLE_EQ(s1.pdf(-0.1), 0.0);
}

TEST(Densities, ExponentialPdfAtZero)
{
  EXPECT_DOUBLE_EQ(find_density("s2").pdf(0.0), std::exp(-0.0));
  EXPECT_DOUBLE_EQ(find_density("s2").pdf(-1.0), 0.0);
}

TEST(Densities, SmallSampleInSupport)
{
  const auto x = find_density("s1").sample(4, 7);
  ASSERT_EQ(x.size(), 4u);
  for (double v : x) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Densities, SampleMeans)
{
  const auto u = find_density("s1").sample(100000, 1);
  EXPECT_NEAR(std::accumulate(u.begin(), u.end(), 0.0) / u.size(), 0.5, 0.01);
  const auto e = find_density("s2").sample(100000, 1);
  EXPECT_NEAR(std::accumulate(e.begin(), e.end(), 0.0) / e.size(), 1.0, 0.03);
}

TEST(Densities, ZeroSampleSizeRejected)
{
  EXPECT_THROW(find_density("s1").sample(0, 1), tvf::InvalidArgument);
}

TEST(Densities, UnknownIdRejected)
{
  EXPECT_THROW(find_density("nope"), tvf::InvalidArgument);
}

TEST(Densities, RegistryContents)
{
  const auto& reg = registry();
  EXPECT_GE(reg.size(), 6u);
  EXPECT_EQ(reg.front().id(), "s1");
  for (const auto& d : reg)
    EXPECT_FALSE(d.description().empty()) << d.id();
}

TEST(Densities, TableIdsResolve)
{
  const auto& ids = tvf::table_densities();
  ASSERT_EQ(ids.size(), 11u);
  EXPECT_EQ(ids.front(), "s1");
  for (const auto& id : ids)
    EXPECT_EQ(tvf::find_density(id).id(), id);
}


TEST(Densities, EveryEntryNormalized)
{
  tvf::QuadratureConfig cfg;
  for (const auto& d : registry()) {
    const auto ext = d.extent(cfg.tail_quantile);
    auto f = [&d](double x) { return d.pdf(x); };
    const auto knots = d.knots();
    const double mass = tvf::integrate(f, ext, cfg, knots);
    // Bounded supports carry all the mass; unbounded ones lose 2e-12 in tails.
    EXPECT_NEAR(mass, 1.0, 1e-6) << d.id();
  }
}

TEST(Densities, PdfNonnegativeAndZeroOutsideBoundedSupport)
{
  for (const auto& d : registry()) {
    for (double x = -20.0; x <= 20.0; x += 0.173)
      EXPECT_GE(d.pdf(x), 0.0) << d.id();
    if (d.bounded()) {
      EXPECT_EQ(d.pdf(d.support().lo - 1e-9), 0.0) << d.id();
      EXPECT_EQ(d.pdf(d.support().hi + 1e-9), 0.0) << d.id();
    }
  }
}

TEST(Densities, CdfMatchesIntegratedPdf)
{
  tvf::QuadratureConfig cfg;
  for (const auto& d : registry()) {
    const auto ext = d.extent(cfg.tail_quantile);
    auto f = [&d](double x) { return d.pdf(x); };
    for (double p : { 0.1, 0.5, 0.8 }) {
      const double x = d.quantile(p);
      const double mass = tvf::integrate(f, { ext.lo, x }, cfg, d.knots());
      EXPECT_NEAR(mass, d.cdf(x) - d.cdf(ext.lo), 1e-7) << d.id() << " p=" << p;
      EXPECT_NEAR(d.cdf(x), p, 1e-9) << d.id();
    }
  }
}

TEST(Densities, KolmogorovSmirnovAgainstCdf)
{
  for (const auto& d : registry()) {
    auto x = d.sample(100000, 2024);
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = d.cdf(x[i]);
      ks = std::max({ ks, std::abs(f - i / n), std::abs((i + 1) / n - f) });
    }
    EXPECT_LE(ks, 0.01) << d.id();
  }
}

TEST(Densities, SamplesInsideBoundedSupport)
{
  for (const auto& d : registry()) {
    if (!d.bounded())
      continue;
    for (double v : d.sample(20000, 5)) {
      ASSERT_GE(v, d.support().lo) << d.id();
      ASSERT_LE(v, d.support().hi) << d.id();
    }
  }
}

TEST(Densities, SameSeedBitIdentical)
{
  for (const auto& d : registry())
    EXPECT_EQ(d.sample(500, 99), d.sample(500, 99)) << d.id();
  EXPECT_NE(find_density("normal").sample(10, 1), find_density("normal").sample(10, 2));
}

TEST(Densities, QuantileRejectsBadLevels)
{
  EXPECT_THROW(find_density("normal").quantile(0.0), tvf::InvalidArgument);
  EXPECT_THROW(find_density("normal").quantile(1.0), tvf::InvalidArgument);
  EXPECT_NEAR(find_density("normal").quantile(oracle::normal_cdf(1.3)), 1.3, 1e-9);
}

} // namespace
