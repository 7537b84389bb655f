#include "tvf/densities.hpp"

#include "tvf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tvf {

BenchmarkDensity::BenchmarkDensity(Spec spec)
  : spec_(std::move(spec))
{
}

Interval BenchmarkDensity::support() const
{
  if (spec_.support)
    return *spec_.support;
  constexpr double inf = std::numeric_limits<double>::infinity();
  return { -inf, inf };
}

double BenchmarkDensity::pdf(double x) const
{
  if (spec_.support && !spec_.support->contains(x))
    return 0.0;
  return spec_.pdf(x);
}

double BenchmarkDensity::cdf(double x) const
{
  return spec_.cdf(x);
}

double BenchmarkDensity::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("quantile level must lie in (0, 1)");
  if (spec_.quantile)
    return spec_.quantile(p);

  double lo = -1.0;
  double hi = 1.0;
  while (spec_.cdf(lo) > p)
    lo *= 2.0;
  while (spec_.cdf(hi) < p)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (spec_.cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Interval BenchmarkDensity::extent(double tail) const
{
  if (spec_.support)
    return *spec_.support;
  return { quantile(tail), quantile(1.0 - tail) };
}

std::vector<double> BenchmarkDensity::sample(std::size_t n, std::uint64_t seed) const
{
  if (n == 0)
    throw InvalidArgument("sample size must be at least 1");
  Philox rng(seed);
  std::vector<double> out(n);
  for (auto& x : out)
    x = spec_.draw(rng);
  return out;
}

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x, double mean, double sd)
{
  const double z = (x - mean) / sd;
  return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

double normal_cdf(double x, double mean, double sd)
{
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

struct NormalMixture
{
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sds;

  double pdf(double x) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      s += weights[i] * normal_pdf(x, means[i], sds[i]);
    return s;
  }
  double cdf(double x) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      s += weights[i] * normal_cdf(x, means[i], sds[i]);
    return std::min(1.0, s);
  }
  double draw(Philox& rng) const
  {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t i = 0;
    for (; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc)
        break;
    }
    return means[i] + sds[i] * rng.normal();
  }
};

BenchmarkDensity::Spec mixture_spec(std::string id, std::string description, NormalMixture mix)
{
  std::vector<double> knots = mix.means;
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return BenchmarkDensity::Spec{
    .id = std::move(id),
    .description = std::move(description),
    .pdf = [mix](double x) { return mix.pdf(x); },
    .cdf = [mix](double x) { return mix.cdf(x); },
    .quantile = {},
    .draw = [mix](Philox& rng) { return mix.draw(rng); },
    .support = std::nullopt,
    .knots = std::move(knots),
  };
}

std::vector<BenchmarkDensity> build_registry()
{
  std::vector<BenchmarkDensity> out;

  // s1: uniform on [0, 1].
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s1",
    .description = "uniform on [0,1]: pdf 1, cdf x, quantile p",
    .pdf = [](double) { return 1.0; },
    .cdf = [](double x) { return std::clamp(x, 0.0, 1.0); },
    .quantile = [](double p) { return p; },
    .draw = [](Philox& rng) { return rng.uniform(); },
    .support = Interval{ 0.0, 1.0 },
    .knots = { 0.0, 1.0 },
    .steps = PiecewiseConstant{ { 0.0, 1.0 }, { 1.0 } },
  });

  // s2: standard exponential.
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s2",
    .description = "standard exponential: pdf e^-x (x>=0), cdf 1-e^-x, quantile -log(1-p)",
    .pdf = [](double x) { return x < 0.0 ? 0.0 : std::exp(-x); },
    .cdf = [](double x) { return x < 0.0 ? 0.0 : -std::expm1(-x); },
    .quantile = [](double p) { return -std::log1p(-p); },
    .draw = [](Philox& rng) { return -std::log1p(-rng.uniform()); },
    .support = std::nullopt,
    .knots = { 0.0 },
  });

  out.emplace_back(BenchmarkDensity::Spec{
    .id = "normal",
    .description = "standard Gaussian: pdf exp(-x^2/2)/sqrt(2 pi), cdf erfc(-x/sqrt2)/2",
    .pdf = [](double x) { return normal_pdf(x, 0.0, 1.0); },
    .cdf = [](double x) { return normal_cdf(x, 0.0, 1.0); },
    .quantile = {},
    .draw = [](Philox& rng) { return rng.normal(); },
    .support = std::nullopt,
    .knots = { 0.0 },
  });

  {
    // Heavy tails: knots at powers of ten keep quantiles from skipping the
    // peak over the 1e-12 truncated range.
    std::vector<double> knots{ 0.0 };
    for (double k = 1.0; k < 1e13; k *= 10.0) {
      knots.push_back(k);
      knots.push_back(-k);
    }
    out.emplace_back(BenchmarkDensity::Spec{
      .id = "cauchy",
      .description = "standard Cauchy: pdf 1/(pi(1+x^2)), cdf 1/2+atan(x)/pi, quantile tan(pi(p-1/2))",
      .pdf = [](double x) { return 1.0 / (std::numbers::pi * (1.0 + x * x)); },
      .cdf = [](double x) { return 0.5 + std::atan(x) / std::numbers::pi; },
      .quantile = [](double p) { return std::tan(std::numbers::pi * (p - 0.5)); },
      .draw = [](Philox& rng) { return std::tan(std::numbers::pi * (rng.uniform() - 0.5)); },
      .support = std::nullopt,
      .knots = std::move(knots),
    });
  }

  out.emplace_back(BenchmarkDensity::Spec{
    .id = "bimodal",
    .description = "Gaussian mixture 0.5 N(-1.5, 0.5^2) + 0.5 N(1.5, 0.5^2)",
    .pdf = [](double x) { return 0.5 * normal_pdf(x, -1.5, 0.5) + 0.5 * normal_pdf(x, 1.5, 0.5); },
    .cdf = [](double x) { return 0.5 * normal_cdf(x, -1.5, 0.5) + 0.5 * normal_cdf(x, 1.5, 0.5); },
    .quantile = {},
    .draw =
      [](Philox& rng) {
        const double mean = rng.uniform() < 0.5 ? -1.5 : 1.5;
        return mean + 0.5 * rng.normal();
      },
    .support = std::nullopt,
    .knots = { -1.5, 0.0, 1.5 },
  });

  // Rejection sampling against the uniform envelope 1.5 = max pdf.
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "beta22",
    .description = "Beta(2,2) on [0,1]: pdf 6x(1-x), cdf 3x^2-2x^3; sampled by rejection under 1.5",
    .pdf = [](double x) { return 6.0 * x * (1.0 - x); },
    .cdf =
      [](double x) {
        const double t = std::clamp(x, 0.0, 1.0);
        return t * t * (3.0 - 2.0 * t);
      },
    .quantile = {},
    .draw =
      [](Philox& rng) {
        for (;;) {
          const double x = rng.uniform();
          if (1.5 * rng.uniform() <= 6.0 * x * (1.0 - x))
            return x;
        }
      },
    .support = Interval{ 0.0, 1.0 },
    .knots = { 0.0, 1.0 },
  });

  auto triangle_quantile = [](double p) {
    return p < 0.5 ? std::sqrt(0.5 * p) : 1.0 - std::sqrt(0.5 * (1.0 - p));
  };
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "triangle",
    .description = "symmetric triangle on [0,1]: pdf 4x on [0,1/2], 4(1-x) on [1/2,1]; "
                   "cdf 2x^2 then 1-2(1-x)^2",
    .pdf = [](double x) { return x < 0.5 ? 4.0 * x : 4.0 * (1.0 - x); },
    .cdf =
      [](double x) {
        const double t = std::clamp(x, 0.0, 1.0);
        return t < 0.5 ? 2.0 * t * t : 1.0 - 2.0 * (1.0 - t) * (1.0 - t);
      },
    .quantile = triangle_quantile,
    .draw = [triangle_quantile](Philox& rng) { return triangle_quantile(rng.uniform()); },
    .support = Interval{ 0.0, 1.0 },
    .knots = { 0.0, 0.5, 1.0 },
  });


  // Stand-ins for the remaining members of the benchmark subset. Each entry
  // is a textbook law; parameters are the standard ones, not tuned to any
  // external package.
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s3",
    .description = "Maxwell: pdf sqrt(2/pi) x^2 e^(-x^2/2) (x>=0), cdf erf(x/sqrt2) - sqrt(2/pi) x e^(-x^2/2); "
                   "sampled as the norm of three standard normals",
    .pdf = [](double x) { return x < 0.0 ? 0.0 : 2.0 * kInvSqrt2Pi * x * x * std::exp(-0.5 * x * x); },
    .cdf =
      [](double x) {
        if (x <= 0.0)
          return 0.0;
        return std::erf(x / std::numbers::sqrt2) - 2.0 * kInvSqrt2Pi * x * std::exp(-0.5 * x * x);
      },
    .quantile = {},
    .draw =
      [](Philox& rng) {
        const double a = rng.normal();
        const double b = rng.normal();
        const double c = rng.normal();
        return std::sqrt(a * a + b * b + c * c);
      },
    .support = std::nullopt,
    .knots = { 0.0, std::numbers::sqrt2 },
  });

  auto laplace_quantile = [](double p) { return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p)); };
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s4",
    .description = "double exponential: pdf e^(-|x|)/2, cdf e^x/2 (x<0), 1-e^(-x)/2 (x>=0)",
    .pdf = [](double x) { return 0.5 * std::exp(-std::abs(x)); },
    .cdf = [](double x) { return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x); },
    .quantile = laplace_quantile,
    .draw = [laplace_quantile](Philox& rng) { return laplace_quantile(rng.uniform()); },
    .support = std::nullopt,
    .knots = { 0.0 },
  });

  auto logistic_quantile = [](double p) { return std::log(p / (1.0 - p)); };
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s5",
    .description = "logistic: pdf e^(-x)/(1+e^(-x))^2, cdf 1/(1+e^(-x)), quantile log(p/(1-p))",
    .pdf =
      [](double x) {
        const double e = std::exp(-std::abs(x));
        return e / ((1.0 + e) * (1.0 + e));
      },
    .cdf = [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
    .quantile = logistic_quantile,
    .draw = [logistic_quantile](Philox& rng) { return logistic_quantile(rng.uniform()); },
    .support = std::nullopt,
    .knots = { 0.0 },
  });

  auto gumbel_quantile = [](double p) { return -std::log(-std::log(p)); };
  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s7",
    .description = "extreme value (Gumbel): pdf exp(-x - e^(-x)), cdf exp(-e^(-x)), quantile -log(-log p)",
    .pdf = [](double x) { return std::exp(-x - std::exp(-x)); },
    .cdf = [](double x) { return std::exp(-std::exp(-x)); },
    .quantile = gumbel_quantile,
    .draw = [gumbel_quantile](Philox& rng) { return gumbel_quantile(rng.uniform()); },
    .support = std::nullopt,
    .knots = { 0.0 },
  });

  out.emplace_back(BenchmarkDensity::Spec{
    .id = "s12",
    .description = "standard lognormal: pdf exp(-(log x)^2/2)/(x sqrt(2 pi)) (x>0), cdf Phi(log x)",
    .pdf = [](double x) { return x <= 0.0 ? 0.0 : normal_pdf(std::log(x), 0.0, 1.0) / x; },
    .cdf = [](double x) { return x <= 0.0 ? 0.0 : normal_cdf(std::log(x), 0.0, 1.0); },
    .quantile = {},
    .draw = [](Philox& rng) { return std::exp(rng.normal()); },
    .support = std::nullopt,
    .knots = { 0.0, std::exp(-1.0), 1.0 },
  });

  {
    // Equal-weight mixture of U[0, 2^-k], k = 0..4: a step function that
    // piles up near 0.
    PiecewiseConstant steps;
    steps.breaks = { 0.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0 };
    for (int cell = 0; cell < 5; ++cell) {
      double h = 0.0;
      for (int k = 0; k <= 4 - cell; ++k)
        h += 0.2 * std::ldexp(1.0, k);
      steps.heights.push_back(h);
    }
    const PiecewiseConstant shape = steps;
    auto cdf = [shape](double x) {
      const double t = std::clamp(x, 0.0, 1.0);
      double acc = 0.0;
      for (std::size_t c = 0; c < shape.cells(); ++c) {
        const double hi = std::min(t, shape.breaks[c + 1]);
        if (hi > shape.breaks[c])
          acc += shape.heights[c] * (hi - shape.breaks[c]);
      }
      return std::min(1.0, acc);
    };
    out.emplace_back(BenchmarkDensity::Spec{
      .id = "s13",
      .description = "uniform scale mixture: (1/5) sum_{k=0..4} U[0, 2^-k]; pdf (1/5) sum of 2^k over k with "
                     "x <= 2^-k; sampled by picking k then a uniform",
      .pdf = [shape](double x) { return shape(x); },
      .cdf = cdf,
      .quantile = {},
      .draw = [](Philox& rng) { return std::ldexp(rng.uniform(), -static_cast<int>(rng.below(5))); },
      .support = Interval{ 0.0, 1.0 },
      .knots = steps.breaks,
      .steps = steps,
    });
  }

  out.emplace_back(mixture_spec("s22",
                                "skewed bimodal: 3/4 N(0, 1) + 1/4 N(3/2, (1/3)^2)",
                                NormalMixture{ { 0.75, 0.25 }, { 0.0, 1.5 }, { 1.0, 1.0 / 3.0 } }));

  {
    NormalMixture claw{ { 0.5 }, { 0.0 }, { 1.0 } };
    for (int l = 0; l <= 4; ++l) {
      claw.weights.push_back(0.1);
      claw.means.push_back(l / 2.0 - 1.0);
      claw.sds.push_back(0.1);
    }
    out.emplace_back(mixture_spec("s23", "claw: 1/2 N(0, 1) + sum_{l=0..4} 1/10 N(l/2 - 1, (1/10)^2)", claw));
  }

  {
    NormalMixture comb;
    for (int l = 0; l <= 5; ++l) {
      const double scale = std::ldexp(1.0, -l);
      comb.weights.push_back(std::ldexp(1.0, 5 - l) / 63.0);
      comb.means.push_back((65.0 - 96.0 * scale) / 21.0);
      comb.sds.push_back(32.0 / 63.0 * scale);
    }
    out.emplace_back(mixture_spec(
      "s24", "smooth comb: sum_{l=0..5} 2^(5-l)/63 N((65 - 96/2^l)/21, (32/63)^2/2^(2l))", comb));
  }

  return out;
}

} // namespace

const std::vector<BenchmarkDensity>& registry()
{
  static const std::vector<BenchmarkDensity> catalogue = build_registry();
  return catalogue;
}

const std::vector<std::string>& table_densities()
{
  static const std::vector<std::string> ids{ "s1", "s2", "s3", "s4", "s5", "s7", "s12", "s13", "s22", "s23", "s24" };
  return ids;
}

const BenchmarkDensity& find_density(const std::string& id)
{
  for (const auto& d : registry())
    if (d.id() == id)
      return d;
  throw InvalidArgument("unknown density id '" + id + "'");
}

} // namespace tvf
