#pragma once

#include "tvf/metrics.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace tvf {

enum class StatisticKind
{
  birge,
  baraud
};

StatisticKind parse_statistic(const std::string& name);
std::string to_string(StatisticKind kind);

struct TestConfig
{
  StatisticKind kind = StatisticKind::birge;
  double theta = 0.25;
  /// Densities are floored at this value before logs and square roots.
  double floor = 1e-300;
  QuadratureConfig quadrature{};

  void validate() const;
};

/// Pairs whose squared Hellinger distance is at most this value are treated
/// as identical: no statistic is computed and they never enter a dispersion.
inline constexpr double kDegenerateHellingerSq = 1e-20;

enum class Winner
{
  first,
  second
};

struct TestOutcome
{
  Winner winner = Winner::first;
  double statistic = 0.0;
  double threshold = 0.0;
};

/// Birgé's statistic from density values at the validation points and the
/// squared Hellinger distance of the pair:
///   Σ_i log[(sin(ω(1−θ))√t_i + sin(ωθ)√u_i) / (sin(ω(1−θ))√u_i + sin(ωθ)√t_i)]
/// with ω = arccos(1 − h²). Each term is evaluated as a difference of logs so
/// swapping t and u negates the result exactly.
double birge_statistic(std::span<const double> t_values,
                       std::span<const double> u_values,
                       double hellinger_sq,
                       double theta,
                       double floor = 1e-300);

/// Birgé's statistic for two densities; ρ(t, u) comes from hellinger_affinity.
/// Throws DegeneratePair when t and u coincide.
double birge_statistic(const Density& t,
                       const Density& u,
                       double theta,
                       std::span<const double> validation,
                       const QuadratureConfig& cfg = {},
                       double floor = 1e-300);

/// ∫(√t − √u)√((t + u)/2) dμ, the deterministic half of Baraud's statistic.
double baraud_integral(const Density& t, const Density& u, const QuadratureConfig& cfg);

/// ½[(1/n)Σ_i (√t_i − √u_i)/√((t_i + u_i)/2) + integral].
double baraud_statistic(std::span<const double> t_values,
                        std::span<const double> u_values,
                        double integral,
                        double floor = 1e-300);

double baraud_statistic(const Density& t,
                        const Density& u,
                        std::span<const double> validation,
                        const QuadratureConfig& cfg = {},
                        double floor = 1e-300);

/// Threshold rule: first if T > z, second if T < z. On equality the operand
/// with the smaller family index wins.
TestOutcome decide(double statistic, double z, std::size_t first_index, std::size_t second_index);

/// Runs the configured statistic on (t, u) with threshold z.
TestOutcome run_test(const Density& t,
                     const Density& u,
                     double z,
                     const TestConfig& cfg,
                     std::span<const double> validation,
                     std::size_t first_index = 0,
                     std::size_t second_index = 1);

} // namespace tvf
