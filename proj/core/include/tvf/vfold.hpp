#pragma once

#include "tvf/estimators.hpp"
#include "tvf/robust_tests.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvf {

/// Partition of {0, …, n−1} into V validation blocks. Block sizes differ by at
/// most one; the first n mod V blocks hold the extra point. Indices inside a
/// block are sorted.
struct SplitScheme
{
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t folds() const { return blocks.size(); }
  /// Indices outside block j, ascending.
  std::vector<std::size_t> training(std::size_t j) const;
};

SplitScheme make_splits(std::size_t n, std::size_t folds, std::uint64_t seed);

std::vector<double> gather(std::span<const double> sample, std::span<const std::size_t> indices);

/// ŝ_{m,j} = A_m(sample outside block j), for every m and j.
class PartialTable
{
public:
  PartialTable(std::size_t models, std::size_t folds, std::vector<DensityEstimate> estimates);

  std::size_t models() const { return models_; }
  std::size_t folds() const { return folds_; }
  const DensityEstimate& at(std::size_t m, std::size_t j) const { return estimates_[m * folds_ + j]; }
  /// The V partials of procedure m, in fold order.
  std::span<const DensityEstimate> row(std::size_t m) const
  {
    return { estimates_.data() + m * folds_, folds_ };
  }

private:
  std::size_t models_;
  std::size_t folds_;
  std::vector<DensityEstimate> estimates_;
};

PartialTable fit_partials(const EstimatorFamily& family,
                          std::span<const double> sample,
                          const SplitScheme& splits);

/// Memoized outcome of ψ between two partials of one fold, stored for the
/// canonical orientation (smaller index first).
struct PairTest
{
  bool degenerate = false;
  std::size_t winner = 0;
  double hellinger_sq = 0.0;
  TestOutcome outcome{};
};

/// Everything the criteria need for one (family, sample, split): partials,
/// their values on each validation block, pairwise distances and memoized
/// tests. Lazily filled; not safe for concurrent use.
class FoldWorkspace
{
public:
  FoldWorkspace(const EstimatorFamily& family,
                std::span<const double> sample,
                SplitScheme splits,
                TestConfig cfg);
  FoldWorkspace(const EstimatorFamily& family,
                std::span<const double> sample,
                SplitScheme splits,
                PartialTable partials,
                TestConfig cfg);

  std::size_t models() const { return partials_.models(); }
  std::size_t folds() const { return partials_.folds(); }
  const SplitScheme& splits() const { return splits_; }
  const PartialTable& partials() const { return partials_; }
  const TestConfig& config() const { return cfg_; }
  /// Switches statistic or θ. Test outcomes are cleared; values, distances
  /// and integrals are kept.
  void set_config(const TestConfig& cfg);
  const EstimatorFamily& family() const { return *family_; }
  std::span<const double> sample() const { return sample_; }
  std::span<const double> validation(std::size_t j) const { return validation_[j]; }

  /// ŝ_{m,j} evaluated at the points of block j.
  std::span<const double> values(std::size_t m, std::size_t j);
  /// h²(ŝ_{a,j}, ŝ_{b,j}), cached.
  double hellinger_sq(std::size_t j, std::size_t a, std::size_t b);
  /// ψ_{a,b}(X_j), run once per unordered pair and fold.
  const PairTest& test(std::size_t j, std::size_t a, std::size_t b);
  /// Whether test(j, a, b) has already been run.
  bool tested(std::size_t j, std::size_t a, std::size_t b) const;

  /// Distinct (fold, pair) tests run so far, degenerate pairs included.
  std::size_t tests_performed() const { return tests_; }
  std::size_t degenerate_pairs() const { return degenerate_; }
  /// Forgets test outcomes and counters; cached values and distances stay.
  /// Every selection starts with this so its telemetry is its own.
  void clear_tests();

private:
  std::size_t slot(std::size_t j, std::size_t a, std::size_t b) const;

  const EstimatorFamily* family_;
  std::vector<double> sample_;
  SplitScheme splits_;
  PartialTable partials_;
  TestConfig cfg_;
  std::vector<std::vector<double>> validation_;
  std::vector<std::vector<double>> values_;
  std::vector<double> h2_;
  std::vector<double> baraud_;
  std::vector<PairTest> tests_cache_;
  std::vector<std::uint8_t> h2_known_;
  std::vector<std::uint8_t> baraud_known_;
  std::vector<std::uint8_t> tested_;
  std::size_t tests_ = 0;
  std::size_t degenerate_ = 0;
};

/// D_j²(m) = max over l ≠ m with ψ_{l,m}(X_j) = l of h²(ŝ_{l,j}, ŝ_{m,j}); 0
/// when m wins every test. Runs whatever tests are missing.
double dispersion_sq(FoldWorkspace& ws, std::size_t m, std::size_t j);

/// D_j(m), the square root of dispersion_sq.
double dispersion(FoldWorkspace& ws, std::size_t m, std::size_t j);

/// D̄²(m) = (1/V) Σ_j D_j²(m).
double tvf_criterion(std::span<const double> dispersions);

/// (1/V) Σ_j (1/|B_j|) Σ_{X_i ∈ B_j} −log max(ŝ_{m,j}(X_i), ε). Adds the
/// number of floored evaluations to `floored` when given.
double klvf_criterion(FoldWorkspace& ws, std::size_t m, std::size_t* floored = nullptr);

/// (1/V) Σ_j [‖ŝ_{m,j}‖² − (2/|B_j|) Σ_{X_i ∈ B_j} ŝ_{m,j}(X_i)].
double lsvf_criterion(FoldWorkspace& ws, std::size_t m);

enum class ClassicalKind
{
  klvf,
  lsvf
};

struct ClassicalResult
{
  std::size_t chosen = 0;
  std::vector<double> criterion;
  std::size_t floored_evaluations = 0;
};

/// Argmin of the KLVF or LSVF criterion, ties to the smallest index.
ClassicalResult select_classical(FoldWorkspace& ws, ClassicalKind kind);

enum class FinalMode
{
  refit,
  average
};

FinalMode parse_final_mode(const std::string& name);
std::string to_string(FinalMode mode);

struct SelectionTelemetry
{
  std::size_t tests_performed = 0;
  std::size_t degenerate_pairs = 0;
  /// Procedures whose criterion was computed to completion.
  std::size_t candidates_completed = 0;
  /// Procedures jumped to by the fast algorithm (warm start included).
  std::size_t jumps = 0;
};

struct SelectionResult
{
  std::size_t chosen = 0;
  std::string algorithm;
  std::optional<std::size_t> warm_start;
  /// D̄²(m) for every procedure whose criterion was completed.
  std::vector<std::optional<double>> criterion;
  /// lower_bounds[j][m]: final value of L_j(m). Equals D_j²(m) where complete,
  /// a lower bound elsewhere.
  std::vector<std::vector<double>> lower_bounds;
  std::vector<bool> complete;
  SelectionTelemetry telemetry;
  std::vector<std::string> warnings;
};

/// Computes every test once per fold and returns the exact argmin of D̄².
SelectionResult select_naive(FoldWorkspace& ws);

struct FastOptions
{
  /// Starting procedure. Unset: m̂_LSVF when `lsvf_warm_start`, else index 0.
  std::optional<std::size_t> warm_start;
  bool lsvf_warm_start = true;
};

/// Pruned search: same m̂ as select_naive, usually with far fewer tests.
SelectionResult select_fast(FoldWorkspace& ws, const FastOptions& options = {});

/// A_m̂ refitted on the whole sample, or the mean of its V partials.
DensityEstimate final_estimator(const FoldWorkspace& ws, std::size_t chosen, FinalMode mode);

} // namespace tvf
