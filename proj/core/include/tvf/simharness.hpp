#pragma once

#include "tvf/densities.hpp"
#include "tvf/estimators.hpp"
#include "tvf/robust_tests.hpp"
#include "tvf/vfold.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tvf {

enum class Method
{
  tvf,
  klvf,
  lsvf
};

enum class LossKind
{
  hellinger_sq,
  l1,
  l2_sq
};

enum class Algorithm
{
  fast,
  naive
};

/// Where simulated histograms live: on [min, max] of the sample each one is
/// fitted to, or on the truth's support (data_support for unbounded truths).
enum class HistogramSupport
{
  sample_range,
  declared
};

Method parse_method(const std::string& name);
std::string to_string(Method m);
LossKind parse_loss(const std::string& name);
std::string to_string(LossKind l);
Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);
HistogramSupport parse_histogram_support(const std::string& name);
std::string to_string(HistogramSupport h);

/// ℓ(s, t) for the chosen loss.
double loss_value(LossKind loss, const Density& s, const Density& t, const QuadratureConfig& cfg);

/// One selection method: TVF with a statistic and θ, or a classical V-fold.
struct MethodSpec
{
  Method method = Method::tvf;
  StatisticKind test = StatisticKind::birge;
  double theta = 0.25;
  FinalMode final_mode = FinalMode::refit;

  std::string label() const;
};

/// Everything that is shared by the methods compared on one grid cell.
struct SimulationSetup
{
  std::string density = "s1";
  FamilyId family = FamilyId::R;
  std::size_t n = 500;
  std::size_t folds = 2;
  std::size_t replications = 1000;
  LossKind loss = LossKind::hellinger_sq;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::fast;
  bool lsvf_warm_start = true;
  HistogramSupport histogram_support = HistogramSupport::sample_range;
  /// 0 = one worker per hardware thread.
  unsigned workers = 0;
  QuadratureConfig quadrature{};
  /// Replaces the named family; receives n and simulation_support.
  std::function<EstimatorFamily(std::size_t, Interval)> custom_family;

  void validate() const;
};

struct RiskReport
{
  std::string density;
  std::string family;
  MethodSpec method;
  std::size_t n = 0;
  std::size_t folds = 0;
  std::size_t replications = 0;
  LossKind loss = LossKind::hellinger_sq;
  std::uint64_t seed = 0;

  double mean_risk = 0.0;
  double mc_stderr = 0.0;
  std::vector<double> losses;
  /// selected[m] = number of replications that chose procedure m.
  std::vector<std::size_t> selected;
};

/// Runs every method on the same replications: replication r draws its
/// sample from derive_seed(seed, r) and its split from a seed derived from
/// that one, so methods and θ values see identical data. Results do not
/// depend on the number of workers.
std::vector<RiskReport> simulate(const SimulationSetup& setup, const std::vector<MethodSpec>& methods);

/// R̄_n for a single method.
RiskReport empirical_risk(const SimulationSetup& setup, const MethodSpec& method);

/// Histogram support used in simulations: the truth's support when bounded,
/// otherwise data_support(sample).
Interval simulation_support(const BenchmarkDensity& truth, std::span<const double> sample);

/// Sum of `values` by pairwise summation in index order.
double pairwise_sum(std::span<const double> values);

/// log₂(R̄_A / R̄_B).
double log2_risk_ratio(const RiskReport& a, const RiskReport& b);
double log2_risk_ratio(double risk_a, double risk_b);

/// inf over densities of (inf_θ risk / sup_θ risk); risks[s][θ].
double theta_stability_ratio(const std::vector<std::vector<double>>& risks);

/// Υ(s) = inf_θ R̄(Birgé, θ) / R̄(Baraud).
double upsilon_ratio(std::span<const double> birge_risks, double baraud_risk);

struct UpsilonSummary
{
  double sup = 0.0;
  double inf = 0.0;
  std::vector<double> per_density;
};

UpsilonSummary upsilon_summary(const std::vector<std::vector<double>>& birge_risks,
                               std::span<const double> baraud_risks);

/// h²(s, s̄_m) + (m − 1)/(2n), with s̄_m the L2 projection of s onto the
/// regular m-bin partition of `support` (cell averages by quadrature).
double histogram_risk_bound(const Density& s,
                            Interval support,
                            std::size_t bins,
                            std::size_t n,
                            const QuadratureConfig& cfg = {});

/// Same bound for the uniform density on [0, 1], where the bias vanishes.
double histogram_risk_bound(std::size_t bins, std::size_t n);

struct KernelConstants
{
  /// c_K = ∫(1 ∨ x²) K(x) dx.
  double c = 0.0;
  /// ‖K‖_∞.
  double sup = 0.0;
  /// C(K); 1 for unimodal kernels.
  double big_c = 1.0;
};

/// Constants of the kernel, c_K by quadrature.
KernelConstants kernel_constants(Kernel kernel, const QuadratureConfig& cfg = {});

/// 2 c_K φ²(w) + 2L ‖K‖_∞ / (n w) + C(K)/n, where `two_l` = 2L is the length
/// of the support and φ a modulus bound.
double kernel_risk_bound(double bandwidth,
                         std::size_t n,
                         double two_l,
                         const std::function<double(double)>& phi,
                         const KernelConstants& k);

/// One grid of cells: every (V, method) pair on one density and family.
struct ExperimentConfig
{
  SimulationSetup setup;
  std::vector<std::size_t> folds{ 2 };
  std::vector<MethodSpec> methods{ MethodSpec{} };
};

inline const char* kRiskCsvHeader =
  "density,family,method,V,theta,test,n,reps,loss,mean_risk,mc_stderr,seed";

/// One CSV row per (config, V, method), in order, after the header. Rows of
/// `external_csv` (same header) are appended verbatim when given.
void run_table(const std::vector<ExperimentConfig>& configs,
               const std::string& output_path,
               const std::optional<std::string>& external_csv = std::nullopt);

/// Formats reports as CSV rows (no header).
std::string risk_rows(const std::vector<RiskReport>& reports);

/// W̄ data: for every density, V and method pair (reference vs other),
/// log₂(R̄_reference / R̄_other). Columns density,V,family,method_pair,
/// final_mode,w_value.
void run_compare(const std::vector<std::string>& densities,
                 const SimulationSetup& setup,
                 const std::vector<std::size_t>& folds,
                 const MethodSpec& reference,
                 const std::vector<MethodSpec>& others,
                 const std::string& output_path);

} // namespace tvf
