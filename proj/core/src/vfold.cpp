#include "tvf/vfold.hpp"

#include "tvf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tvf {

std::vector<std::size_t> SplitScheme::training(std::size_t j) const
{
  std::vector<char> held(n, 0);
  for (std::size_t i : blocks.at(j))
    held[i] = 1;
  std::vector<std::size_t> out;
  out.reserve(n - blocks[j].size());
  for (std::size_t i = 0; i < n; ++i)
    if (!held[i])
      out.push_back(i);
  return out;
}

SplitScheme make_splits(std::size_t n, std::size_t folds, std::uint64_t seed)
{
  if (folds < 2)
    throw InvalidArgument("V-fold needs at least two folds");
  if (folds > n)
    throw InvalidArgument("more folds than observations");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
  Philox rng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.below(i + 1)]);

  SplitScheme out;
  out.n = n;
  out.blocks.resize(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t offset = 0;
  for (std::size_t j = 0; j < folds; ++j) {
    const std::size_t size = base + (j < extra ? 1 : 0);
    out.blocks[j].assign(perm.begin() + static_cast<std::ptrdiff_t>(offset),
                         perm.begin() + static_cast<std::ptrdiff_t>(offset + size));
    std::sort(out.blocks[j].begin(), out.blocks[j].end());
    offset += size;
  }
  return out;
}

std::vector<double> gather(std::span<const double> sample, std::span<const std::size_t> indices)
{
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t i : indices)
    out.push_back(sample[i]);
  return out;
}

PartialTable::PartialTable(std::size_t models, std::size_t folds, std::vector<DensityEstimate> estimates)
  : models_(models)
  , folds_(folds)
  , estimates_(std::move(estimates))
{
  if (estimates_.size() != models_ * folds_)
    throw InvalidArgument("partial table needs one estimate per (procedure, fold)");
}

PartialTable fit_partials(const EstimatorFamily& family,
                          std::span<const double> sample,
                          const SplitScheme& splits)
{
  family.validate();
  if (splits.n != sample.size())
    throw InvalidArgument("split scheme does not match the sample size");
  const std::size_t v = splits.folds();
  std::vector<std::vector<double>> training(v);
  for (std::size_t j = 0; j < v; ++j)
    training[j] = gather(sample, splits.training(j));

  std::vector<DensityEstimate> out;
  out.reserve(family.size() * v);
  for (std::size_t m = 0; m < family.size(); ++m)
    for (std::size_t j = 0; j < v; ++j)
      out.push_back(family.fit(m, training[j]));
  return PartialTable(family.size(), v, std::move(out));
}

FoldWorkspace::FoldWorkspace(const EstimatorFamily& family,
                             std::span<const double> sample,
                             SplitScheme splits,
                             TestConfig cfg)
  : FoldWorkspace(family, sample, splits, fit_partials(family, sample, splits), cfg)
{
}

FoldWorkspace::FoldWorkspace(const EstimatorFamily& family,
                             std::span<const double> sample,
                             SplitScheme splits,
                             PartialTable partials,
                             TestConfig cfg)
  : family_(&family)
  , sample_(sample.begin(), sample.end())
  , splits_(std::move(splits))
  , partials_(std::move(partials))
  , cfg_(cfg)
{
  cfg_.validate();
  family.validate();
  if (partials_.models() != family.size() || partials_.folds() != splits_.folds())
    throw InvalidArgument("partial table does not match the family and split scheme");
  if (splits_.n != sample_.size())
    throw InvalidArgument("split scheme does not match the sample size");

  const std::size_t v = folds();
  const std::size_t m = models();
  validation_.resize(v);
  for (std::size_t j = 0; j < v; ++j)
    validation_[j] = gather(sample_, splits_.blocks[j]);
  values_.resize(m * v);
  h2_.assign(v * m * m, 0.0);
  baraud_.assign(v * m * m, 0.0);
  tests_cache_.assign(v * m * m, PairTest{});
  h2_known_.assign(v * m * m, 0);
  baraud_known_.assign(v * m * m, 0);
  tested_.assign(v * m * m, 0);
}

std::size_t FoldWorkspace::slot(std::size_t j, std::size_t a, std::size_t b) const
{
  if (a > b)
    std::swap(a, b);
  const std::size_t m = models();
  return (j * m + a) * m + b;
}

std::span<const double> FoldWorkspace::values(std::size_t m, std::size_t j)
{
  auto& v = values_[m * folds() + j];
  if (v.empty() && !validation_[j].empty()) {
    const auto& est = partials_.at(m, j);
    v.resize(validation_[j].size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = est.pdf(validation_[j][i]);
  }
  return v;
}

double FoldWorkspace::hellinger_sq(std::size_t j, std::size_t a, std::size_t b)
{
  if (a == b)
    return 0.0;
  const std::size_t s = slot(j, a, b);
  if (!h2_known_[s]) {
    const std::size_t lo = std::min(a, b);
    const std::size_t hi = std::max(a, b);
    h2_[s] = tvf::hellinger_sq(partials_.at(lo, j), partials_.at(hi, j), cfg_.quadrature);
    h2_known_[s] = 1;
  }
  return h2_[s];
}

bool FoldWorkspace::tested(std::size_t j, std::size_t a, std::size_t b) const
{
  return a != b && tested_[slot(j, a, b)] != 0;
}

void FoldWorkspace::set_config(const TestConfig& cfg)
{
  cfg.validate();
  if (cfg.quadrature.abs_tol != cfg_.quadrature.abs_tol ||
      cfg.quadrature.max_depth != cfg_.quadrature.max_depth ||
      cfg.quadrature.tail_quantile != cfg_.quadrature.tail_quantile) {
    std::fill(h2_known_.begin(), h2_known_.end(), std::uint8_t{ 0 });
    std::fill(baraud_known_.begin(), baraud_known_.end(), std::uint8_t{ 0 });
  }
  cfg_ = cfg;
  clear_tests();
}

void FoldWorkspace::clear_tests()
{
  std::fill(tested_.begin(), tested_.end(), std::uint8_t{ 0 });
  tests_ = 0;
  degenerate_ = 0;
}

const PairTest& FoldWorkspace::test(std::size_t j, std::size_t a, std::size_t b)
{
  if (a == b)
    throw InvalidArgument("a procedure is not tested against itself");
  const std::size_t s = slot(j, a, b);
  if (tested_[s])
    return tests_cache_[s];

  const std::size_t lo = std::min(a, b);
  const std::size_t hi = std::max(a, b);
  PairTest out;
  out.hellinger_sq = hellinger_sq(j, lo, hi);
  if (out.hellinger_sq <= kDegenerateHellingerSq) {
    out.degenerate = true;
    ++degenerate_;
  } else {
    const auto tv = values(lo, j);
    const auto uv = values(hi, j);
    double stat = 0.0;
    if (cfg_.kind == StatisticKind::birge) {
      stat = birge_statistic(tv, uv, out.hellinger_sq, cfg_.theta, cfg_.floor);
    } else {
      if (!baraud_known_[s]) {
        baraud_[s] = baraud_integral(partials_.at(lo, j), partials_.at(hi, j), cfg_.quadrature);
        baraud_known_[s] = 1;
      }
      stat = baraud_statistic(tv, uv, baraud_[s], cfg_.floor);
    }
    const double z = family_->weights[lo] - family_->weights[hi];
    out.outcome = decide(stat, z, lo, hi);
    out.winner = out.outcome.winner == Winner::first ? lo : hi;
  }
  ++tests_;
  tests_cache_[s] = out;
  tested_[s] = 1;
  return tests_cache_[s];
}

double dispersion_sq(FoldWorkspace& ws, std::size_t m, std::size_t j)
{
  double d = 0.0;
  for (std::size_t l = 0; l < ws.models(); ++l) {
    if (l == m)
      continue;
    const auto& t = ws.test(j, l, m);
    if (!t.degenerate && t.winner == l)
      d = std::max(d, t.hellinger_sq);
  }
  return d;
}

double dispersion(FoldWorkspace& ws, std::size_t m, std::size_t j)
{
  return std::sqrt(dispersion_sq(ws, m, j));
}

double tvf_criterion(std::span<const double> dispersions)
{
  if (dispersions.empty())
    throw InvalidArgument("criterion needs at least one fold");
  double sum = 0.0;
  for (double d : dispersions)
    sum += d * d;
  return sum / static_cast<double>(dispersions.size());
}

double klvf_criterion(FoldWorkspace& ws, std::size_t m, std::size_t* floored)
{
  const double eps = ws.config().floor;
  double total = 0.0;
  for (std::size_t j = 0; j < ws.folds(); ++j) {
    const auto v = ws.values(m, j);
    double sum = 0.0;
    for (double t : v) {
      if (t < eps && floored != nullptr)
        ++*floored;
      sum -= std::log(std::max(t, eps));
    }
    total += sum / static_cast<double>(v.size());
  }
  return total / static_cast<double>(ws.folds());
}

double lsvf_criterion(FoldWorkspace& ws, std::size_t m)
{
  double total = 0.0;
  for (std::size_t j = 0; j < ws.folds(); ++j) {
    const auto v = ws.values(m, j);
    const double fit = std::accumulate(v.begin(), v.end(), 0.0);
    total += l2_norm_sq(ws.partials().at(m, j), ws.config().quadrature) -
             2.0 * fit / static_cast<double>(v.size());
  }
  return total / static_cast<double>(ws.folds());
}

ClassicalResult select_classical(FoldWorkspace& ws, ClassicalKind kind)
{
  ClassicalResult out;
  out.criterion.resize(ws.models());
  for (std::size_t m = 0; m < ws.models(); ++m) {
    out.criterion[m] = kind == ClassicalKind::klvf ? klvf_criterion(ws, m, &out.floored_evaluations)
                                                   : lsvf_criterion(ws, m);
    if (out.criterion[m] < out.criterion[out.chosen])
      out.chosen = m;
  }
  return out;
}

FinalMode parse_final_mode(const std::string& name)
{
  if (name == "refit")
    return FinalMode::refit;
  if (name == "average")
    return FinalMode::average;
  throw InvalidArgument("unknown final mode '" + name + "' (expected refit or average)");
}

std::string to_string(FinalMode mode)
{
  return mode == FinalMode::refit ? "refit" : "average";
}

namespace {

SelectionResult start_result(FoldWorkspace& ws, std::string algorithm)
{
  ws.clear_tests();
  SelectionResult r;
  r.algorithm = std::move(algorithm);
  r.criterion.assign(ws.models(), std::nullopt);
  r.lower_bounds.assign(ws.folds(), std::vector<double>(ws.models(), 0.0));
  r.complete.assign(ws.models(), false);
  const double gamma = ws.family().gamma();
  if (gamma < 0.5) {
    std::ostringstream msg;
    msg << "weights give Gamma = sum exp(-Delta_m) = " << gamma << " < 1/2";
    r.warnings.push_back(msg.str());
  }
  return r;
}

void finish_result(FoldWorkspace& ws, SelectionResult& r)
{
  r.telemetry.tests_performed = ws.tests_performed();
  r.telemetry.degenerate_pairs = ws.degenerate_pairs();
  r.telemetry.candidates_completed =
    static_cast<std::size_t>(std::count(r.complete.begin(), r.complete.end(), true));
  if (r.telemetry.degenerate_pairs > 0) {
    std::ostringstream msg;
    msg << r.telemetry.degenerate_pairs << " test(s) skipped between identical partial estimates";
    r.warnings.push_back(msg.str());
  }
}

// Σ_j L_j(m) in fold order, so naive and fast sums agree bit for bit.
double column_sum(const std::vector<std::vector<double>>& L, std::size_t m)
{
  double s = 0.0;
  for (const auto& row : L)
    s += row[m];
  return s;
}

} // namespace

SelectionResult select_naive(FoldWorkspace& ws)
{
  SelectionResult r = start_result(ws, "naive");
  const std::size_t M = ws.models();
  auto& L = r.lower_bounds;
  for (std::size_t j = 0; j < ws.folds(); ++j) {
    for (std::size_t a = 0; a < M; ++a) {
      for (std::size_t b = a + 1; b < M; ++b) {
        const auto& t = ws.test(j, a, b);
        if (t.degenerate)
          continue;
        const std::size_t loser = t.winner == a ? b : a;
        L[j][loser] = std::max(L[j][loser], t.hellinger_sq);
      }
    }
  }
  double best = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double s = column_sum(L, m);
    r.criterion[m] = s / static_cast<double>(ws.folds());
    r.complete[m] = true;
    if (m == 0 || s < best) {
      best = s;
      r.chosen = m;
    }
  }
  r.telemetry.jumps = M;
  finish_result(ws, r);
  return r;
}

SelectionResult select_fast(FoldWorkspace& ws, const FastOptions& options)
{
  const std::size_t M = ws.models();
  const std::size_t V = ws.folds();

  std::size_t start = 0;
  if (options.warm_start) {
    if (*options.warm_start >= M)
      throw InvalidArgument("warm start index is outside the family");
    start = *options.warm_start;
  } else if (options.lsvf_warm_start) {
    start = select_classical(ws, ClassicalKind::lsvf).chosen;
  }

  SelectionResult r = start_result(ws, "fast");
  r.warm_start = start;
  auto& L = r.lower_bounds;
  std::vector<char> in_g(M, 1);
  in_g[start] = 0;

  auto prune = [&](double bound) {
    for (std::size_t l = 0; l < M; ++l)
      if (in_g[l] && column_sum(L, l) > bound)
        in_g[l] = 0;
  };

  // First step: D̄²(m_s) in full, crediting every test m_s wins to the loser.
  for (std::size_t l = 0; l < M; ++l) {
    if (l == start)
      continue;
    for (std::size_t j = 0; j < V; ++j) {
      const auto& t = ws.test(j, start, l);
      if (t.degenerate)
        continue;
      if (t.winner == start)
        L[j][l] = std::max(L[j][l], t.hellinger_sq);
      else
        L[j][start] = std::max(L[j][start], t.hellinger_sq);
    }
  }
  std::size_t opt = start;
  double R = column_sum(L, start);
  r.criterion[start] = R / static_cast<double>(V);
  r.complete[start] = true;
  r.telemetry.jumps = 1;
  prune(R);

  for (;;) {
    // Jump to the candidate with the smallest running lower bound.
    std::size_t m = M;
    double lowest = 0.0;
    for (std::size_t l = 0; l < M; ++l) {
      if (!in_g[l])
        continue;
      const double s = column_sum(L, l);
      if (m == M || s < lowest) {
        m = l;
        lowest = s;
      }
    }
    if (m == M)
      break;
    in_g[m] = 0;
    ++r.telemetry.jumps;

    bool exceeded = false;
    for (std::size_t j = 0; j < V && !exceeded; ++j) {
      for (std::size_t l = 0; l < M; ++l) {
        if (l == m)
          continue;
        const auto& t = ws.test(j, m, l);
        if (t.degenerate)
          continue;
        if (t.winner == m) {
          if (in_g[l]) {
            L[j][l] = std::max(L[j][l], t.hellinger_sq);
            if (column_sum(L, l) > R)
              in_g[l] = 0;
          }
        } else {
          L[j][m] = std::max(L[j][m], t.hellinger_sq);
          if (column_sum(L, m) > R) {
            exceeded = true;
            break;
          }
        }
      }
    }
    if (exceeded)
      continue;

    const double s = column_sum(L, m);
    r.criterion[m] = s / static_cast<double>(V);
    r.complete[m] = true;
    // Equal criteria go to the smaller index, matching select_naive.
    if (s < R || (s == R && m < opt)) {
      opt = m;
      R = s;
      prune(R);
    }
  }

  r.chosen = opt;
  finish_result(ws, r);
  return r;
}

DensityEstimate final_estimator(const FoldWorkspace& ws, std::size_t chosen, FinalMode mode)
{
  if (chosen >= ws.models())
    throw InvalidArgument("selected index is outside the family");
  if (mode == FinalMode::refit)
    return ws.family().fit(chosen, ws.sample());
  return average_estimates(ws.partials().row(chosen));
}

} // namespace tvf
