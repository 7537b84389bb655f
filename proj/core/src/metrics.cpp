#include "tvf/metrics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tvf {

void QuadratureConfig::validate() const
{
  if (!(abs_tol > 0.0))
    throw InvalidArgument("quadrature tolerance must be positive");
  if (max_depth < 1)
    throw InvalidArgument("quadrature needs at least one subdivision level");
  if (!(tail_quantile > 0.0 && tail_quantile < 0.5))
    throw InvalidArgument("tail quantile must lie in (0, 1/2)");
}

double integrate(const std::function<double(double)>& f,
                 Interval domain,
                 const QuadratureConfig& cfg,
                 std::span<const double> breakpoints)
{
  cfg.validate();
  if (domain.hi < domain.lo)
    throw InvalidArgument("integration domain is reversed");
  if (domain.hi == domain.lo)
    return 0.0;

  std::vector<double> cuts{ domain.lo };
  for (double b : breakpoints)
    if (b > domain.lo && b < domain.hi)
      cuts.push_back(b);
  cuts.push_back(domain.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // x = a + L(3t² − 2t³) on t in [0, 1]. The Jacobian vanishes at both
    // ends, which tames √-type behaviour where a density meets its support
    // edge; smooth integrands are unaffected.
    const double a = cuts[i];
    const double len = cuts[i + 1] - cuts[i];
    auto g = [&](double t) {
      const double x = std::min(a + len * t * t * (3.0 - 2.0 * t), cuts[i + 1]);
      return f(x) * 6.0 * t * (1.0 - t) * len;
    };
    double error = 0.0;
    double l1 = 0.0;
    const double piece = Rule::integrate(g, 0.0, 1.0, cfg.max_depth, cfg.abs_tol, &error, &l1);
    if (!std::isfinite(piece) || error > cfg.abs_tol * std::max(1.0, std::abs(piece))) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << cuts[i] << ", " << cuts[i + 1]
          << "]: error estimate " << error;
      throw NumericFailure(msg.str());
    }
    total += piece;
  }
  return total;
}

std::size_t PiecewiseConstant::cell_of(double x) const
{
  // First break >= x closes the cell on the right.
  auto it = std::lower_bound(breaks.begin() + 1, breaks.end() - 1, x);
  return static_cast<std::size_t>(it - (breaks.begin() + 1));
}

double PiecewiseConstant::operator()(double x) const
{
  if (x < breaks.front() || x > breaks.back())
    return 0.0;
  return heights[cell_of(x)];
}

double PiecewiseConstant::integral() const
{
  double sum = 0.0;
  for (std::size_t i = 0; i < heights.size(); ++i)
    sum += heights[i] * (breaks[i + 1] - breaks[i]);
  return sum;
}

GridTable::GridTable(double step, std::int64_t first, std::vector<double> values)
  : step_(step)
  , first_(first)
  , values_(std::move(values))
{
  if (!(step_ > 0.0) || values_.empty())
    throw InvalidArgument("grid table needs a positive step and at least one node");
}

double GridTable::node(std::int64_t k) const
{
  if (k < first_ || k > last())
    return 0.0;
  return values_[static_cast<std::size_t>(k - first_)];
}

double GridTable::operator()(double x) const
{
  const double t = x / step_;
  const double base = std::floor(t);
  const auto k = static_cast<std::int64_t>(base);
  if (k < first_ - 1 || k > last())
    return 0.0;
  const double u = t - base;
  if (u == 0.0)
    return node(k);
  // Four-point Lagrange weights on nodes k-1, k, k+1, k+2.
  const double wm1 = -u * (u - 1.0) * (u - 2.0) / 6.0;
  const double w0 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  const double w1 = -(u + 1.0) * u * (u - 2.0) / 2.0;
  const double w2 = (u + 1.0) * u * (u - 1.0) / 6.0;
  const double v = wm1 * node(k - 1) + w0 * node(k) + w1 * node(k + 1) + w2 * node(k + 2);
  return v > 0.0 ? v : 0.0;
}

FunctionDensity::FunctionDensity(std::function<double(double)> pdf,
                                 Interval extent,
                                 std::vector<double> knots)
  : pdf_(std::move(pdf))
  , extent_(extent)
  , knots_(std::move(knots))
{
}

namespace {

double hellinger_integrand(double a, double b)
{
  const double d = std::sqrt(a) - std::sqrt(b);
  return 0.5 * d * d;
}

double l1_integrand(double a, double b) { return std::abs(a - b); }

double l2_integrand(double a, double b)
{
  const double d = a - b;
  return d * d;
}

double clamp_density(double v) { return v > 0.0 ? v : 0.0; }

// Exact sum over the common refinement of two step functions.
double pair_step_step(const PiecewiseConstant& p, const PiecewiseConstant& q, PairIntegrand g)
{
  std::vector<double> cuts;
  cuts.reserve(p.breaks.size() + q.breaks.size());
  std::merge(p.breaks.begin(), p.breaks.end(), q.breaks.begin(), q.breaks.end(),
             std::back_inserter(cuts));
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Walk both partitions alongside the merged one.
  std::size_t ip = 0;
  std::size_t iq = 0;
  double sum = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    while (ip < p.cells() && p.breaks[ip + 1] <= a)
      ++ip;
    while (iq < q.cells() && q.breaks[iq + 1] <= a)
      ++iq;
    const bool in_p = ip < p.cells() && p.breaks[ip] <= a;
    const bool in_q = iq < q.cells() && q.breaks[iq] <= a;
    const double vp = in_p ? clamp_density(p.heights[ip]) : 0.0;
    const double vq = in_q ? clamp_density(q.heights[iq]) : 0.0;
    if (vp == 0.0 && vq == 0.0)
      continue;
    sum += g(vp, vq) * (b - a);
  }
  return sum;
}

// One operand of a lattice-based pairwise integral.
struct Operand
{
  const Density* density;
  const GridTable* table;
  const PiecewiseConstant* steps;

  explicit Operand(const Density& d)
    : density(&d)
    , table(d.grid_table())
    , steps(d.piecewise_constant())
  {
  }

  bool generic() const { return table == nullptr && steps == nullptr; }
};

// Value of an operand on the open cell (a, b) near its endpoint x. Step
// functions are constant on every cell (their breaks are nodes), generic
// densities are probed just inside the cell to pick the one-sided limit.
double one_sided(const Operand& op, double x, double a, double b, bool left_end)
{
  if (op.table != nullptr)
    return (*op.table)(x);
  if (op.steps != nullptr)
    return clamp_density((*op.steps)(0.5 * (a + b)));
  const double probe = left_end ? std::nextafter(x, b) : std::nextafter(x, a);
  return clamp_density(op.density->pdf(probe));
}

double interior(const Operand& op, double x)
{
  if (op.table != nullptr)
    return (*op.table)(x);
  if (op.steps != nullptr)
    return clamp_density((*op.steps)(x));
  return clamp_density(op.density->pdf(x));
}

void append_nodes(const GridTable& t, std::vector<double>& nodes)
{
  for (std::int64_t k = t.first(); k <= t.last(); ++k)
    nodes.push_back(static_cast<double>(k) * t.step());
}

// Composite Simpson over the finest lattice, refined at every break and knot.
// Mass of step or generic operands lying outside the lattice hull is added
// exactly (steps) or by adaptive quadrature (generic).
double pair_lattice(const Operand& p, const Operand& q, PairIntegrand g, const QuadratureConfig& cfg)
{
  const GridTable* fine = p.table;
  const GridTable* coarse = q.table;
  if (fine == nullptr || (coarse != nullptr && coarse->step() < fine->step()))
    std::swap(fine, coarse);

  Interval hull{ fine->lo(), fine->hi() };
  if (coarse != nullptr) {
    hull.lo = std::min(hull.lo, coarse->lo());
    hull.hi = std::max(hull.hi, coarse->hi());
  }

  std::vector<double> nodes;
  append_nodes(*fine, nodes);
  if (coarse != nullptr) {
    for (std::int64_t k = coarse->first(); k <= coarse->last(); ++k) {
      const double x = static_cast<double>(k) * coarse->step();
      if (x < fine->lo() || x > fine->hi())
        nodes.push_back(x);
    }
  }
  for (const Operand* op : { &p, &q }) {
    if (op->steps != nullptr)
      for (double b : op->steps->breaks)
        if (b > hull.lo && b < hull.hi)
          nodes.push_back(b);
    if (op->generic())
      for (double b : op->density->knots())
        if (b > hull.lo && b < hull.hi)
          nodes.push_back(b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    const double mid = 0.5 * (a + b);
    const double fa = g(one_sided(p, a, a, b, true), one_sided(q, a, a, b, true));
    const double fm = g(interior(p, mid), interior(q, mid));
    const double fb = g(one_sided(p, b, a, b, false), one_sided(q, b, a, b, false));
    sum += (b - a) * (fa + 4.0 * fm + fb) / 6.0;
  }

  // Outside the hull only non-lattice operands can carry mass.
  for (const Operand* op : { &p, &q }) {
    if (op->table != nullptr)
      continue;
    const bool is_p = op == &p;
    auto value = [&](double v) { return is_p ? g(v, 0.0) : g(0.0, v); };
    if (op->steps != nullptr) {
      const auto& s = *op->steps;
      for (std::size_t c = 0; c < s.cells(); ++c) {
        const double lo = s.breaks[c];
        const double hi = s.breaks[c + 1];
        const double v = clamp_density(s.heights[c]);
        if (lo < hull.lo)
          sum += value(v) * (std::min(hi, hull.lo) - lo);
        if (hi > hull.hi)
          sum += value(v) * (hi - std::max(lo, hull.hi));
      }
    } else {
      const Interval ext = op->density->extent(cfg.tail_quantile);
      const auto knots = op->density->knots();
      auto f = [&](double x) { return value(clamp_density(op->density->pdf(x))); };
      if (ext.lo < hull.lo)
        sum += integrate(f, { ext.lo, std::min(ext.hi, hull.lo) }, cfg, knots);
      if (ext.hi > hull.hi)
        sum += integrate(f, { std::max(ext.lo, hull.hi), ext.hi }, cfg, knots);
    }
  }
  return sum;
}

double pair_generic(const Density& p, const Density& q, PairIntegrand g, const QuadratureConfig& cfg)
{
  const Interval ep = p.extent(cfg.tail_quantile);
  const Interval eq = q.extent(cfg.tail_quantile);
  const Interval hull{ std::min(ep.lo, eq.lo), std::max(ep.hi, eq.hi) };

  std::vector<double> knots = p.knots();
  const auto more = q.knots();
  knots.insert(knots.end(), more.begin(), more.end());
  for (const Density* d : { &p, &q }) {
    if (const auto* s = d->piecewise_constant())
      knots.insert(knots.end(), s->breaks.begin(), s->breaks.end());
    const Interval e = d->extent(cfg.tail_quantile);
    knots.push_back(e.lo);
    knots.push_back(e.hi);
  }
  auto f = [&](double x) { return g(clamp_density(p.pdf(x)), clamp_density(q.pdf(x))); };
  return integrate(f, hull, cfg, knots);
}

} // namespace

double integrate_pair(const Density& p, const Density& q, PairIntegrand g, const QuadratureConfig& cfg)
{
  cfg.validate();
  const Operand op_p(p);
  const Operand op_q(q);
  if (op_p.steps != nullptr && op_q.steps != nullptr)
    return pair_step_step(*op_p.steps, *op_q.steps, g);
  if (op_p.table != nullptr || op_q.table != nullptr)
    return pair_lattice(op_p, op_q, g, cfg);
  return pair_generic(p, q, g, cfg);
}

double hellinger_sq(const Density& p, const Density& q, const QuadratureConfig& cfg)
{
  return std::clamp(integrate_pair(p, q, hellinger_integrand, cfg), 0.0, 1.0);
}

double hellinger_affinity(const Density& p, const Density& q, const QuadratureConfig& cfg)
{
  return 1.0 - hellinger_sq(p, q, cfg);
}

double l1_distance(const Density& p, const Density& q, const QuadratureConfig& cfg)
{
  return std::max(0.0, integrate_pair(p, q, l1_integrand, cfg));
}

double l2_sq_distance(const Density& p, const Density& q, const QuadratureConfig& cfg)
{
  return std::max(0.0, integrate_pair(p, q, l2_integrand, cfg));
}

} // namespace tvf
