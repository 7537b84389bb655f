#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tvf {

/// Closed interval [lo, hi] on the real line.
struct Interval
{
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Error taxonomy. Every failure surfaced by the library is one of these.

class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature did not reach the requested tolerance.
class NumericFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input function has no positive mass (e.g. the clip-and-renormalize operator
/// applied to a nonpositive function).
class DegenerateInput : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Two densities are equal as functions, so no test between them is defined.
class DegeneratePair : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A risk comparison has a zero denominator.
class DegenerateComparison : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class IoFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo replication threw; carries the replication's seed so the
/// failing case can be rerun on its own.
class ReplicationFailure : public std::runtime_error
{
public:
  ReplicationFailure(const std::string& what, std::size_t index, std::uint64_t seed)
    : std::runtime_error(what)
    , index(index)
    , seed(seed)
  {
  }

  std::size_t index;
  std::uint64_t seed;
};

} // namespace tvf
