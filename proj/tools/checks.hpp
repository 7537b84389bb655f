#pragma once

#include <ostream>
#include <string>

namespace tvf_cli {

/// Runs one property suite (bounds, invariants or oracle), printing a line
/// per property. Returns true when every property holds.
bool run_suite(const std::string& suite, std::ostream& out);

} // namespace tvf_cli
