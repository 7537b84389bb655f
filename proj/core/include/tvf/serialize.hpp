#pragma once

#include "tvf/estimators.hpp"
#include "tvf/simharness.hpp"
#include "tvf/vfold.hpp"

#include <nlohmann/json.hpp>

namespace tvf {

/// JSON form of an estimate:
///   {"kind":"histogram","breaks":[...],"heights":[...]}
///   {"kind":"kernel_mixture","kernel":"gaussian","bandwidth":w,"centers":[...],"weights":[...]}
///   {"kind":"convex_average","weights":[1/V,...],"components":[...]}
///   {"kind":"clipped","support":[lo,hi],"mass":c}
nlohmann::json to_json(const DensityEstimate& e);

/// Inverse of to_json for histograms, kernel mixtures and their averages.
DensityEstimate estimate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectionResult& r, const EstimatorFamily& family);
nlohmann::json to_json(const RiskReport& r);

} // namespace tvf
