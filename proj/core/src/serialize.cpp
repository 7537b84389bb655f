#include "tvf/serialize.hpp"

namespace tvf {

nlohmann::json to_json(const DensityEstimate& e)
{
  using nlohmann::json;
  switch (e.kind()) {
    case EstimateKind::histogram: {
      const auto& s = e.histogram();
      return json{ { "kind", "histogram" }, { "breaks", s.breaks }, { "heights", s.heights } };
    }
    case EstimateKind::kernel_mixture: {
      const auto& m = e.mixture();
      return json{ { "kind", "kernel_mixture" },
                   { "kernel", "gaussian" },
                   { "bandwidth", m.bandwidth },
                   { "centers", m.centers },
                   { "weights", m.weights } };
    }
    case EstimateKind::convex_average: {
      json parts = json::array();
      for (const auto& p : e.components())
        parts.push_back(to_json(p));
      const double w = 1.0 / static_cast<double>(e.components().size());
      return json{ { "kind", "convex_average" },
                   { "weights", std::vector<double>(e.components().size(), w) },
                   { "components", parts } };
    }
    case EstimateKind::clipped: {
      const auto s = e.clipped_support();
      return json{ { "kind", "clipped" }, { "support", { s.lo, s.hi } }, { "mass", e.clipped_mass() } };
    }
  }
  return {};
}

DensityEstimate estimate_from_json(const nlohmann::json& j)
{
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "histogram") {
    return make_histogram(PiecewiseConstant{ j.at("breaks").get<std::vector<double>>(),
                                             j.at("heights").get<std::vector<double>>() });
  }
  if (kind == "kernel_mixture") {
    if (j.value("kernel", "gaussian") != "gaussian")
      throw InvalidArgument("only the gaussian kernel is supported");
    KernelMixture m;
    m.bandwidth = j.at("bandwidth").get<double>();
    m.centers = j.at("centers").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    return make_kernel_mixture(std::move(m));
  }
  if (kind == "convex_average") {
    std::vector<DensityEstimate> parts;
    for (const auto& c : j.at("components"))
      parts.push_back(estimate_from_json(c));
    return average_estimates(parts);
  }
  throw InvalidArgument("cannot rebuild an estimate of kind '" + kind + "' from JSON");
}

nlohmann::json to_json(const SelectionResult& r, const EstimatorFamily& family)
{
  using nlohmann::json;
  json criteria = json::array();
  for (std::size_t m = 0; m < r.criterion.size(); ++m) {
    criteria.push_back({ { "index", m },
                         { "label", family.procedures.at(m).label },
                         { "criterion", r.criterion[m] ? json(*r.criterion[m]) : json(nullptr) },
                         { "complete", static_cast<bool>(r.complete[m]) } });
  }
  json out{ { "chosen", r.chosen },
            { "chosen_label", family.procedures.at(r.chosen).label },
            { "algorithm", r.algorithm },
            { "criteria", criteria },
            { "lower_bounds", r.lower_bounds },
            { "telemetry",
              { { "tests_performed", r.telemetry.tests_performed },
                { "degenerate_pairs", r.telemetry.degenerate_pairs },
                { "candidates_completed", r.telemetry.candidates_completed },
                { "jumps", r.telemetry.jumps } } },
            { "warnings", r.warnings } };
  out["warm_start"] = r.warm_start ? json(*r.warm_start) : json(nullptr);
  return out;
}

nlohmann::json to_json(const RiskReport& r)
{
  return nlohmann::json{ { "density", r.density },
                         { "family", r.family },
                         { "method", r.method.label() },
                         { "final_mode", to_string(r.method.final_mode) },
                         { "V", r.folds },
                         { "n", r.n },
                         { "replications", r.replications },
                         { "loss", to_string(r.loss) },
                         { "seed", r.seed },
                         { "mean_risk", r.mean_risk },
                         { "mc_stderr", r.mc_stderr },
                         { "selected", r.selected },
                         { "losses", r.losses } };
}

} // namespace tvf
