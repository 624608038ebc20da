#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracmix/sampling.hpp"

namespace fracmix {

/// Deterministic map from a physical input vector to nonnegative extreme responses.
struct ExtremeResponseModel {
  std::string name;
  std::vector<MarginalSpec> marginals;
  std::vector<std::string> labels;
  /// Response whose second moment drives the convergence check.
  std::size_t primary = 0;
  std::function<std::vector<double>(std::span<const double>)> evaluate;

  std::size_t dimension() const { return marginals.size(); }
  std::size_t response_count() const { return labels.size(); }
};

}  // namespace fracmix
