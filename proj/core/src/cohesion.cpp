#include "stppm/cohesion.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stppm {

CohesionSpec CohesionSpec::hb(double eta) {
  CohesionSpec s;
  s.kind = Kind::HB;
  s.eta = eta;
  s.validate();
  return s;
}

CohesionSpec CohesionSpec::dp(double mass) {
  CohesionSpec s;
  s.kind = Kind::DP;
  s.mass = mass;
  s.validate();
  return s;
}

void CohesionSpec::validate() const {
  if (kind == Kind::HB && !(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("HB cohesion requires eta in [0, 1]");
  }
  if (kind == Kind::DP && !(mass > 0.0 && std::isfinite(mass))) {
    throw std::invalid_argument("DP cohesion requires mass > 0");
  }
}

std::string CohesionSpec::name() const {
  std::ostringstream os;
  if (kind == Kind::HB) {
    os << "HB(" << eta << ")";
  } else {
    os << "DP(" << mass << ")";
  }
  return os.str();
}

double log_eta_power(double eta, double count) {
  if (count == 0.0) return 0.0;
  if (eta == 0.0) return -std::numeric_limits<double>::infinity();
  return count * std::log(eta);
}

double log_cohesion(const ArealMap& map, std::span<const int> block, const CohesionSpec& spec) {
  if (block.empty()) throw std::invalid_argument("empty block");
  if (spec.kind == CohesionSpec::Kind::HB) {
    return log_eta_power(spec.eta, boundary_length(map, block));
  }
  return std::log(spec.mass) + std::lgamma(static_cast<double>(block.size()));
}

double log_partition_prior(const ArealMap& map, const Partition& partition,
                           const CohesionSpec& spec) {
  if (partition.size() != map.size()) {
    throw std::invalid_argument("partition size does not match the map");
  }
  double total = 0.0;
  for (const auto& b : partition.blocks()) total += log_cohesion(map, b, spec);
  return total;
}

}  // namespace stppm
