#pragma once

#include <span>
#include <string>

#include "stppm/arealgraph.hpp"
#include "stppm/partition.hpp"

namespace stppm {

/// Cohesion function of a product partition prior.
///   HB (short boundary): C(S) = eta^{l(S)}, eta in [0, 1].
///   DP:                  C(S) = M * Gamma(|S|), M > 0.
struct CohesionSpec {
  enum class Kind { HB, DP };

  Kind kind = Kind::HB;
  double eta = 0.35;
  double mass = 1.0;

  static CohesionSpec hb(double eta);
  static CohesionSpec dp(double mass);

  /// Throws std::invalid_argument if eta is outside [0, 1] or mass <= 0.
  void validate() const;
  std::string name() const;
};

/// eta^count on the log scale with the 0^0 = 1 convention, so that eta = 0
/// gives 0 for count 0 and -inf otherwise.
double log_eta_power(double eta, double count);

double log_cohesion(const ArealMap& map, std::span<const int> block, const CohesionSpec& spec);

/// Sum of block log-cohesions (unnormalized log prior).
double log_partition_prior(const ArealMap& map, const Partition& partition,
                           const CohesionSpec& spec);

}  // namespace stppm
