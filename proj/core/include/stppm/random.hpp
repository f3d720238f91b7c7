#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace stppm {

/// Seeded random source used everywhere in the library.
///
/// The engine is std::mt19937_64 (fully specified by the standard) and the
/// variates come from Boost.Random, whose algorithms are fixed, so a seed
/// produces the same stream on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Seed for an independent substream, e.g. one chain or one replica.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with shape/rate parameterization (mean shape / rate).
  double gamma(double shape, double rate);
  /// Inverse gamma with shape/scale parameterization (mean scale / (shape - 1)).
  double inv_gamma(double shape, double scale);
  double beta(double a, double b);
  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }

  Eigen::VectorXd normal_vector(Eigen::Index n);

  /// Draws an index with probability proportional to exp(log_weights[i]).
  /// Entries equal to -inf are never chosen.
  std::size_t categorical_from_log(std::span<const double> log_weights);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stppm
