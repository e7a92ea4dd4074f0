#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovaib/matrix.hpp"

namespace ovaib {

class Rng;

// Exact joint probability tensor over num_vars finite variables, stored
// row-major over the alphabet sizes. All information quantities below are
// closed-form sums over this tensor, in nats.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<std::size_t> alphabet_sizes, std::vector<double> probs);

  // Full-support joint from i.i.d. unit-exponential draws, normalized.
  static DiscreteJoint random(std::span<const std::size_t> alphabet_sizes, Rng& rng);

  std::size_t num_vars() const { return alphabet_sizes_.size(); }
  const std::vector<std::size_t>& alphabet_sizes() const { return alphabet_sizes_; }
  const std::vector<double>& probs() const { return probs_; }

  // Marginal tensor over the given variable subset, in ascending index order.
  std::vector<double> marginal(std::span<const std::size_t> subset) const;

 private:
  std::vector<std::size_t> alphabet_sizes_;
  std::vector<double> probs_;
  std::vector<std::size_t> strides_;
};

double nats_to_bits(double nats);

// Probabilities below this threshold are treated as exact zeros, making
// 0*log 0 = 0 deterministic.
constexpr double kProbFloor = 1e-15;

double entropy(const DiscreteJoint& joint, std::span<const std::size_t> subset);
double conditional_entropy(const DiscreteJoint& joint, std::size_t target,
                           std::span<const std::size_t> given);
double mutual_information(const DiscreteJoint& joint, std::span<const std::size_t> a,
                          std::span<const std::size_t> b);
double total_correlation(const DiscreteJoint& joint);
double dual_total_correlation(const DiscreteJoint& joint);

// Sum over m of I(var m ; all remaining vars). Equals TC + DTC exactly.
double ova_mi_sum(const DiscreteJoint& joint);

struct SandwichReport {
  double lower = 0.0;
  double dtc = 0.0;
  double upper = 0.0;
  bool holds = false;
};

// (1/M) sum_m I(m; rest) <= DTC <= ((M-1)/M) sum_m I(m; rest).
SandwichReport check_sandwich(const DiscreteJoint& joint, double tol = 1e-9);

struct HanReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// H(all) <= (1/(M-1)) sum_m H(leave-one-out marginal).
HanReport check_han(const DiscreteJoint& joint, double tol = 1e-9);

struct DvReport {
  double mi = 0.0;
  double max_bound_violation = 0.0;  // over random critics
  double optimal_critic_gap = 0.0;   // |bound(T*) - MI|
  bool holds = false;
};

// Donsker-Varadhan sanity on I(var m ; rest): random bounded critics never
// exceed the MI and the analytic optimal critic log(dP/dQ) attains it.
DvReport check_dv(const DiscreteJoint& joint, std::size_t m, std::size_t num_critics, Rng& rng,
                  double tol = 1e-9);

// Isotropic Gaussian N(mean, variance * I).
struct IsotropicGaussian {
  Vector mean;
  double variance = 1.0;

  IsotropicGaussian(Vector mean_in, double variance_in);
  std::size_t dim() const { return mean.dim(); }
};

// Normalized product of k isotropic Gaussians sharing variance sigma^2:
// N(mean of means, sigma^2 / k * I).
IsotropicGaussian gaussian_product(std::span<const IsotropicGaussian> components,
                                   double shared_variance);

// KL(p || q) for isotropic Gaussians of equal dimension.
double gaussian_kl(const IsotropicGaussian& p, const IsotropicGaussian& q);

// mu-independent constant of the one-vs-rest KL at modality count M:
// C_M = (d/2) [ (M-1) - 1 - log(M-1) ].
double minimality_kl_constant(std::size_t dim, std::size_t num_modalities);

// ---------------------------------------------------------------------------
// Sweep driver behind the `verify` CLI subcommand.

enum class OracleFault {
  None,
  NegateDtc,  // test hook: flips the sign of DTC inside the sandwich check
};

struct OracleCheckResult {
  std::string name;
  std::size_t cases = 0;
  double max_violation = 0.0;
  bool pass = false;
};

struct OracleSweepConfig {
  std::vector<std::size_t> modality_counts = {2, 3, 4};
  std::size_t max_alphabet = 4;
  std::size_t joints_per_m = 200;
  std::uint64_t base_seed = 42;
  std::size_t dv_joints = 40;
  std::size_t dv_critics = 16;
  double tol = 1e-9;
  double prop1_tol = 1e-10;
  double product_tol = 1e-6;
  OracleFault fault = OracleFault::None;
};

struct OracleSweepReport {
  std::vector<OracleCheckResult> checks;
  bool all_pass = false;
  std::uint64_t base_seed = 0;
};

// Runs the sandwich, Han, decomposition, M=2 degeneracy, nonnegativity, DV,
// Gaussian-product and proportionality sweeps over seeded random inputs.
OracleSweepReport run_oracle_sweeps(const OracleSweepConfig& config);

}  // namespace ovaib
