#include "ovaib/info_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ovaib/rng.hpp"

namespace ovaib {

namespace {

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> subset) {
  std::vector<std::size_t> s(subset.begin(), subset.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

double entropy_of_table(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > kProbFloor) h -= p * std::log(p);
  }
  return h;
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<std::size_t> alphabet_sizes, std::vector<double> probs)
    : alphabet_sizes_(std::move(alphabet_sizes)), probs_(std::move(probs)) {
  if (alphabet_sizes_.size() < 2) throw DimensionError("DiscreteJoint: need at least 2 variables");
  std::size_t total = 1;
  for (std::size_t a : alphabet_sizes_) {
    if (a < 1) throw DimensionError("DiscreteJoint: empty alphabet");
    total *= a;
  }
  if (probs_.size() != total) throw DimensionError("DiscreteJoint: tensor length mismatch");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw ValueError("DiscreteJoint: negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValueError("DiscreteJoint: probabilities do not sum to 1");

  strides_.assign(alphabet_sizes_.size(), 1);
  for (std::size_t i = alphabet_sizes_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * alphabet_sizes_[i];
  }
}

DiscreteJoint DiscreteJoint::random(std::span<const std::size_t> alphabet_sizes, Rng& rng) {
  std::size_t total = 1;
  for (std::size_t a : alphabet_sizes) total *= a;
  std::vector<double> probs(total);
  double sum = 0.0;
  for (double& p : probs) {
    p = rng.exponential();
    sum += p;
  }
  for (double& p : probs) p /= sum;
  return DiscreteJoint(std::vector<std::size_t>(alphabet_sizes.begin(), alphabet_sizes.end()),
                       std::move(probs));
}

std::vector<double> DiscreteJoint::marginal(std::span<const std::size_t> subset) const {
  const std::vector<std::size_t> vars = sorted_unique(subset);
  if (vars.empty()) throw DimensionError("DiscreteJoint::marginal: empty subset");
  for (std::size_t v : vars) {
    if (v >= num_vars()) throw DimensionError("DiscreteJoint::marginal: variable index out of range");
  }
  std::vector<std::size_t> out_strides(vars.size());
  std::size_t out_size = 1;
  for (std::size_t i = vars.size(); i-- > 0;) {
    out_strides[i] = out_size;
    out_size *= alphabet_sizes_[vars[i]];
  }
  std::vector<double> out(out_size, 0.0);
  for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
    std::size_t out_index = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::size_t coord = (cell / strides_[vars[i]]) % alphabet_sizes_[vars[i]];
      out_index += coord * out_strides[i];
    }
    out[out_index] += probs_[cell];
  }
  return out;
}

double nats_to_bits(double nats) { return nats / std::log(2.0); }

double entropy(const DiscreteJoint& joint, std::span<const std::size_t> subset) {
  return entropy_of_table(joint.marginal(subset));
}

double conditional_entropy(const DiscreteJoint& joint, std::size_t target,
                           std::span<const std::size_t> given) {
  for (std::size_t g : given) {
    if (g == target) throw DimensionError("conditional_entropy: target overlaps conditioning set");
  }
  std::vector<std::size_t> both(given.begin(), given.end());
  both.push_back(target);
  return entropy(joint, both) - entropy(joint, given);
}

double mutual_information(const DiscreteJoint& joint, std::span<const std::size_t> a,
                          std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) throw DimensionError("mutual_information: empty subset");
  for (std::size_t x : a) {
    for (std::size_t y : b) {
      if (x == y) throw DimensionError("mutual_information: overlapping subsets");
    }
  }
  std::vector<std::size_t> both(a.begin(), a.end());
  both.insert(both.end(), b.begin(), b.end());
  const double mi = entropy(joint, a) + entropy(joint, b) - entropy(joint, both);
  return std::max(mi, 0.0);
}

namespace {

std::vector<std::size_t> rest_of(std::size_t m, std::size_t num_vars) {
  std::vector<std::size_t> rest;
  rest.reserve(num_vars - 1);
  for (std::size_t v = 0; v < num_vars; ++v) {
    if (v != m) rest.push_back(v);
  }
  return rest;
}

}  // namespace

double total_correlation(const DiscreteJoint& joint) {
  const std::size_t m_count = joint.num_vars();
  std::vector<std::size_t> all(m_count);
  std::iota(all.begin(), all.end(), 0);
  double sum_marginals = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t single[] = {m};
    sum_marginals += entropy(joint, single);
  }
  return sum_marginals - entropy(joint, all);
}

double dual_total_correlation(const DiscreteJoint& joint) {
  const std::size_t m_count = joint.num_vars();
  std::vector<std::size_t> all(m_count);
  std::iota(all.begin(), all.end(), 0);
  double sum_conditionals = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    sum_conditionals += conditional_entropy(joint, m, rest_of(m, m_count));
  }
  return entropy(joint, all) - sum_conditionals;
}

double ova_mi_sum(const DiscreteJoint& joint) {
  const std::size_t m_count = joint.num_vars();
  double sum = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::size_t single[] = {m};
    sum += mutual_information(joint, single, rest_of(m, m_count));
  }
  return sum;
}

SandwichReport check_sandwich(const DiscreteJoint& joint, double tol) {
  const double sum = ova_mi_sum(joint);
  const double m = static_cast<double>(joint.num_vars());
  SandwichReport report;
  report.lower = sum / m;
  report.upper = (m - 1.0) / m * sum;
  report.dtc = dual_total_correlation(joint);
  report.holds = (report.lower <= report.dtc + tol) && (report.dtc <= report.upper + tol);
  return report;
}

HanReport check_han(const DiscreteJoint& joint, double tol) {
  const std::size_t m_count = joint.num_vars();
  std::vector<std::size_t> all(m_count);
  std::iota(all.begin(), all.end(), 0);
  HanReport report;
  report.lhs = entropy(joint, all);
  double sum = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) sum += entropy(joint, rest_of(m, m_count));
  report.rhs = sum / (static_cast<double>(m_count) - 1.0);
  report.holds = report.lhs <= report.rhs + tol;
  return report;
}

DvReport check_dv(const DiscreteJoint& joint, std::size_t m, std::size_t num_critics, Rng& rng,
                  double tol) {
  const std::size_t m_count = joint.num_vars();
  if (m >= m_count) throw DimensionError("check_dv: modality index out of range");
  const std::size_t single[] = {m};
  const std::vector<std::size_t> rest = rest_of(m, m_count);

  // Q = P(z_m) P(rest), laid out cell-by-cell alongside P.
  const std::vector<double> pa = joint.marginal(single);
  const std::vector<double> pb = joint.marginal(rest);

  std::size_t rest_size = 1;
  for (std::size_t v : rest) rest_size *= joint.alphabet_sizes()[v];

  const std::size_t cells = joint.probs().size();
  std::vector<double> q(cells);
  std::vector<std::size_t> strides(m_count, 1);
  for (std::size_t i = m_count; i-- > 1;) strides[i - 1] = strides[i] * joint.alphabet_sizes()[i];
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const std::size_t am = (cell / strides[m]) % joint.alphabet_sizes()[m];
    std::size_t rest_index = 0;
    for (std::size_t v : rest) {
      rest_index = rest_index * joint.alphabet_sizes()[v] + (cell / strides[v]) % joint.alphabet_sizes()[v];
    }
    q[cell] = pa[am] * pb[rest_index];
  }
  (void)rest_size;

  DvReport report;
  report.mi = mutual_information(joint, single, rest);

  const auto dv_bound = [&](std::span<const double> critic) {
    double e_p = 0.0;
    double e_q = 0.0;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      e_p += joint.probs()[cell] * critic[cell];
      e_q += q[cell] * std::exp(critic[cell]);
    }
    return e_p - std::log(e_q);
  };

  std::vector<double> critic(cells);
  for (std::size_t c = 0; c < num_critics; ++c) {
    for (double& t : critic) t = rng.uniform(-2.0, 2.0);
    report.max_bound_violation = std::max(report.max_bound_violation, dv_bound(critic) - report.mi);
  }

  // Optimal critic log(dP/dQ) attains the supremum.
  for (std::size_t cell = 0; cell < cells; ++cell) {
    critic[cell] = std::log(joint.probs()[cell] / q[cell]);
  }
  report.optimal_critic_gap = std::abs(dv_bound(critic) - report.mi);
  report.holds = report.max_bound_violation <= tol && report.optimal_critic_gap <= tol;
  return report;
}

IsotropicGaussian::IsotropicGaussian(Vector mean_in, double variance_in)
    : mean(std::move(mean_in)), variance(variance_in) {
  if (!(variance > 0.0)) throw ValueError("IsotropicGaussian: variance must be positive");
  if (!mean.all_finite()) throw ValueError("IsotropicGaussian: non-finite mean");
}

IsotropicGaussian gaussian_product(std::span<const IsotropicGaussian> components,
                                   double shared_variance) {
  if (components.empty()) throw DimensionError("gaussian_product: no components");
  const std::size_t d = components[0].dim();
  for (const auto& c : components) {
    if (c.dim() != d) throw DimensionError("gaussian_product: dimension mismatch");
    if (std::abs(c.variance - shared_variance) > 1e-12 * shared_variance) {
      throw ValueError("gaussian_product: components must share the given variance");
    }
  }
  const double k = static_cast<double>(components.size());
  Vector mean(d);
  for (const auto& c : components) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += c.mean[i];
  }
  for (std::size_t i = 0; i < d; ++i) mean[i] /= k;
  return IsotropicGaussian(std::move(mean), shared_variance / k);
}

double gaussian_kl(const IsotropicGaussian& p, const IsotropicGaussian& q) {
  if (p.dim() != q.dim()) throw DimensionError("gaussian_kl: dimension mismatch");
  const double d = static_cast<double>(p.dim());
  double sq_dist = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double diff = q.mean[i] - p.mean[i];
    sq_dist += diff * diff;
  }
  const double ratio = p.variance / q.variance;
  return 0.5 * (d * ratio + sq_dist / q.variance - d + d * std::log(q.variance / p.variance));
}

double minimality_kl_constant(std::size_t dim, std::size_t num_modalities) {
  if (num_modalities < 2) throw DimensionError("minimality_kl_constant: need at least 2 modalities");
  const double k = static_cast<double>(num_modalities - 1);
  return 0.5 * static_cast<double>(dim) * (k - 1.0 - std::log(k));
}

// ---------------------------------------------------------------------------

namespace {

// 1-D grid-integration oracle: normalized product of k coordinate densities,
// integrated with Simpson's rule. Independent of gaussian_product.
struct GridMoments {
  double mean = 0.0;
  double variance = 0.0;
};

GridMoments grid_product_moments(std::span<const double> means, double variance) {
  const double sigma = std::sqrt(variance);
  double lo = means[0];
  double hi = means[0];
  for (double mu : means) {
    lo = std::min(lo, mu);
    hi = std::max(hi, mu);
  }
  lo -= 10.0 * sigma;
  hi += 10.0 * sigma;
  const std::size_t intervals = 4000;  // Simpson needs an even count
  const double h = (hi - lo) / static_cast<double>(intervals);

  const auto density = [&](double x) {
    double log_p = 0.0;
    for (double mu : means) log_p -= (x - mu) * (x - mu) / (2.0 * variance);
    return std::exp(log_p);
  };
  const auto simpson = [&](const auto& f) {
    double sum = f(lo) + f(hi);
    for (std::size_t i = 1; i < intervals; ++i) {
      sum += f(lo + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
  };

  const double z = simpson(density);
  const double mean = simpson([&](double x) { return x * density(x); }) / z;
  const double second = simpson([&](double x) { return x * x * density(x); }) / z;
  return {mean, second - mean * mean};
}

void record(std::vector<OracleCheckResult>& checks, const std::string& name, std::size_t cases,
            double max_violation, double tol) {
  checks.push_back({name, cases, max_violation, max_violation <= tol});
}

}  // namespace

OracleSweepReport run_oracle_sweeps(const OracleSweepConfig& config) {
  OracleSweepReport report;
  report.base_seed = config.base_seed;

  double sandwich_violation = 0.0;
  double han_violation = 0.0;
  double decomposition_violation = 0.0;
  double degeneracy_violation = 0.0;
  double nonneg_violation = 0.0;
  double dv_bound_violation = 0.0;
  double dv_optimal_gap = 0.0;
  std::size_t joint_cases = 0;
  std::size_t m2_cases = 0;
  std::size_t dv_cases = 0;

  for (std::size_t m_count : config.modality_counts) {
    for (std::size_t trial = 0; trial < config.joints_per_m; ++trial) {
      Rng rng(Rng::derive(config.base_seed, m_count * 100000 + trial));
      std::vector<std::size_t> sizes(m_count);
      for (auto& s : sizes) s = 2 + rng.below(config.max_alphabet - 1);
      const DiscreteJoint joint = DiscreteJoint::random(sizes, rng);
      ++joint_cases;

      const double tc = total_correlation(joint);
      double dtc = dual_total_correlation(joint);
      const double mi_sum = ova_mi_sum(joint);
      if (config.fault == OracleFault::NegateDtc) dtc = -dtc;

      nonneg_violation = std::max({nonneg_violation, -tc, -dtc, -mi_sum});
      decomposition_violation =
          std::max(decomposition_violation, std::abs(mi_sum - (tc + dtc)));

      const double m = static_cast<double>(m_count);
      sandwich_violation = std::max(sandwich_violation, mi_sum / m - dtc);
      sandwich_violation = std::max(sandwich_violation, dtc - (m - 1.0) / m * mi_sum);

      const HanReport han = check_han(joint, config.tol);
      han_violation = std::max(han_violation, han.lhs - han.rhs);

      if (m_count == 2) {
        ++m2_cases;
        const std::size_t a[] = {0};
        const std::size_t b[] = {1};
        const double mi = mutual_information(joint, a, b);
        degeneracy_violation = std::max({degeneracy_violation, std::abs(tc - dtc),
                                         std::abs(tc - mi)});
      }

      if (trial < config.dv_joints) {
        const DvReport dv = check_dv(joint, trial % m_count, config.dv_critics, rng, config.tol);
        dv_bound_violation = std::max(dv_bound_violation, dv.max_bound_violation);
        dv_optimal_gap = std::max(dv_optimal_gap, dv.optimal_critic_gap);
        ++dv_cases;
      }
    }
  }

  record(report.checks, "sandwich", joint_cases, sandwich_violation, config.tol);
  record(report.checks, "han", joint_cases, han_violation, config.tol);
  record(report.checks, "decomposition", joint_cases, decomposition_violation, config.tol);
  record(report.checks, "nonnegativity", joint_cases, nonneg_violation, 1e-12);
  record(report.checks, "m2_degeneracy", m2_cases, degeneracy_violation, config.tol);
  record(report.checks, "dv_bound", dv_cases, dv_bound_violation, config.tol);
  record(report.checks, "dv_optimal_critic", dv_cases, dv_optimal_gap, config.tol);

  // Proposition-1 proportionality across modality counts and dimensions.
  double prop1_violation = 0.0;
  std::size_t prop1_cases = 0;
  const std::size_t prop_m_counts[] = {2, 3, 5};
  const std::size_t prop_dims[] = {2, 16};
  for (std::size_t m_count : prop_m_counts) {
    for (std::size_t d : prop_dims) {
      for (std::size_t trial = 0; trial < 17; ++trial) {
        Rng rng(Rng::derive(config.base_seed, 777000 + m_count * 1000 + d * 10 + trial));
        const double sigma2 = rng.uniform(0.5, 2.0);
        std::vector<IsotropicGaussian> others;
        Vector mean_bar(d);
        for (std::size_t i = 0; i + 1 < m_count; ++i) {
          Vector mu(d);
          for (std::size_t c = 0; c < d; ++c) mu[c] = rng.gaussian();
          for (std::size_t c = 0; c < d; ++c) mean_bar[c] += mu[c];
          others.emplace_back(std::move(mu), sigma2);
        }
        const double k = static_cast<double>(m_count - 1);
        for (std::size_t c = 0; c < d; ++c) mean_bar[c] /= k;

        Vector mu_m(d);
        for (std::size_t c = 0; c < d; ++c) mu_m[c] = rng.gaussian();
        const IsotropicGaussian p(mu_m, sigma2);
        const IsotropicGaussian q = gaussian_product(others, sigma2);

        double sq = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = mu_m[c] - mean_bar[c];
          sq += diff * diff;
        }
        const double expected =
            k / (2.0 * sigma2) * sq + minimality_kl_constant(d, m_count);
        prop1_violation = std::max(prop1_violation, std::abs(gaussian_kl(p, q) - expected));
        ++prop1_cases;
      }
    }
  }
  record(report.checks, "prop1_proportionality", prop1_cases, prop1_violation, config.prop1_tol);

  // Gaussian product against the grid-integration oracle (per coordinate).
  double product_violation = 0.0;
  std::size_t product_cases = 0;
  for (std::size_t k = 1; k <= 3; ++k) {
    for (std::size_t trial = 0; trial < 5; ++trial) {
      Rng rng(Rng::derive(config.base_seed, 888000 + k * 100 + trial));
      const double sigma2 = rng.uniform(0.5, 2.0);
      const std::size_t d = 2;
      std::vector<IsotropicGaussian> components;
      for (std::size_t i = 0; i < k; ++i) {
        Vector mu(d);
        for (std::size_t c = 0; c < d; ++c) mu[c] = rng.uniform(-2.0, 2.0);
        components.emplace_back(std::move(mu), sigma2);
      }
      const IsotropicGaussian product = gaussian_product(components, sigma2);
      for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> coord_means;
        for (const auto& comp : components) coord_means.push_back(comp.mean[c]);
        const GridMoments oracle = grid_product_moments(coord_means, sigma2);
        product_violation = std::max(product_violation, std::abs(oracle.mean - product.mean[c]));
        product_violation =
            std::max(product_violation, std::abs(oracle.variance - product.variance));
      }
      ++product_cases;
    }
  }
  record(report.checks, "gaussian_product", product_cases, product_violation, config.product_tol);

  report.all_pass = true;
  for (const auto& check : report.checks) report.all_pass = report.all_pass && check.pass;
  return report;
}

}  // namespace ovaib
