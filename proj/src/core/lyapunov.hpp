#pragma once

// The first Lyapunov exponent by three independent routes: the renewal word
// series, the Furstenberg integral against the stationary measure, and
// renormalized Monte Carlo (direct path sums and the first-return induced
// cocycle). Each route has its own summation code on purpose; they
// cross-validate one another.

#include <optional>
#include <string>
#include <vector>

#include "stationary.hpp"

namespace cocylab {

enum class L1Method { series, furstenberg, mc_direct, mc_induced };

const char* l1_method_name(L1Method m);

struct L1Estimate {
  double value = 0;  // -inf allowed
  L1Method method = L1Method::series;
  int depth = -1;
  int64_t n = -1, samples = -1;
  double upper_tail_bound = 0;
  double lower_tail_bound = 0;  // heuristic unless lower_heuristic is false
  bool lower_heuristic = true;
  double std_error = 0;  // MC methods only
  std::optional<Word> neg_inf_witness;
  bool suspected_neg_inf = false;  // numeric-only detection, no structural witness

  bool is_neg_inf() const { return value == kNegInf; }
  double combined_slack() const { return upper_tail_bound + lower_tail_bound + std_error; }

  // series diagnostics: partial sum and max |term| per interior length
  std::vector<double> partial_sums;
  std::vector<double> term_profile;
};

// Renewal series of Lemma-propL1 type, summed by increasing interior length
// (<= depth). A weight-positive exact-zero norm term makes the value -inf
// with the word as witness; step norms <= 1e-300 raise suspected_neg_inf.
L1Estimate l1_series(const Cocycle& cc, int depth, int threads = 1);

// Integral of Psi(j, v) = sum_i p_ij log||A_i v|| (Bernoulli: psi with p_i)
// against a stationary measure produced for the same cocycle.
L1Estimate l1_furstenberg(const Cocycle& cc, const AtomicMeasure& measure);

// Mean over seeded sample paths of (1/n) sum of step log-norms, accumulated
// by per-step projective renormalization. Paths start at the range of the
// first sampled singular symbol (or at start_theta if given).
L1Estimate l1_monte_carlo(const Cocycle& cc, int64_t n, int64_t samples, uint64_t seed,
                          int threads = 1, std::optional<double> start_theta = std::nullopt);

// First-return estimator: q0 times the mean of log||A^tau(block) r_start||
// over sampled renewal blocks.
L1Estimate l1_induced(const Cocycle& cc, int64_t blocks, uint64_t seed, int threads = 1);

// log of the operator 2-norm of A_{w_n}...A_{w_1} for a sampled symbol
// sequence, accumulated with per-step Frobenius renormalization; used by the
// limit-law experiments. Returns -inf if the product vanishes.
double log_product_norm(const Cocycle& cc, const std::vector<int>& symbols);

}  // namespace cocylab
