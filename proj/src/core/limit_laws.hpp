#pragma once

// Empirical large-deviation and central-limit experiments for the cocycle's
// norm process, plus the Gordin-Livsic variance sigma^2 = ||g||_2^2 - ||Qbar g||_2^2
// for the coboundary solution g of the step observable.

#include <cstdint>
#include <string>
#include <vector>

#include "lyapunov.hpp"
#include "stationary.hpp"

namespace cocylab {

// pointwise max(phi, -N)
Observable truncate_observable(const Observable& phi, double N);

struct LDTRow {
  int64_t n = 0;
  int64_t samples = 0;
  int64_t deviations = 0;
  double freq = 0;
  double wilson_lo = 0, wilson_hi = 0;
};

struct LDTReport {
  double epsilon = 0;
  std::vector<LDTRow> rows;
  double fit_log_C = 0, fit_c0 = 0;  // least squares of log freq vs n^(1/3)
  bool fit_ok = false;               // at least two nonzero frequencies
  uint64_t seed = 0;
};

// Frequency over seeded paths of |(1/n) log||A^n(w)|| - L1_ref| > epsilon,
// with the product norm tracked by per-step Frobenius renormalization.
// DomainError if L1_ref = -inf.
LDTReport ldt_experiment(const Cocycle& cc, double L1_ref, double epsilon,
                         const std::vector<int64_t>& schedule, int64_t samples, uint64_t seed,
                         int threads = 1);

struct CLTReport {
  int64_t n = 0, samples = 0;
  double sigma_used = 0;
  std::string sigma_source;
  double L1_ref = 0;
  double ks = 0;
  double ks_threshold = 0.05;
  bool pass = false;
  double sample_mean = 0, sample_sd = 0;
  uint64_t seed = 0;
  std::vector<double> normalized;  // sorted
};

// One-sample Kolmogorov-Smirnov statistic of (log||A^n|| - n L1)/(sigma sqrt(n))
// against the standard normal. DegenerateVariance if sigma <= sigma_min.
CLTReport clt_experiment(const Cocycle& cc, int64_t n, int64_t samples, double L1_ref,
                         double sigma, const std::string& sigma_source, double ks_threshold,
                         uint64_t seed, int threads = 1, double sigma_min = 1e-8);

double ks_statistic_vs_normal(std::vector<double> values);  // sorts its input
double normal_cdf(double x);

struct GLVariance {
  double sigma2 = 0;
  bool clamped = false;     // negative roundoff clamped to zero
  int M = 0;                // resolvent truncation order used
  double mean_phi = 0;      // int phi_N d(p x eta)
  double coboundary_gap = 0;  // max |phibar - (g - Qbar g)| over atoms
  double g_sup = 0;
  double tail_mass = 0;
  double n_trunc = 0;
  bool exact = true;        // false when any resolvent value used Monte Carlo
};

// Gordin-Livsic variance for the step observable phi(i,v) = log||A_i v||,
// truncated at -N_trunc, over the truncated p x eta measure. Bernoulli only.
GLVariance variance_gl(const Cocycle& cc, const AtomicMeasure& eta, double N_trunc,
                       int64_t budget = 2'000'000, double gl_tol = 1e-12, uint64_t seed = 0);

// Sample variance of (path log-norm sum - n L1_ref)/sqrt(n).
double variance_empirical(const Cocycle& cc, int64_t n, int64_t samples, double L1_ref,
                          uint64_t seed, int threads = 1);

// Wilson 95% score interval for d successes out of s trials.
void wilson_interval(int64_t d, int64_t s, double* lo, double* hi);

}  // namespace cocylab
