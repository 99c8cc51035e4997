#pragma once

// Cocycle specification and validation, renewal-word combinatorics, fiber
// products, symbolic path sampling and null-word detection.
//
// Word convention: a word (w0, ..., wn) carries n+1 symbols but its fiber
// product multiplies only the letters w1..wn (right-to-left); w0 is the
// renewal anchor and is never multiplied. Probabilities p(w) likewise
// exclude the initial weight of w0.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "linalg2.hpp"
#include "rng.hpp"

namespace cocylab {

enum class BaseKind { bernoulli, markov };

struct CocycleSpec {
  int k = 0;
  std::vector<Mat2> matrices;  // size k; symbol i is matrices[i] (0-based)
  std::vector<int> sing;       // 0-based, sorted, nonempty
  BaseKind base = BaseKind::bernoulli;
  std::vector<double> p;  // bernoulli weights, size k
  std::vector<double> P;  // markov: row-major k*k, P[i*k+j] = transition j -> i
  double rank_tol = kRankTolDefault;
  double null_tol = 1e-12;
  int64_t block_cap = 1'000'000;
};

// symbols, 0-based; sym[0] is the anchor
using Word = std::vector<int>;

std::string word_to_string(const Word& w);  // 1-based display, e.g. "1-2-2-1"
Word word_from_string(const std::string& s);

struct CheckResult {
  std::string name;
  bool pass = true;
  bool advisory = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool structural_ok = true;  // all non-advisory checks pass
  bool in_mstar = false;
  std::string to_string() const;
};

struct LetterInfo {
  MatClass cls;
  bool singular = false;
  ProjPoint range, kernel;  // valid when singular
  double smax = 0, smin = 0;
  double log_opnorm = 0;
};

// q = Pq with q > 0, sum 1, residual <= 1e-12; PrimitivityError if P is not
// primitive. Power iteration with a Wielandt-bounded warm-up.
std::vector<double> stationary_vector(const std::vector<double>& P, int k);

bool is_primitive(const std::vector<double>& P, int k);

// Validated, immutable cocycle engine. All operations are pure.
class Cocycle {
 public:
  static ValidationReport validate(const CocycleSpec& spec);
  static Cocycle build(const CocycleSpec& spec);  // throws SpecError on failure

  int k() const { return spec_.k; }
  BaseKind base() const { return spec_.base; }
  const CocycleSpec& spec() const { return spec_; }
  const std::vector<int>& sing() const { return spec_.sing; }
  const std::vector<int>& inv() const { return inv_; }
  const Mat2& letter(int i) const { return spec_.matrices[i]; }
  const LetterInfo& info(int i) const { return letters_[i]; }

  // transition weight into i given current symbol j (bernoulli: p_i)
  double trans(int i, int j) const {
    return spec_.base == BaseKind::bernoulli ? spec_.p[i] : spec_.P[size_t(i) * spec_.k + j];
  }
  // stationary symbol weight (bernoulli: p_i; markov: q_i)
  double weight(int i) const { return q_[i]; }
  double q0() const { return q0_; }  // total singular weight
  bool in_mstar() const { return in_mstar_; }

  // one projective step by letter i (desingularized)
  ProjPoint act(int i, ProjPoint x) const;
  NormalizedImage act_normalized(int i, ProjPoint x) const;

  const std::vector<double>& stationary_q() const { return q_; }

 private:
  CocycleSpec spec_;
  std::vector<int> inv_;
  std::vector<LetterInfo> letters_;
  std::vector<double> q_;  // stationary weights (bernoulli: p)
  double q0_ = 0;
  bool in_mstar_ = false;

  friend class PathSampler;
};

// ---- word enumeration -------------------------------------------------

// Visits every w in B_n(s,l) with p(w) > 0, in lexicographic order of the
// interior letters. fn(word, prob). DomainError if s is not singular.
void for_each_renewal_word(const Cocycle& cc, int s, int l, int n,
                           const std::function<void(const Word&, double)>& fn);

std::vector<std::pair<Word, double>> renewal_words(const Cocycle& cc, int s, int l, int n);

// Bernoulli form B_m(s): word (s, w1..wm) with all wi invertible.
void for_each_open_word(const Cocycle& cc, int s, int m,
                        const std::function<void(const Word&, double)>& fn);

// ---- products ----------------------------------------------------------

// A^n(w) = A_{wn} ... A_{w1}; the anchor w[0] is not multiplied.
Mat2 fiber_product(const Cocycle& cc, const Word& w);
Mat2 fiber_product(const std::vector<Mat2>& letters, const Word& w);

// ---- null words ---------------------------------------------------------

// All renewal blocks (s, interior in inv^*, s') with at most max_len
// multiplied letters whose product annihilates r_s:
// ||A_{s'} M r_s|| <= null_tol * prod of letter op-norms. Sufficient for
// null words: invertible letters cannot create a kernel hit on their own.
// An empty result does not certify absence beyond max_len.
std::vector<Word> find_null_words(const Cocycle& cc, int max_len,
                                  int64_t max_nodes = int64_t(1) << 26);

// ---- sampling ------------------------------------------------------------

class PathSampler {
 public:
  PathSampler(const Cocycle& cc, uint64_t seed, uint64_t stream);

  int next_symbol();
  std::vector<int> sample_path(int64_t n);
  // renewal block: a singular symbol, then invertible symbols until the next
  // singular symbol, inclusive. BlockCapExceeded past spec.block_cap draws.
  Word sample_block();

 private:
  const Cocycle* cc_;
  RngStream rng_;
  int state_ = -1;  // last emitted symbol; -1 before the first draw
  std::vector<double> base_cdf_;               // bernoulli p or markov q
  std::vector<double> sing_start_cdf_;         // conditioned singular start
  std::vector<std::vector<double>> trans_cdf_; // markov per-column cdfs

  int draw_from(const std::vector<double>& cdf) { return rng_.next_index(cdf); }
};

// ---- mass bookkeeping -----------------------------------------------------

// Bernoulli: total singular weight q. Covered renewal mass at depth N
// is 1 - (1-q)^(N+1).
double bernoulli_covered_mass(const Cocycle& cc, int depth);

// Markov: sum over s of q_s * sum_{n<=N} sum_{B_n(s,j)} p(w), for each j.
std::vector<double> markov_covered_mass(const Cocycle& cc, int N);
// Exact remainder q_j - covered_j via the substochastic inv-block series:
// solve (I - D_inv P) y = (D_inv P)^N D_sing q, remainder = P y.
std::vector<double> markov_mass_deficit(const Cocycle& cc, int N);

// ---- near-kernel arcs -------------------------------------------------------

struct Arc {
  double lo = 0, hi = 0;  // subinterval of [0, pi); lo <= hi after merging
  double length() const { return hi - lo; }
};

// For each singular letter, the arc { theta : ||A_i v(theta)|| < eps },
// merged when overlapping (circularly, period pi). total_len receives the
// summed length. Requires 0 < eps < min smax over singular letters.
std::vector<Arc> near_kernel_arcs(const Cocycle& cc, double eps, double* total_len = nullptr);

}  // namespace cocylab
