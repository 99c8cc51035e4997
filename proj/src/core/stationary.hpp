#pragma once

// Explicit atomic stationary measure of the desingularized projective Markov
// chain, the operators Q, Q_inv, Q_sing (and the Bernoulli auxiliary Qbar
// with its symbol projection pi), and the numerical stationarity checks.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cocycle.hpp"

namespace cocylab {

struct Atom {
  int symbol = -1;  // -1 for the Bernoulli P^1 measure
  ProjPoint point;
  double weight = 0;
  Word witness;  // replaying the witness from r_{w0} regenerates the point
};

struct AtomicMeasure {
  std::vector<Atom> atoms;
  double covered_mass = 0;
  double tail_mass = 0;  // exact remainder from base-distribution combinatorics
  int depth = -1;        // max interior length enumerated
  bool has_symbols = false;
  int k = 0;
  BaseKind base = BaseKind::bernoulli;

  // per-symbol covered weight (markov measures); empty for P^1 measures
  std::vector<double> symbol_mass() const;
};

// Atoms for all renewal words with interior length <= depth.
// Bernoulli: measure on P^1, atoms A^m(s w) r_s with weight p_s p(w),
//            tail = (1-q)^(depth+1).
// Markov: measure on A x P^1, atoms (j, A^n(w) r_s) with weight q_s p(w),
//         n <= depth+1, tail from the substochastic inv-block remainder.
AtomicMeasure stationary_measure(const Cocycle& cc, int depth);

// Coalesce atoms within proj_dist <= merge_tol (same symbol); weights are
// summed and the lexicographically smallest witness kept.
AtomicMeasure merge_atoms(const AtomicMeasure& m, double merge_tol);

// p x eta for a Bernoulli P^1 measure.
AtomicMeasure product_with_base(const Cocycle& cc, const AtomicMeasure& eta);

// Regenerate an atom's point from its witness word.
ProjPoint replay_witness(const Cocycle& cc, const Word& witness);

// ---- observables ------------------------------------------------------------

struct Observable {
  // symbol is -1 when the observable lives on P^1 alone
  std::function<double(int, const ProjPoint&)> f;
  double sup_bound = std::numeric_limits<double>::quiet_NaN();
  bool symbol_independent = false;

  double eval(int symbol, const ProjPoint& x) const;  // -inf allowed, +inf rejected
};

Observable constant_observable(double c);

// extended-real integral; -inf iff some positively weighted atom is -inf
double integrate(const AtomicMeasure& m, const Observable& phi);

// ---- Markov operators ----------------------------------------------------------

enum class QPart { full, inv, sing };

// Bernoulli: (Q phi)(x) = sum_i p_i phi(A_i x) with phi evaluated at (-1, .).
// Markov: (Q phi)(j, x) = sum_i p_ij phi(i, A_i x); requires j >= 0.
double apply_Q(const Cocycle& cc, const Observable& phi, QPart part, ProjPoint x, int j = -1);

struct QnValue {
  double value = 0;
  double std_error = 0;  // 0 for exact evaluation
  bool exact = true;
};

// Q^n phi by the decomposition Q^n = Q_inv^n + Q_sing o (sum Q_inv^i); falls
// back to seeded Monte Carlo when the word count exceeds the budget.
// part selects the full operator or the Q_inv^n component.
QnValue apply_Qn(const Cocycle& cc, const Observable& phi, int n, ProjPoint x, int j = -1,
                 QPart part = QPart::full, int64_t budget = 2'000'000,
                 int64_t mc_samples = 20'000, uint64_t seed = 0);

// Bernoulli auxiliary operator (Qbar phi)(j, x) = sum_i p_i phi(i, A_j x).
double apply_Qbar(const Cocycle& cc, const Observable& phi, int j, ProjPoint x);

// (pi phi)(x) = sum_i p_i phi(i, x)  (Bernoulli only)
double project_pi(const Cocycle& cc, const Observable& phi, ProjPoint x);

// ---- checks -----------------------------------------------------------------------

struct StationarityRow {
  std::string name;
  double lhs = 0, rhs = 0, discrepancy = 0, slack = 0;
  bool pass = false;
};

struct StationarityReport {
  std::vector<StationarityRow> rows;
  bool all_pass = true;
};

// |int Q phi dm - int phi dm| <= 2 ||phi||_inf tail + 1e-10 per observable.
// For Bernoulli P^1 measures Q is the P^1 operator; pair measures use the
// Markov operator. Use qbar = true to test Qbar against a p x eta measure.
StationarityReport check_stationarity(const Cocycle& cc, const AtomicMeasure& m,
                                      const std::vector<std::pair<std::string, Observable>>& obs,
                                      bool qbar = false);

// max over sample points of |(pi o Qbar) phi - (Q o pi) phi| (Bernoulli).
double check_diagram(const Cocycle& cc, const Observable& phi,
                     const std::vector<ProjPoint>& sample_points);

}  // namespace cocylab
