#include "lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "parallel.hpp"

namespace cocylab {

const char* l1_method_name(L1Method m) {
  switch (m) {
    case L1Method::series: return "series";
    case L1Method::furstenberg: return "furstenberg";
    case L1Method::mc_direct: return "mc_direct";
    case L1Method::mc_induced: return "mc_induced";
  }
  return "?";
}

namespace {

struct TailConstants {
  double c_up;   // max_i log||A_i||
  double c_low;  // min over invertible letters of log smin
  double c_sing; // log min_{i,l in sing} ||A_i r_l||, -inf off M*
};

TailConstants tail_constants(const Cocycle& cc) {
  TailConstants t{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < cc.k(); ++i) t.c_up = std::max(t.c_up, cc.info(i).log_opnorm);
  for (int i : cc.inv()) t.c_low = std::min(t.c_low, std::log(cc.info(i).smin));
  double mn = std::numeric_limits<double>::infinity();
  for (int i : cc.sing())
    for (int l : cc.sing()) {
      double v = cc.letter(i).apply(cc.info(l).range.unit()).norm();
      mn = std::min(mn, v);
    }
  t.c_sing = mn > 0 ? std::log(mn) : kNegInf;
  return t;
}

// mass of closed renewal words with exactly m interior letters, per start s:
// bernoulli q_s (1-q)^m q; markov via the substochastic recursion.
// Returns per-m masses summed over s and terminal sing letters.
std::vector<double> closed_stratum_masses(const Cocycle& cc, int m_max) {
  std::vector<double> out(m_max + 1, 0.0);
  if (cc.base() == BaseKind::bernoulli) {
    double q = cc.q0();
    for (int m = 0; m <= m_max; ++m) out[m] = q * std::pow(1.0 - q, m) * q;
    return out;
  }
  int k = cc.k();
  std::vector<double> x(k, 0.0);
  for (int s : cc.sing()) x[s] = cc.weight(s);
  for (int m = 0; m <= m_max; ++m) {
    double mass = 0;
    for (int l : cc.sing())
      for (int j = 0; j < k; ++j) mass += cc.trans(l, j) * x[j];
    out[m] = mass;
    std::vector<double> y(k, 0.0);
    for (int i : cc.inv())
      for (int j = 0; j < k; ++j) y[i] += cc.trans(i, j) * x[j];
    x = y;
  }
  return out;
}

// sum over m > depth of stratum_mass(m) * |bound(m)|, iterated numerically
// until the remainder is negligible (the strata decay geometrically).
double tail_sum(const Cocycle& cc, int depth, const std::function<double(int)>& bound) {
  double acc = 0;
  if (cc.base() == BaseKind::bernoulli) {
    double q = cc.q0(), r = 1.0 - q;
    double mass = q * q * std::pow(r, depth + 1);
    for (int m = depth + 1; m < depth + 200000; ++m) {
      double term = mass * std::fabs(bound(m));
      acc += term;
      mass *= r;
      if (term <= 1e-18 * (1.0 + acc)) break;
    }
    return acc;
  }
  int k = cc.k();
  std::vector<double> x(k, 0.0);
  for (int s : cc.sing()) x[s] = cc.weight(s);
  for (int m = 0; m <= depth; ++m) {
    std::vector<double> y(k, 0.0);
    for (int i : cc.inv())
      for (int j = 0; j < k; ++j) y[i] += cc.trans(i, j) * x[j];
    x = y;
  }
  for (int m = depth + 1; m < depth + 200000; ++m) {
    double mass = 0;
    for (int l : cc.sing())
      for (int j = 0; j < k; ++j) mass += cc.trans(l, j) * x[j];
    double term = mass * std::fabs(bound(m));
    acc += term;
    if (term <= 1e-18 * (1.0 + acc) && mass <= 1e-18) break;
    std::vector<double> y(k, 0.0);
    for (int i : cc.inv())
      for (int j = 0; j < k; ++j) y[i] += cc.trans(i, j) * x[j];
    x = y;
  }
  return acc;
}

}  // namespace

L1Estimate l1_series(const Cocycle& cc, int depth, int threads) {
  if (depth < 0) throw Error(Errc::domain_error, "series depth must be >= 0");
  L1Estimate est;
  est.method = L1Method::series;
  est.depth = depth;

  const auto& sings = cc.sing();
  int ns = static_cast<int>(sings.size());
  struct Slot {
    std::vector<double> by_depth;      // partial contribution per interior length
    std::vector<double> max_term;      // max |term| per interior length
    std::optional<Word> witness;
    bool suspected = false;
  };
  std::vector<Slot> slots(ns);

  parallel_strata(ns, threads, [&](int64_t si) {
    int s = sings[si];
    Slot& slot = slots[si];
    slot.by_depth.assign(depth + 1, 0.0);
    slot.max_term.assign(depth + 1, 0.0);
    double qs = cc.weight(s);
    Word w;
    w.push_back(s);
    // DFS over interior invertible words; at each node close with every
    // singular terminal. acc carries sum of interior step log-norms.
    std::function<void(double, ProjPoint, double)> rec = [&](double prob, ProjPoint x,
                                                             double acc) {
      int m = static_cast<int>(w.size()) - 1;
      for (int l : cc.sing()) {
        double t = cc.trans(l, w.back());
        if (t <= 0) continue;
        double nl = cc.letter(l).apply(x.unit()).norm();
        double wgt = qs * prob * t;
        if (nl == 0.0) {
          if (!slot.witness) {
            Word full = w;
            full.push_back(l);
            slot.witness = full;
          }
          slot.by_depth[m] = kNegInf;
          continue;
        }
        double term_log = acc + std::log(nl);
        if (nl <= 1e-300) slot.suspected = true;
        slot.by_depth[m] += wgt * term_log;
        slot.max_term[m] = std::max(slot.max_term[m], std::fabs(term_log));
      }
      if (m == depth) return;
      for (int i : cc.inv()) {
        double t = cc.trans(i, w.back());
        if (t <= 0) continue;
        NormalizedImage ni = cc.act_normalized(i, x);
        w.push_back(i);
        rec(prob * t, ni.point, acc + ni.log_norm);
        w.pop_back();
      }
    };
    rec(1.0, cc.info(s).range, 0.0);
  });

  est.partial_sums.assign(depth + 1, 0.0);
  est.term_profile.assign(depth + 1, 0.0);
  double total = 0;
  for (int m = 0; m <= depth; ++m) {
    for (const Slot& slot : slots) {
      total += slot.by_depth[m];
      est.term_profile[m] = std::max(est.term_profile[m], slot.max_term[m]);
    }
    est.partial_sums[m] = total;
  }
  for (const Slot& slot : slots) {
    if (slot.witness && !est.neg_inf_witness) est.neg_inf_witness = slot.witness;
    est.suspected_neg_inf = est.suspected_neg_inf || slot.suspected;
  }
  est.value = est.neg_inf_witness ? kNegInf : total;

  TailConstants tc = tail_constants(cc);
  double cu = std::max(tc.c_up, 0.0);
  est.upper_tail_bound = tail_sum(cc, depth, [cu](int m) { return (m + 1) * cu; });
  est.lower_tail_bound =
      tail_sum(cc, depth, [&tc](int m) { return m * tc.c_low + tc.c_sing; });
  est.lower_heuristic = true;
  return est;
}

L1Estimate l1_furstenberg(const Cocycle& cc, const AtomicMeasure& measure) {
  if (measure.k != cc.k() || measure.base != cc.base())
    throw Error(Errc::domain_error, "measure was built for a different cocycle");
  bool bern = cc.base() == BaseKind::bernoulli;
  if (bern == measure.has_symbols)
    throw Error(Errc::domain_error, "measure symbol layout does not match the base");

  L1Estimate est;
  est.method = L1Method::furstenberg;
  est.depth = measure.depth;
  double acc = 0;
  for (const Atom& a : measure.atoms) {
    if (a.weight <= 0) continue;
    Vec2 v = a.point.unit();
    for (int i = 0; i < cc.k(); ++i) {
      double t = bern ? cc.trans(i, 0) : cc.trans(i, a.symbol);
      if (t <= 0) continue;
      double nv = cc.letter(i).apply(v).norm();
      if (nv == 0.0) {
        Word wit = a.witness;
        wit.push_back(i);
        est.neg_inf_witness = wit;
        est.value = kNegInf;
        return est;
      }
      if (nv <= 1e-300) est.suspected_neg_inf = true;
      acc += a.weight * t * std::log(nv);
    }
  }
  est.value = acc;

  TailConstants tc = tail_constants(cc);
  double cu = std::max(tc.c_up, 0.0);
  int D = measure.depth;
  // Psi over the uncovered part of the measure is bounded by one more letter
  // on top of the longest enumerated word.
  est.upper_tail_bound = measure.tail_mass * (D + 2) * cu;
  est.lower_tail_bound = measure.tail_mass * std::fabs((D + 1) * tc.c_low + tc.c_sing);
  est.lower_heuristic = true;
  return est;
}

L1Estimate l1_monte_carlo(const Cocycle& cc, int64_t n, int64_t samples, uint64_t seed,
                          int threads, std::optional<double> start_theta) {
  if (n < 1 || samples < 1)
    throw Error(Errc::domain_error, "n and samples must be >= 1");
  L1Estimate est;
  est.method = L1Method::mc_direct;
  est.n = n;
  est.samples = samples;

  constexpr int64_t kBlock = 64;
  int64_t nblocks = (samples + kBlock - 1) / kBlock;
  struct Slot {
    double sum = 0, sumsq = 0;
    std::optional<Word> witness;
    bool suspected = false;
  };
  std::vector<Slot> slots(nblocks);

  parallel_strata(nblocks, threads, [&](int64_t b) {
    Slot& slot = slots[b];
    int64_t lo = b * kBlock, hi = std::min(samples, lo + kBlock);
    for (int64_t samp = lo; samp < hi; ++samp) {
      PathSampler sampler(cc, seed, static_cast<uint64_t>(samp));
      ProjPoint x;
      Word realized;
      if (start_theta) {
        x = ProjPoint::from_angle(*start_theta);
      } else {
        // walk to the first singular symbol; start on the support of eta
        int s;
        do {
          s = sampler.next_symbol();
        } while (!cc.info(s).singular);
        x = cc.info(s).range;
        realized.push_back(s);
      }
      double acc = 0;
      for (int64_t t = 0; t < n; ++t) {
        int i = sampler.next_symbol();
        realized.push_back(i);
        NormalizedImage ni = cc.act_normalized(i, x);
        if (ni.log_norm == kNegInf) {
          slot.witness = realized;
          acc = kNegInf;
          break;
        }
        if (ni.log_norm <= -690.0) slot.suspected = true;  // step norm <= ~1e-300
        acc += ni.log_norm;
        x = ni.point;
      }
      if (acc == kNegInf) return;
      double v = acc / static_cast<double>(n);
      slot.sum += v;
      slot.sumsq += v * v;
    }
  });

  double sum = 0, sumsq = 0;
  for (const Slot& slot : slots) {
    if (slot.witness && !est.neg_inf_witness) est.neg_inf_witness = slot.witness;
    est.suspected_neg_inf = est.suspected_neg_inf || slot.suspected;
    sum += slot.sum;
    sumsq += slot.sumsq;
  }
  if (est.neg_inf_witness) {
    est.value = kNegInf;
    return est;
  }
  double mean = sum / samples;
  double var = std::max(0.0, sumsq / samples - mean * mean);
  est.value = mean;
  est.std_error = samples > 1 ? std::sqrt(var / (samples - 1)) : std::sqrt(var);
  return est;
}

L1Estimate l1_induced(const Cocycle& cc, int64_t blocks, uint64_t seed, int threads) {
  if (blocks < 1) throw Error(Errc::domain_error, "blocks must be >= 1");
  L1Estimate est;
  est.method = L1Method::mc_induced;
  est.samples = blocks;

  constexpr int64_t kBlock = 64;
  int64_t nslots = (blocks + kBlock - 1) / kBlock;
  struct Slot {
    double sum = 0, sumsq = 0;
    std::optional<Word> witness;
    bool suspected = false;
  };
  std::vector<Slot> slots(nslots);

  parallel_strata(nslots, threads, [&](int64_t b) {
    Slot& slot = slots[b];
    int64_t lo = b * kBlock, hi = std::min(blocks, lo + kBlock);
    PathSampler sampler(cc, seed ^ 0xB10C5ull, static_cast<uint64_t>(b));
    for (int64_t i = lo; i < hi; ++i) {
      Word block = sampler.sample_block();
      // phi(block) = log||A^tau(block) r_{block0}|| via telescoped steps
      ProjPoint x = cc.info(block[0]).range;
      double acc = 0;
      for (size_t t = 1; t < block.size(); ++t) {
        NormalizedImage ni = cc.act_normalized(block[t], x);
        if (ni.log_norm == kNegInf) {
          slot.witness = block;
          acc = kNegInf;
          break;
        }
        if (ni.log_norm <= -690.0) slot.suspected = true;
        acc += ni.log_norm;
        x = ni.point;
      }
      if (acc == kNegInf) return;
      slot.sum += acc;
      slot.sumsq += acc * acc;
    }
  });

  double sum = 0, sumsq = 0;
  for (const Slot& slot : slots) {
    if (slot.witness && !est.neg_inf_witness) est.neg_inf_witness = slot.witness;
    est.suspected_neg_inf = est.suspected_neg_inf || slot.suspected;
    sum += slot.sum;
    sumsq += slot.sumsq;
  }
  if (est.neg_inf_witness) {
    est.value = kNegInf;
    return est;
  }
  double mean = sum / blocks;
  double var = std::max(0.0, sumsq / blocks - mean * mean);
  est.value = cc.q0() * mean;
  est.std_error = cc.q0() * (blocks > 1 ? std::sqrt(var / (blocks - 1)) : std::sqrt(var));
  return est;
}

double log_product_norm(const Cocycle& cc, const std::vector<int>& symbols) {
  Mat2 m = Mat2::identity();
  double acc = 0;
  for (int i : symbols) {
    m = cc.letter(i) * m;
    double f = m.frobenius();
    if (f == 0.0) return kNegInf;
    m = m.scaled(1.0 / f);
    acc += std::log(f);
  }
  return acc + std::log(m.smax());
}

}  // namespace cocylab
