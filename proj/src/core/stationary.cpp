#include "stationary.hpp"

#include <algorithm>
#include <cmath>

namespace cocylab {

std::vector<double> AtomicMeasure::symbol_mass() const {
  if (!has_symbols) return {};
  std::vector<double> m(k, 0.0);
  for (const Atom& a : atoms) m[a.symbol] += a.weight;
  return m;
}

ProjPoint replay_witness(const Cocycle& cc, const Word& witness) {
  ProjPoint x = cc.info(witness[0]).range;
  for (size_t i = 1; i < witness.size(); ++i) x = cc.act(witness[i], x);
  return x;
}

AtomicMeasure stationary_measure(const Cocycle& cc, int depth) {
  if (depth < 0) throw Error(Errc::domain_error, "depth must be >= 0");
  AtomicMeasure m;
  m.depth = depth;
  m.k = cc.k();
  m.base = cc.base();

  if (cc.base() == BaseKind::bernoulli) {
    m.has_symbols = false;
    for (int s : cc.sing()) {
      double ps = cc.weight(s);
      // DFS over interior invertible words, tracking the orbit point
      Word w;
      w.push_back(s);
      std::function<void(double, ProjPoint)> rec = [&](double prob, ProjPoint x) {
        m.atoms.push_back({-1, x, ps * prob, w});
        if (static_cast<int>(w.size()) - 1 == depth) return;
        for (int i : cc.inv()) {
          w.push_back(i);
          rec(prob * cc.trans(i, w[w.size() - 2]), cc.act(i, x));
          w.pop_back();
        }
      };
      rec(1.0, cc.info(s).range);
    }
    double covered = 0;
    for (const Atom& a : m.atoms) covered += a.weight;
    m.covered_mass = covered;
    m.tail_mass = std::pow(1.0 - cc.q0(), depth + 1);
  } else {
    m.has_symbols = true;
    int N = depth + 1;  // words of n multiplied letters, n <= N
    for (int s : cc.sing()) {
      double qs = cc.weight(s);
      Word w;
      w.push_back(s);
      // interior DFS; at every node append each terminal letter
      std::function<void(double, ProjPoint)> rec = [&](double prob, ProjPoint x) {
        int interior = static_cast<int>(w.size()) - 1;
        for (int l = 0; l < cc.k(); ++l) {
          double t = cc.trans(l, w.back());
          if (t <= 0) continue;
          w.push_back(l);
          m.atoms.push_back({l, cc.act(l, x), qs * prob * t, w});
          w.pop_back();
        }
        if (interior + 1 == N) return;
        for (int i : cc.inv()) {
          double t = cc.trans(i, w.back());
          if (t <= 0) continue;
          w.push_back(i);
          rec(prob * t, cc.act(i, x));
          w.pop_back();
        }
      };
      rec(1.0, cc.info(s).range);
    }
    double covered = 0;
    for (const Atom& a : m.atoms) covered += a.weight;
    m.covered_mass = covered;
    auto deficit = markov_mass_deficit(cc, N);
    double tail = 0;
    for (double d : deficit) tail += d;
    m.tail_mass = tail;
  }
  return m;
}

AtomicMeasure merge_atoms(const AtomicMeasure& m, double merge_tol) {
  if (merge_tol < 0) throw Error(Errc::domain_error, "merge_tol must be >= 0");
  AtomicMeasure out = m;
  auto& atoms = out.atoms;
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    return a.point.theta < b.point.theta;
  });
  std::vector<Atom> merged;
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().symbol == a.symbol &&
        proj_dist(merged.back().point, a.point) <= merge_tol) {
      Atom& b = merged.back();
      b.weight += a.weight;
      if (a.witness < b.witness) {
        b.witness = a.witness;
        b.point = a.point;
      }
    } else {
      merged.push_back(a);
    }
  }
  // circular boundary: first and last cluster of a symbol may touch mod pi
  if (merged.size() > 1) {
    size_t lo = 0;
    while (lo < merged.size()) {
      size_t hi = lo;
      while (hi + 1 < merged.size() && merged[hi + 1].symbol == merged[lo].symbol) ++hi;
      if (hi > lo && proj_dist(merged[lo].point, merged[hi].point) <= merge_tol) {
        merged[lo].weight += merged[hi].weight;
        if (merged[hi].witness < merged[lo].witness) {
          merged[lo].witness = merged[hi].witness;
          merged[lo].point = merged[hi].point;
        }
        merged.erase(merged.begin() + hi);
      }
      lo = hi + 1;
    }
  }
  out.atoms = std::move(merged);
  return out;
}

AtomicMeasure product_with_base(const Cocycle& cc, const AtomicMeasure& eta) {
  if (eta.has_symbols)
    throw Error(Errc::domain_error, "product_with_base expects a P^1 measure");
  AtomicMeasure out;
  out.depth = eta.depth;
  out.k = cc.k();
  out.base = cc.base();
  out.has_symbols = true;
  out.tail_mass = eta.tail_mass;
  out.atoms.reserve(eta.atoms.size() * cc.k());
  for (int i = 0; i < cc.k(); ++i)
    for (const Atom& a : eta.atoms)
      out.atoms.push_back({i, a.point, cc.weight(i) * a.weight, a.witness});
  double covered = 0;
  for (const Atom& a : out.atoms) covered += a.weight;
  out.covered_mass = covered;
  return out;
}

// ---- observables ---------------------------------------------------------------

double Observable::eval(int symbol, const ProjPoint& x) const {
  double v = f(symbol, x);
  if (v == std::numeric_limits<double>::infinity())
    throw Error(Errc::domain_error, "observables must not take the value +inf");
  return v;
}

Observable constant_observable(double c) {
  Observable o;
  o.f = [c](int, const ProjPoint&) { return c; };
  o.sup_bound = std::fabs(c);
  o.symbol_independent = true;
  return o;
}

double integrate(const AtomicMeasure& m, const Observable& phi) {
  double acc = 0;
  for (const Atom& a : m.atoms) {
    if (a.weight <= 0) continue;
    double v = phi.eval(a.symbol, a.point);
    if (v == kNegInf) return kNegInf;
    acc += a.weight * v;
  }
  return acc;
}

// ---- operators -------------------------------------------------------------------

namespace {
bool part_has(const Cocycle& cc, QPart part, int i) {
  switch (part) {
    case QPart::full: return true;
    case QPart::inv: return !cc.info(i).singular;
    case QPart::sing: return cc.info(i).singular;
  }
  return false;
}
}  // namespace

double apply_Q(const Cocycle& cc, const Observable& phi, QPart part, ProjPoint x, int j) {
  double acc = 0;
  bool bern = cc.base() == BaseKind::bernoulli;
  if (!bern && j < 0)
    throw Error(Errc::domain_error, "markov operator needs the conditioning symbol j");
  for (int i = 0; i < cc.k(); ++i) {
    if (!part_has(cc, part, i)) continue;
    double t = bern ? cc.trans(i, 0) : cc.trans(i, j);
    if (t <= 0) continue;
    double v = phi.eval(bern ? -1 : i, cc.act(i, x));
    if (v == kNegInf) return kNegInf;
    acc += t * v;
  }
  return acc;
}

namespace {

// exact (Q_inv^n phi)(from x, conditioned on previous symbol j) by DFS
double qinv_exact(const Cocycle& cc, const Observable& phi, int n, ProjPoint x, int j) {
  bool bern = cc.base() == BaseKind::bernoulli;
  double acc = 0;
  std::function<void(int, int, ProjPoint, double)> rec = [&](int step, int prev, ProjPoint y,
                                                             double prob) {
    if (step == n) {
      acc += prob * phi.eval(bern ? -1 : prev, y);
      return;
    }
    for (int i : cc.inv()) {
      double t = bern ? cc.trans(i, 0) : cc.trans(i, prev);
      if (t <= 0) continue;
      rec(step + 1, i, cc.act(i, y), prob * t);
    }
  };
  if (n == 0) return phi.eval(bern ? -1 : j, x);
  rec(0, j, x, 1.0);
  return acc;
}

int64_t qinv_cost(const Cocycle& cc, int n) {
  int64_t c = 1;
  for (int i = 0; i < n; ++i) {
    c *= static_cast<int64_t>(cc.inv().size());
    if (c > (int64_t(1) << 62) / 4) return c;
  }
  return c;
}

}  // namespace

QnValue apply_Qn(const Cocycle& cc, const Observable& phi, int n, ProjPoint x, int j, QPart part,
                 int64_t budget, int64_t mc_samples, uint64_t seed) {
  if (n < 0) throw Error(Errc::domain_error, "n must be >= 0");
  bool bern = cc.base() == BaseKind::bernoulli;
  if (!bern && j < 0)
    throw Error(Errc::domain_error, "markov operator needs the conditioning symbol j");
  if (part == QPart::sing) throw Error(Errc::domain_error, "apply_Qn supports full or inv parts");
  if (n == 0) return {phi.eval(bern ? -1 : j, x), 0, true};

  // exact cost: the inv chain from x plus, for the full operator, inv chains
  // from the finitely many ranges
  int64_t cost = qinv_cost(cc, n);
  int64_t total = cost;
  if (part == QPart::full) {
    int64_t sum = 0;
    for (int m = 0; m < n && sum < budget; ++m) sum += qinv_cost(cc, m);
    total += static_cast<int64_t>(cc.sing().size()) * sum;
  }

  if (total <= budget) {
    double value = qinv_exact(cc, phi, n, x, j);
    if (part == QPart::full) {
      // sing part: sum_{m=0}^{n-1} Q_sing(Q_inv^m phi)
      if (bern) {
        double add = 0;
        for (int m = 0; m < n; ++m)
          for (int s : cc.sing())
            add += cc.trans(s, 0) * qinv_exact(cc, phi, m, cc.info(s).range, s);
        value += add;
      } else {
        int k = cc.k();
        std::vector<double> T(k, 0.0), Tn(k, 0.0);
        for (int m = 0; m < n; ++m) {
          // T_{m+1} = Q_sing(Q_inv^m phi) + T_m P  (row-vector convention)
          std::vector<double> qsv(k, 0.0);
          for (int s : cc.sing()) qsv[s] = qinv_exact(cc, phi, m, cc.info(s).range, s);
          for (int jj = 0; jj < k; ++jj) {
            double acc = 0;
            for (int s : cc.sing()) acc += cc.trans(s, jj) * qsv[s];
            for (int i = 0; i < k; ++i) acc += T[i] * cc.trans(i, jj);
            Tn[jj] = acc;
          }
          T = Tn;
        }
        value += T[j];
      }
    }
    return {value, 0, true};
  }

  if (mc_samples <= 0)
    throw Error(Errc::budget_exceeded, "Q^n word sum exceeds budget and Monte Carlo is disabled");

  // seeded Monte Carlo fallback: simulate the (de)singularized chain
  double sum = 0, sumsq = 0;
  int64_t used = 0;
  RngStream rng(seed, 0x51C0FFEEull);
  std::vector<double> inv_cdf;
  double inv_mass = 0;
  if (part == QPart::inv && bern) {
    std::vector<double> w(cc.k(), 0.0);
    for (int i : cc.inv()) {
      w[i] = cc.trans(i, 0);
      inv_mass += w[i];
    }
    for (auto& v : w) v /= inv_mass;
    double acc = 0;
    inv_cdf.resize(cc.k());
    for (int i = 0; i < cc.k(); ++i) {
      acc += w[i];
      inv_cdf[i] = acc;
    }
  }
  for (int64_t s = 0; s < mc_samples; ++s) {
    ProjPoint y = x;
    int prev = j;
    double weight = 1.0;
    bool dead = false;
    for (int step = 0; step < n; ++step) {
      int i;
      if (part == QPart::inv) {
        if (bern) {
          i = -1;
          double u = rng.next_unit();
          for (int c2 = 0; c2 < cc.k(); ++c2)
            if (u < inv_cdf[c2]) {
              i = c2;
              break;
            }
          if (i < 0) i = cc.inv().back();
          weight *= inv_mass;
        } else {
          // conditioned invertible step with importance weight
          double mass = 0;
          for (int c2 : cc.inv()) mass += cc.trans(c2, prev);
          if (mass <= 0) {
            dead = true;
            break;
          }
          double u = rng.next_unit() * mass, acc = 0;
          i = cc.inv().back();
          for (int c2 : cc.inv()) {
            acc += cc.trans(c2, prev);
            if (u < acc) {
              i = c2;
              break;
            }
          }
          weight *= mass;
        }
      } else {
        if (bern) {
          double u = rng.next_unit(), acc = 0;
          i = cc.k() - 1;
          for (int c2 = 0; c2 < cc.k(); ++c2) {
            acc += cc.trans(c2, 0);
            if (u < acc) {
              i = c2;
              break;
            }
          }
        } else {
          double u = rng.next_unit(), acc = 0;
          i = cc.k() - 1;
          for (int c2 = 0; c2 < cc.k(); ++c2) {
            acc += cc.trans(c2, prev);
            if (u < acc) {
              i = c2;
              break;
            }
          }
        }
      }
      y = cc.act(i, y);
      prev = i;
    }
    double v = dead ? 0.0 : weight * phi.eval(bern ? -1 : prev, y);
    sum += v;
    sumsq += v * v;
    ++used;
  }
  double mean = sum / used;
  double var = std::max(0.0, sumsq / used - mean * mean);
  return {mean, std::sqrt(var / used), false};
}

double apply_Qbar(const Cocycle& cc, const Observable& phi, int j, ProjPoint x) {
  if (cc.base() != BaseKind::bernoulli)
    throw Error(Errc::domain_error, "Qbar is defined for Bernoulli bases");
  ProjPoint y = cc.act(j, x);
  double acc = 0;
  for (int i = 0; i < cc.k(); ++i) {
    double v = phi.eval(i, y);
    if (v == kNegInf) return kNegInf;
    acc += cc.trans(i, 0) * v;
  }
  return acc;
}

double project_pi(const Cocycle& cc, const Observable& phi, ProjPoint x) {
  if (cc.base() != BaseKind::bernoulli)
    throw Error(Errc::domain_error, "pi projection is defined for Bernoulli bases");
  double acc = 0;
  for (int i = 0; i < cc.k(); ++i) {
    double v = phi.eval(i, x);
    if (v == kNegInf) return kNegInf;
    acc += cc.trans(i, 0) * v;
  }
  return acc;
}

// ---- checks --------------------------------------------------------------------

StationarityReport check_stationarity(const Cocycle& cc, const AtomicMeasure& m,
                                      const std::vector<std::pair<std::string, Observable>>& obs,
                                      bool qbar) {
  StationarityReport rep;
  for (const auto& [name, phi] : obs) {
    StationarityRow row;
    row.name = name;
    double lhs = 0;
    for (const Atom& a : m.atoms) {
      double qv;
      if (qbar)
        qv = apply_Qbar(cc, phi, a.symbol, a.point);
      else
        qv = apply_Q(cc, phi, QPart::full, a.point, a.symbol);
      if (qv == kNegInf) {
        lhs = kNegInf;
        break;
      }
      lhs += a.weight * qv;
    }
    row.lhs = lhs;
    row.rhs = integrate(m, phi);
    row.discrepancy = std::fabs(row.lhs - row.rhs);
    double supb = std::isnan(phi.sup_bound) ? 0.0 : phi.sup_bound;
    row.slack = 2.0 * supb * m.tail_mass + 1e-10;
    row.pass = row.discrepancy <= row.slack;
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

double check_diagram(const Cocycle& cc, const Observable& phi,
                     const std::vector<ProjPoint>& sample_points) {
  double gap = 0;
  for (ProjPoint x : sample_points) {
    // (pi o Qbar) phi at x
    double lhs = 0;
    for (int j = 0; j < cc.k(); ++j) {
      double v = apply_Qbar(cc, phi, j, x);
      if (v == kNegInf) return kNegInf;
      lhs += cc.trans(j, 0) * v;
    }
    // (Q o pi) phi at x
    Observable piphi;
    piphi.f = [&cc, &phi](int, const ProjPoint& y) { return project_pi(cc, phi, y); };
    piphi.symbol_independent = true;
    double rhs = apply_Q(cc, piphi, QPart::full, x);
    gap = std::max(gap, std::fabs(lhs - rhs));
  }
  return gap;
}

}  // namespace cocylab
