#include "cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cocylab {

std::string word_to_string(const Word& w) {
  std::string out;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(w[i] + 1);
  }
  return out;
}

Word word_from_string(const std::string& s) {
  Word w;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, '-')) {
    if (tok.empty()) continue;
    w.push_back(std::stoi(tok) - 1);
  }
  return w;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& c : checks) {
    out += c.pass ? "[pass] " : (c.advisory ? "[flag] " : "[FAIL] ");
    out += c.name;
    if (!c.detail.empty()) {
      out += ": ";
      out += c.detail;
    }
    out += '\n';
  }
  return out;
}

// ---- stochastic matrix helpers ------------------------------------------

bool is_primitive(const std::vector<double>& P, int k) {
  // boolean reachability powers up to the Wielandt exponent (k-1)^2 + 1
  std::vector<char> B(size_t(k) * k), Bn(size_t(k) * k), tmp(size_t(k) * k);
  for (int i = 0; i < k * k; ++i) B[i] = P[i] > 0 ? 1 : 0;
  Bn = B;
  int wielandt = (k - 1) * (k - 1) + 1;
  for (int m = 1; m <= wielandt; ++m) {
    bool all = true;
    for (int i = 0; i < k * k && all; ++i) all = Bn[i] != 0;
    if (all) return true;
    // Bn <- Bn * B
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        char v = 0;
        for (int l = 0; l < k; ++l) v |= (Bn[size_t(i) * k + l] & B[size_t(l) * k + j]);
        tmp[size_t(i) * k + j] = v;
      }
    Bn.swap(tmp);
  }
  return false;
}

std::vector<double> stationary_vector(const std::vector<double>& P, int k) {
  if (!is_primitive(P, k))
    throw Error(Errc::primitivity_error, "transition matrix is not primitive");
  std::vector<double> v(k, 1.0 / k), w(k);
  auto step = [&] {
    for (int i = 0; i < k; ++i) {
      double s = 0;
      for (int j = 0; j < k; ++j) s += P[size_t(i) * k + j] * v[j];
      w[i] = s;
    }
    double sum = 0;
    for (double x : w) sum += x;
    for (int i = 0; i < k; ++i) v[i] = w[i] / sum;
  };
  int warmup = (k - 1) * (k - 1) + 1;
  for (int m = 0; m < warmup; ++m) step();
  for (int iter = 0; iter < 200000; ++iter) {
    step();
    double res = 0;
    for (int i = 0; i < k; ++i) {
      double s = 0;
      for (int j = 0; j < k; ++j) s += P[size_t(i) * k + j] * v[j];
      res = std::max(res, std::fabs(s - v[i]));
    }
    if (res <= 1e-13) return v;
  }
  throw Error(Errc::primitivity_error, "stationary vector iteration did not converge");
}

// ---- validation -------------------------------------------------------------

namespace {

void add_check(ValidationReport& rep, const std::string& name, bool pass,
               const std::string& detail = "", bool advisory = false) {
  rep.checks.push_back({name, pass, advisory, detail});
  if (!pass && !advisory) rep.structural_ok = false;
}

// strong connectivity + aperiodicity of the inv-restricted transition graph
bool inv_subshift_mixing(const CocycleSpec& spec, const std::vector<int>& inv) {
  int k = spec.k;
  int m = static_cast<int>(inv.size());
  if (m == 0) return false;
  std::vector<char> adj(size_t(m) * m, 0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double t = spec.base == BaseKind::bernoulli ? spec.p[inv[b]]
                                                  : spec.P[size_t(inv[b]) * k + inv[a]];
      adj[size_t(a) * m + b] = t > 0 ? 1 : 0;  // edge a -> b
    }
  std::vector<char> reach = adj, tmp(size_t(m) * m);
  int wielandt = (m - 1) * (m - 1) + 1;
  for (int it = 1; it <= wielandt; ++it) {
    bool all = true;
    for (int i = 0; i < m * m && all; ++i) all = reach[i] != 0;
    if (all) return true;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        char v = 0;
        for (int l = 0; l < m; ++l) v |= (reach[size_t(i) * m + l] & adj[size_t(l) * m + j]);
        tmp[size_t(i) * m + j] = v;
      }
    reach.swap(tmp);
  }
  return false;
}

}  // namespace

ValidationReport Cocycle::validate(const CocycleSpec& spec) {
  ValidationReport rep;
  int k = spec.k;
  add_check(rep, "alphabet size k >= 2", k >= 2, "k = " + std::to_string(k));
  add_check(rep, "matrix count", static_cast<int>(spec.matrices.size()) == k);
  if (!rep.structural_ok) return rep;

  std::vector<char> is_sing(k, 0);
  bool sing_ok = !spec.sing.empty();
  for (int s : spec.sing) {
    if (s < 0 || s >= k) sing_ok = false;
    else is_sing[s] = 1;
  }
  int n_inv = 0;
  for (int i = 0; i < k; ++i) n_inv += is_sing[i] ? 0 : 1;
  add_check(rep, "singular set nonempty and in range", sing_ok);
  add_check(rep, "invertible set nonempty", n_inv > 0);
  if (!rep.structural_ok) return rep;

  bool finite_ok = true;
  for (int i = 0; i < k; ++i)
    if (!spec.matrices[i].finite()) finite_ok = false;
  add_check(rep, "entries finite", finite_ok);
  if (!finite_ok) return rep;

  for (int i = 0; i < k; ++i) {
    MatClass cls = classify(spec.matrices[i], spec.rank_tol);
    bool want_sing = is_sing[i] != 0;
    bool ok = want_sing ? cls == MatClass::Rank1 : cls == MatClass::InvPos;
    add_check(rep, "letter " + std::to_string(i + 1) + " class",
              ok,
              std::string("declared ") + (want_sing ? "singular" : "invertible") +
                  ", classified " + mat_class_name(cls));
  }

  if (spec.base == BaseKind::bernoulli) {
    bool sizes = static_cast<int>(spec.p.size()) == k;
    add_check(rep, "bernoulli vector size", sizes);
    if (sizes) {
      bool pos = true;
      double sum = 0;
      for (double x : spec.p) {
        if (!(x > 0)) pos = false;
        sum += x;
      }
      add_check(rep, "bernoulli weights positive", pos);
      add_check(rep, "bernoulli weights sum to 1", std::fabs(sum - 1.0) <= 1e-12,
                "sum = " + std::to_string(sum));
    }
  } else {
    bool sizes = static_cast<int>(spec.P.size()) == k * k;
    add_check(rep, "markov matrix size", sizes);
    if (sizes) {
      bool nonneg = true, cols = true;
      for (int j = 0; j < k; ++j) {
        double sum = 0;
        for (int i = 0; i < k; ++i) {
          double x = spec.P[size_t(i) * k + j];
          if (x < 0) nonneg = false;
          sum += x;
        }
        if (std::fabs(sum - 1.0) > 1e-12) cols = false;
      }
      add_check(rep, "markov entries nonnegative", nonneg);
      add_check(rep, "markov columns sum to 1", cols);
      bool prim = nonneg && cols && is_primitive(spec.P, k);
      add_check(rep, "markov matrix primitive", prim,
                prim ? "" : "PrimitivityError: no power of P is entrywise positive");
      if (prim) {
        auto q = stationary_vector(spec.P, k);
        double res = 0;
        bool qpos = true;
        for (int i = 0; i < k; ++i) {
          double s = 0;
          for (int j = 0; j < k; ++j) s += spec.P[size_t(i) * k + j] * q[j];
          res = std::max(res, std::fabs(s - q[i]));
          if (!(q[i] > 0)) qpos = false;
        }
        add_check(rep, "stationary vector residual <= 1e-12", res <= 1e-12);
        add_check(rep, "stationary vector positive", qpos);
      }
    }
  }

  if (rep.structural_ok) {
    double q0 = 0;
    if (spec.base == BaseKind::bernoulli) {
      for (int s : spec.sing) q0 += spec.p[s];
    } else {
      auto q = stationary_vector(spec.P, k);
      for (int s : spec.sing) q0 += q[s];
    }
    add_check(rep, "expected renewal block length within block_cap",
              1.0 / q0 <= static_cast<double>(spec.block_cap),
              "1/q0 = " + std::to_string(1.0 / q0));

    // advisory flags
    bool mstar = true;
    bool degenerate = false;
    for (int i : spec.sing) {
      auto rki = range_kernel(spec.matrices[i], spec.rank_tol);
      if (proj_dist(rki.range, rki.kernel) <= spec.rank_tol) degenerate = true;
      for (int j : spec.sing) {
        auto rkj = range_kernel(spec.matrices[j], spec.rank_tol);
        if (proj_dist(rki.range, rkj.kernel) <= spec.rank_tol) mstar = false;
      }
    }
    rep.in_mstar = mstar;
    add_check(rep, "in M* (ranges away from kernels)", mstar,
              mstar ? "" : "some range coincides with a singular kernel", true);
    if (degenerate)
      add_check(rep, "degenerate singular letter (range ~ kernel)", false,
                "stationary support may be degenerate", true);
    std::vector<int> inv;
    for (int i = 0; i < k; ++i)
      if (!is_sing[i]) inv.push_back(i);
    if (spec.base == BaseKind::markov)
      add_check(rep, "inv subshift topologically mixing", inv_subshift_mixing(spec, inv),
                "advisory only; nothing is gated on this", true);
  }
  return rep;
}

Cocycle Cocycle::build(const CocycleSpec& spec) {
  ValidationReport rep = validate(spec);
  if (!rep.structural_ok) {
    std::string msg = "invalid cocycle spec:\n" + rep.to_string();
    throw Error(Errc::spec_error, msg);
  }
  Cocycle cc;
  cc.spec_ = spec;
  std::sort(cc.spec_.sing.begin(), cc.spec_.sing.end());
  std::vector<char> is_sing(spec.k, 0);
  for (int s : cc.spec_.sing) is_sing[s] = 1;
  for (int i = 0; i < spec.k; ++i)
    if (!is_sing[i]) cc.inv_.push_back(i);

  cc.letters_.resize(spec.k);
  for (int i = 0; i < spec.k; ++i) {
    LetterInfo& li = cc.letters_[i];
    const Mat2& m = spec.matrices[i];
    li.cls = classify(m, spec.rank_tol);
    li.singular = is_sing[i] != 0;
    li.smax = m.smax();
    li.smin = m.smin();
    li.log_opnorm = std::log(li.smax);
    if (li.singular) {
      auto rk = range_kernel(m, spec.rank_tol);
      li.range = rk.range;
      li.kernel = rk.kernel;
    }
  }

  cc.q_ = spec.base == BaseKind::bernoulli ? spec.p : stationary_vector(spec.P, spec.k);
  cc.q0_ = 0;
  for (int s : cc.spec_.sing) cc.q0_ += cc.q_[s];
  cc.in_mstar_ = rep.in_mstar;
  return cc;
}

ProjPoint Cocycle::act(int i, ProjPoint x) const {
  const LetterInfo& li = letters_[i];
  if (li.singular) return li.range;
  return ProjPoint::from_vector(spec_.matrices[i].apply(x.unit()));
}

NormalizedImage Cocycle::act_normalized(int i, ProjPoint x) const {
  const LetterInfo& li = letters_[i];
  Vec2 w = spec_.matrices[i].apply(x.unit());
  double nw = w.norm();
  if (li.singular) return {li.range, nw == 0.0 ? kNegInf : std::log(nw)};
  return {ProjPoint::from_vector(w), std::log(nw)};
}

// ---- word enumeration --------------------------------------------------------

void for_each_renewal_word(const Cocycle& cc, int s, int l, int n,
                           const std::function<void(const Word&, double)>& fn) {
  if (!cc.info(s).singular)
    throw Error(Errc::domain_error, "renewal words start at a singular symbol");
  if (n < 1) throw Error(Errc::domain_error, "word length n must be >= 1");
  Word w(n + 1);
  w[0] = s;
  w[n] = l;
  const auto& inv = cc.inv();
  // DFS over interior positions 1..n-1
  std::function<void(int, double)> rec = [&](int pos, double prob) {
    if (pos == n) {
      double t = cc.trans(l, w[n - 1]);
      if (t > 0) fn(w, prob * t);
      return;
    }
    for (int i : inv) {
      double t = cc.trans(i, w[pos - 1]);
      if (t <= 0) continue;
      w[pos] = i;
      rec(pos + 1, prob * t);
    }
  };
  rec(1, 1.0);
}

std::vector<std::pair<Word, double>> renewal_words(const Cocycle& cc, int s, int l, int n) {
  std::vector<std::pair<Word, double>> out;
  for_each_renewal_word(cc, s, l, n, [&](const Word& w, double p) { out.emplace_back(w, p); });
  return out;
}

void for_each_open_word(const Cocycle& cc, int s, int m,
                        const std::function<void(const Word&, double)>& fn) {
  if (!cc.info(s).singular)
    throw Error(Errc::domain_error, "open words start at a singular symbol");
  if (m < 0) throw Error(Errc::domain_error, "interior length must be >= 0");
  Word w(m + 1);
  w[0] = s;
  const auto& inv = cc.inv();
  std::function<void(int, double)> rec = [&](int pos, double prob) {
    if (pos == m + 1) {
      fn(w, prob);
      return;
    }
    for (int i : inv) {
      double t = cc.trans(i, w[pos - 1]);
      if (t <= 0) continue;
      w[pos] = i;
      rec(pos + 1, prob * t);
    }
  };
  rec(1, 1.0);
}

// ---- products ------------------------------------------------------------------

Mat2 fiber_product(const std::vector<Mat2>& letters, const Word& w) {
  Mat2 m = Mat2::identity();
  for (size_t i = 1; i < w.size(); ++i) m = letters[w[i]] * m;
  return m;
}

Mat2 fiber_product(const Cocycle& cc, const Word& w) {
  return fiber_product(cc.spec().matrices, w);
}

// ---- null words -----------------------------------------------------------------

std::vector<Word> find_null_words(const Cocycle& cc, int max_len, int64_t max_nodes) {
  if (max_len < 2) throw Error(Errc::domain_error, "null word search needs max_len >= 2");
  std::vector<Word> found;
  int64_t nodes = 0;
  const auto& inv = cc.inv();
  for (int n = 2; n <= max_len; ++n) {
    for (int s : cc.sing()) {
      Vec2 r0 = cc.info(s).range.unit();
      Word w(n + 1);
      w[0] = s;
      // interior letters at positions 1..n-1, terminal singular at n
      std::function<void(int, Vec2, double)> rec = [&](int pos, Vec2 v, double normprod) {
        if (++nodes > max_nodes)
          throw Error(Errc::budget_exceeded, "null word search exceeded node budget");
        if (pos == n) {
          for (int sp : cc.sing()) {
            if (cc.trans(sp, w[pos - 1]) <= 0) continue;
            Vec2 u = cc.letter(sp).apply(v);
            double bound = normprod * cc.info(sp).smax;
            if (u.norm() <= cc.spec().null_tol * bound) {
              w[n] = sp;
              found.push_back(w);
            }
          }
          return;
        }
        for (int i : inv) {
          if (cc.trans(i, w[pos - 1]) <= 0) continue;
          w[pos] = i;
          rec(pos + 1, cc.letter(i).apply(v), normprod * cc.info(i).smax);
        }
      };
      rec(1, r0, 1.0);
    }
  }
  return found;
}

// ---- sampling -------------------------------------------------------------------

namespace {
std::vector<double> make_cdf(const std::vector<double>& w) {
  std::vector<double> cdf(w.size());
  double acc = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cdf[i] = acc;
  }
  return cdf;
}
}  // namespace

PathSampler::PathSampler(const Cocycle& cc, uint64_t seed, uint64_t stream)
    : cc_(&cc), rng_(seed, stream) {
  int k = cc.k();
  base_cdf_ = make_cdf(cc.stationary_q());
  std::vector<double> sw(k, 0.0);
  for (int s : cc.sing()) sw[s] = cc.weight(s) / cc.q0();
  sing_start_cdf_ = make_cdf(sw);
  if (cc.base() == BaseKind::markov) {
    trans_cdf_.resize(k);
    for (int j = 0; j < k; ++j) {
      std::vector<double> col(k);
      for (int i = 0; i < k; ++i) col[i] = cc.trans(i, j);
      trans_cdf_[j] = make_cdf(col);
    }
  }
}

int PathSampler::next_symbol() {
  int sym;
  if (cc_->base() == BaseKind::bernoulli) {
    sym = draw_from(base_cdf_);
  } else {
    sym = state_ < 0 ? draw_from(base_cdf_) : draw_from(trans_cdf_[state_]);
  }
  state_ = sym;
  return sym;
}

std::vector<int> PathSampler::sample_path(int64_t n) {
  std::vector<int> out(n);
  for (int64_t i = 0; i < n; ++i) out[i] = next_symbol();
  return out;
}

Word PathSampler::sample_block() {
  Word block;
  int start;
  if (state_ >= 0 && cc_->info(state_).singular) {
    start = state_;  // continue the induced chain from the previous terminal
  } else {
    start = draw_from(sing_start_cdf_);
    state_ = start;
  }
  block.push_back(start);
  int64_t draws = 0;
  for (;;) {
    if (++draws > cc_->spec().block_cap)
      throw Error(Errc::block_cap_exceeded, "renewal block exceeded block_cap draws");
    int sym = next_symbol();
    block.push_back(sym);
    if (cc_->info(sym).singular) return block;
  }
}

// ---- mass bookkeeping --------------------------------------------------------------

double bernoulli_covered_mass(const Cocycle& cc, int depth) {
  return 1.0 - std::pow(1.0 - cc.q0(), depth + 1);
}

namespace {
// y = (D_inv P) x
std::vector<double> inv_step(const Cocycle& cc, const std::vector<double>& x) {
  int k = cc.k();
  std::vector<double> y(k, 0.0);
  for (int i : cc.inv())
    for (int j = 0; j < k; ++j) y[i] += cc.trans(i, j) * x[j];
  return y;
}

std::vector<double> full_step(const Cocycle& cc, const std::vector<double>& x) {
  int k = cc.k();
  std::vector<double> y(k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) y[i] += cc.trans(i, j) * x[j];
  return y;
}

// solve (I - D_inv P) y = b by Gaussian elimination with partial pivoting
std::vector<double> solve_inv_block(const Cocycle& cc, std::vector<double> b) {
  int k = cc.k();
  std::vector<double> M(size_t(k) * k, 0.0);
  for (int i = 0; i < k; ++i) M[size_t(i) * k + i] = 1.0;
  for (int i : cc.inv())
    for (int j = 0; j < k; ++j) M[size_t(i) * k + j] -= cc.trans(i, j);
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::fabs(M[size_t(r) * k + col]) > std::fabs(M[size_t(piv) * k + col])) piv = r;
    if (piv != col) {
      for (int j = 0; j < k; ++j) std::swap(M[size_t(col) * k + j], M[size_t(piv) * k + j]);
      std::swap(b[col], b[piv]);
    }
    double d = M[size_t(col) * k + col];
    for (int r = col + 1; r < k; ++r) {
      double f = M[size_t(r) * k + col] / d;
      if (f == 0) continue;
      for (int j = col; j < k; ++j) M[size_t(r) * k + j] -= f * M[size_t(col) * k + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> y(k);
  for (int r = k - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < k; ++j) s -= M[size_t(r) * k + j] * y[j];
    y[r] = s / M[size_t(r) * k + r];
  }
  return y;
}
}  // namespace

std::vector<double> markov_covered_mass(const Cocycle& cc, int N) {
  int k = cc.k();
  std::vector<double> x(k, 0.0);
  for (int s : cc.sing()) x[s] = cc.weight(s);
  std::vector<double> covered(k, 0.0);
  // stratum n contributes P (D_inv P)^(n-1) D_sing q
  for (int n = 1; n <= N; ++n) {
    std::vector<double> stratum = full_step(cc, x);
    for (int j = 0; j < k; ++j) covered[j] += stratum[j];
    x = inv_step(cc, x);
  }
  return covered;
}

std::vector<double> markov_mass_deficit(const Cocycle& cc, int N) {
  int k = cc.k();
  std::vector<double> x(k, 0.0);
  for (int s : cc.sing()) x[s] = cc.weight(s);
  for (int n = 0; n < N; ++n) x = inv_step(cc, x);
  std::vector<double> y = solve_inv_block(cc, x);
  return full_step(cc, y);
}

// ---- near-kernel arcs ----------------------------------------------------------------

std::vector<Arc> near_kernel_arcs(const Cocycle& cc, double eps, double* total_len) {
  double min_smax = std::numeric_limits<double>::infinity();
  for (int s : cc.sing()) min_smax = std::min(min_smax, cc.info(s).smax);
  if (!(eps > 0 && eps < min_smax))
    throw Error(Errc::domain_error, "eps must lie in (0, min singular smax)");

  // ||A_i v(theta)|| = smax_i |sin(theta - theta_kernel)|, so each arc is
  // centered at the kernel with half-width asin(eps / smax_i).
  std::vector<Arc> raw;
  for (int s : cc.sing()) {
    double half = std::asin(std::min(1.0, eps / cc.info(s).smax));
    double c = cc.info(s).kernel.theta;
    double lo = c - half, hi = c + half;
    if (lo < 0) {
      raw.push_back({lo + kPi, kPi});
      raw.push_back({0, hi});
    } else if (hi > kPi) {
      raw.push_back({lo, kPi});
      raw.push_back({0, hi - kPi});
    } else {
      raw.push_back({lo, hi});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
  std::vector<Arc> merged;
  for (const Arc& a : raw) {
    if (!merged.empty() && a.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, a.hi);
    else
      merged.push_back(a);
  }
  // circular wrap: last touching first through pi ~ 0
  if (merged.size() > 1 && merged.back().hi >= kPi && merged.front().lo <= 0) {
    merged.front().lo = merged.back().lo - kPi;
    merged.pop_back();
  }
  if (total_len) {
    double len = 0;
    for (const Arc& a : merged) len += a.length();
    *total_len = len;
  }
  return merged;
}

}  // namespace cocylab
