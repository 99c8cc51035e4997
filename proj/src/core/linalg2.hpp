#pragma once

// Exact-size 2x2 linear algebra and the desingularized projective action.
// P^1 is represented by an angle in [0, pi); a rank-one matrix acts on P^1
// as the constant map onto its range, including at its own kernel.

#include <cmath>
#include <limits>

#include "error.hpp"

namespace cocylab {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kRankTolDefault = 1e-10;

struct Vec2 {
  double x = 0.0, y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator+(Vec2 u, Vec2 v) { return {u.x + v.x, u.y + v.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

// u_x v_y - u_y v_x
inline double wedge(Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; }

enum class MatClass { Rank0, Rank1, InvPos, InvNeg };

const char* mat_class_name(MatClass c);

// Row-major [[a,b],[c,d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 rotation(double t) {
    double co = std::cos(t), si = std::sin(t);
    return {co, -si, si, co};
  }
  static Mat2 diag(double u, double v) { return {u, 0, 0, v}; }

  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

  Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d,
            c * m.a + d * m.c, c * m.b + d * m.d};
  }
  Mat2 scaled(double s) const { return {s * a, s * b, s * c, s * d}; }

  double det() const { return a * d - b * c; }
  double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }
  bool finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
  }

  // Singular values via the closed form: s_max = q + r, s_min = |q - r|
  // with q = hypot((a+d)/2, (c-b)/2), r = hypot((a-d)/2, (c+b)/2).
  double smax() const;
  double smin() const;
};

struct ProjPoint {
  double theta = 0.0;  // canonical angle in [0, pi)

  static ProjPoint from_angle(double t);
  static ProjPoint from_vector(Vec2 v);  // requires v != 0
  Vec2 unit() const { return {std::cos(theta), std::sin(theta)}; }
};

// min(|t1-t2|, pi - |t1-t2|), at most pi/2
double proj_dist(ProjPoint x, ProjPoint y);

MatClass classify(const Mat2& m, double rank_tol = kRankTolDefault);

struct RangeKernel {
  ProjPoint range;   // left singular direction of s_max
  ProjPoint kernel;  // right singular direction of s_min
};

// Requires classify(m) == Rank1; RankError otherwise.
RangeKernel range_kernel(const Mat2& m, double rank_tol = kRankTolDefault);

// Invertible: direction of m*v. Rank-one: the range, for every input.
ProjPoint projective_action(const Mat2& m, ProjPoint x, double rank_tol = kRankTolDefault);

struct NormalizedImage {
  ProjPoint point;
  double log_norm;  // log||m v|| for the unit representative v; -inf when ||m v|| = 0
};

NormalizedImage apply_normalized(const Mat2& m, ProjPoint x, double rank_tol = kRankTolDefault);

}  // namespace cocylab
