#include "linalg2.hpp"

#include <string>

namespace cocylab {

const char* mat_class_name(MatClass c) {
  switch (c) {
    case MatClass::Rank0: return "Rank0";
    case MatClass::Rank1: return "Rank1";
    case MatClass::InvPos: return "InvPos";
    case MatClass::InvNeg: return "InvNeg";
  }
  return "?";
}

double Mat2::smax() const {
  double q = std::hypot(0.5 * (a + d), 0.5 * (c - b));
  double r = std::hypot(0.5 * (a - d), 0.5 * (c + b));
  return q + r;
}

double Mat2::smin() const {
  double q = std::hypot(0.5 * (a + d), 0.5 * (c - b));
  double r = std::hypot(0.5 * (a - d), 0.5 * (c + b));
  return std::fabs(q - r);
}

ProjPoint ProjPoint::from_angle(double t) {
  if (!std::isfinite(t)) throw Error(Errc::domain_error, "non-finite angle");
  double u = std::fmod(t, kPi);
  if (u < 0) u += kPi;
  if (u >= kPi) u -= kPi;
  if (u == 0.0) u = 0.0;  // normalize -0
  return ProjPoint{u};
}

ProjPoint ProjPoint::from_vector(Vec2 v) {
  if (!(std::isfinite(v.x) && std::isfinite(v.y)))
    throw Error(Errc::domain_error, "non-finite vector");
  if (v.x == 0.0 && v.y == 0.0)
    throw Error(Errc::domain_error, "zero vector has no projective class");
  return from_angle(std::atan2(v.y, v.x));
}

double proj_dist(ProjPoint x, ProjPoint y) {
  double d = std::fabs(x.theta - y.theta);
  return std::min(d, kPi - d);
}

MatClass classify(const Mat2& m, double rank_tol) {
  if (!m.finite()) throw Error(Errc::invalid_matrix, "matrix has non-finite entries");
  if (!(rank_tol > 0)) throw Error(Errc::domain_error, "rank_tol must be positive");
  double nrm = m.frobenius();
  if (nrm <= rank_tol) return MatClass::Rank0;
  double det = m.det();
  if (det > rank_tol * nrm * nrm) return MatClass::InvPos;
  if (det < -rank_tol * nrm * nrm) return MatClass::InvNeg;
  return MatClass::Rank1;
}

RangeKernel range_kernel(const Mat2& m, double rank_tol) {
  if (classify(m, rank_tol) != MatClass::Rank1)
    throw Error(Errc::rank_error, "range_kernel requires a rank-one matrix");
  // Top right-singular direction from the eigenvector of M^T M.
  double p = m.a * m.a + m.c * m.c;
  double s = m.b * m.b + m.d * m.d;
  double r = m.a * m.b + m.c * m.d;
  double phi = 0.5 * std::atan2(2.0 * r, p - s);
  ProjPoint vmax = ProjPoint::from_angle(phi);
  ProjPoint kernel = ProjPoint::from_angle(phi + 0.5 * kPi);
  ProjPoint range = ProjPoint::from_vector(m.apply(vmax.unit()));
  return RangeKernel{range, kernel};
}

ProjPoint projective_action(const Mat2& m, ProjPoint x, double rank_tol) {
  switch (classify(m, rank_tol)) {
    case MatClass::Rank0:
      throw Error(Errc::zero_matrix, "projective action of the zero matrix is undefined");
    case MatClass::Rank1:
      return range_kernel(m, rank_tol).range;
    default:
      return ProjPoint::from_vector(m.apply(x.unit()));
  }
}

NormalizedImage apply_normalized(const Mat2& m, ProjPoint x, double rank_tol) {
  MatClass cls = classify(m, rank_tol);
  if (cls == MatClass::Rank0)
    throw Error(Errc::zero_matrix, "apply_normalized requires a nonzero matrix");
  Vec2 w = m.apply(x.unit());
  double nw = w.norm();
  if (cls == MatClass::Rank1) {
    ProjPoint img = range_kernel(m, rank_tol).range;
    return {img, nw == 0.0 ? kNegInf : std::log(nw)};
  }
  return {ProjPoint::from_vector(w), std::log(nw)};
}

}  // namespace cocylab
