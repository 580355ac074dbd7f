#include "piga/knots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace piga {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  if (degree_ < 1) throw std::invalid_argument("knot vector: degree must be >= 1");
  const int m = static_cast<int>(knots_.size());
  if (m < 2 * (degree_ + 1))
    throw std::invalid_argument("knot vector: too few knots for degree");
  for (int i = 1; i < m; ++i)
    if (knots_[i] < knots_[i - 1])
      throw std::invalid_argument("knot vector: not non-decreasing");

  const double a = knots_.front();
  const double b = knots_.back();
  if (!(b > a)) throw std::invalid_argument("knot vector: zero parameter range");
  if (a != 0.0 || b != 1.0) {
    for (double& k : knots_) k = (k - a) / (b - a);
    knots_.front() = 0.0;
    knots_.back() = 1.0;
  }

  for (int i = 0; i <= degree_; ++i) {
    if (knots_[i] != knots_.front() || knots_[m - 1 - i] != knots_.back())
      throw std::invalid_argument("knot vector: not open (clamped)");
  }
  if (count() < degree_ + 1)
    throw std::invalid_argument("knot vector: fewer than degree+1 basis functions");
  // Interior multiplicity above the degree would make the basis discontinuous.
  for (int i = degree_ + 1; i < m - degree_ - 1; ++i) {
    int mult = 1;
    while (i + mult < m && knots_[i + mult] == knots_[i]) ++mult;
    if (mult > degree_)
      throw std::invalid_argument("knot vector: interior multiplicity exceeds degree");
    i += mult - 1;
  }
}

int KnotVector::find_span(double u) const {
  if (u < 0.0 || u > 1.0) throw std::domain_error("find_span: parameter outside [0,1]");
  const int n = count();
  if (u >= knots_[n]) return n - 1; // right-end convention
  if (u <= knots_[degree_]) return degree_;
  int lo = degree_, hi = n;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (u < knots_[mid] ? hi : lo) = mid;
  }
  return lo;
}

Mat KnotVector::basis_derivs(double u, int max_order) const {
  if (max_order < 0) throw std::invalid_argument("basis_derivs: negative order");
  if (max_order > 3) throw std::invalid_argument("basis_derivs: unsupported order (max 3)");
  const int p = degree_;
  const int span = find_span(u);

  // Algorithm A2.3 from Piegl & Tiller, zero-denominator terms defined as 0.
  Mat ndu = Mat::Zero(p + 1, p + 1);
  Vec left = Vec::Zero(p + 1), right = Vec::Zero(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - knots_[span + 1 - j];
    right[j] = knots_[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(j, r) > 0.0 ? ndu(r, j - 1) / ndu(j, r) : 0.0;
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  const int nd = std::min(max_order, p);
  Mat ders = Mat::Zero(max_order + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  Mat a = Mat::Zero(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = ndu(pk + 1, rk) > 0.0 ? a(s1, 0) / ndu(pk + 1, rk) : 0.0;
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = r - 1 <= pk ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = ndu(pk + 1, rk + j) > 0.0
                       ? (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j)
                       : 0.0;
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = ndu(pk + 1, r) > 0.0 ? -a(s1, k - 1) / ndu(pk + 1, r) : 0.0;
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= nd; ++k) {
    ders.row(k) *= fac;
    fac *= (p - k);
  }
  return ders;
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> out;
  for (double k : knots_)
    if (out.empty() || k > out.back() + 1e-14) out.push_back(k);
  return out;
}

int KnotVector::multiplicity(double u) const {
  int m = 0;
  for (double k : knots_)
    if (std::abs(k - u) < 1e-12) ++m;
  return m;
}

KnotVector KnotVector::with_inserted(const std::vector<double>& extra) const {
  std::vector<double> merged = knots_;
  for (double u : extra) {
    if (u <= 0.0 || u >= 1.0)
      throw std::invalid_argument("knot insertion: value must be interior to (0,1)");
    merged.insert(std::upper_bound(merged.begin(), merged.end(), u), u);
  }
  return KnotVector(degree_, merged);
}

} // namespace piga
