#ifndef PIGA_KNOTS_HPP
#define PIGA_KNOTS_HPP

#include "piga/types.hpp"

#include <vector>

namespace piga {

/// Open (clamped) knot vector on [0,1] for a B-spline basis of given degree.
///
/// Invariants enforced at construction: non-decreasing, first and last knot
/// repeated degree+1 times, at least degree+1 basis functions, normalized so
/// the parameter domain is exactly [0,1] (inputs on other intervals are
/// rescaled).
class KnotVector {
public:
  KnotVector(int degree, std::vector<double> knots);

  int degree() const { return degree_; }
  /// Number of basis functions n = #knots - degree - 1.
  int count() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  int size() const { return static_cast<int>(knots_.size()); }
  double operator[](int i) const { return knots_[i]; }
  const std::vector<double>& values() const { return knots_; }

  /// Knot span index i with knots[i] <= u < knots[i+1]; u = 1 maps to the
  /// last non-empty span.
  int find_span(double u) const;

  /// Values and derivatives of the degree+1 nonzero functions at u.
  /// Row k holds d^k/du^k of functions (span-degree .. span), k = 0..max_order.
  /// Cox-de Boor with the 0/0 := 0 convention.
  Mat basis_derivs(double u, int max_order) const;

  /// Distinct knots (span breakpoints) including 0 and 1.
  std::vector<double> breakpoints() const;

  /// Multiplicity of a value within the interior (tolerance 1e-12).
  int multiplicity(double u) const;

  /// New knot vector with the given values inserted (each must be interior).
  KnotVector with_inserted(const std::vector<double>& extra) const;

private:
  int degree_;
  std::vector<double> knots_;
};

} // namespace piga

#endif
