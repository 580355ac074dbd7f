#ifndef PIGA_QUADRATURE_HPP
#define PIGA_QUADRATURE_HPP

#include "piga/nurbs.hpp"
#include "piga/types.hpp"

#include <vector>

namespace piga {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Vec points;
  Vec weights;
};
const GaussRule& gauss_legendre(int n);

/// One quadrature point of an element rule; the weight already contains the
/// span measure and |det J|, so sums integrate over physical area.
struct QuadraturePoint {
  Vec2 xi;
  double weight;
  GeometryFrame frame;
};

struct ElementQuadrature {
  int span_u = 0, span_v = 0;
  std::vector<QuadraturePoint> points;
};

/// Tensor Gauss rule per non-empty knot span. Defaults to degree+1 points per
/// direction when orders are not given (0).
std::vector<ElementQuadrature> element_rule(const NurbsSurfacePatch& patch,
                                            int order_u = 0, int order_v = 0);

} // namespace piga

#endif
