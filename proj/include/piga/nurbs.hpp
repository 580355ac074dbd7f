#ifndef PIGA_NURBS_HPP
#define PIGA_NURBS_HPP

#include "piga/knots.hpp"
#include "piga/types.hpp"

#include <vector>

namespace piga {

/// Weighted control net of a tensor-product NURBS surface. Grids are
/// n x m with n matching the u knot vector and m the v knot vector.
struct ControlNet {
  Mat x, y, w;

  int nu() const { return static_cast<int>(x.rows()); }
  int nv() const { return static_cast<int>(x.cols()); }
  void validate() const;
};

/// One tensor-product NURBS patch mapping [0,1]^2 into the plane (meters).
struct NurbsSurfacePatch {
  KnotVector knots_u;
  KnotVector knots_v;
  ControlNet net;

  NurbsSurfacePatch(KnotVector ku, KnotVector kv, ControlNet n);

  int degree_u() const { return knots_u.degree(); }
  int degree_v() const { return knots_v.degree(); }
  int num_basis() const { return net.nu() * net.nv(); }
  /// Global index of control point (i,j), i running fastest along u.
  int global_index(int i, int j) const { return i + net.nu() * j; }
};

enum class EdgeId { u0, u1, v0, v1 };

/// Rational basis values and parametric derivatives of the active functions
/// at one parameter point. Derivative columns follow the multi-index order
///   (0,0) | (1,0) (0,1) | (2,0) (1,1) (0,2) | (3,0) (2,1) (1,2) (0,3)
/// truncated at the requested order.
struct BasisBlock {
  Eigen::VectorXi active;
  Mat der; // n_active x n_columns(order)
  int order;

  Vec values() const { return der.col(0); }
};

/// Geometry map evaluation: physical point, Jacobian, second and (optionally)
/// third parametric derivatives of the map.
struct GeometryFrame {
  Vec2 x;
  Mat2 J;      // dx/dxi, column k = d(x,y)/dxi_k
  Mat H;       // 2 x 3: rows (x,y), cols (uu, uv, vv)
  Mat T;       // 2 x 4: rows (x,y), cols (uuu, uuv, uvv, vvv); zero if order < 3
  double detJ;
};

/// Physical derivatives of the active basis functions at one point, up to
/// second order always and third order when requested (needed by the
/// interface flux terms).
struct PhysicalBasis {
  Eigen::VectorXi active;
  Vec N, Nx, Ny, Nxx, Nyy, Nxy;
  Vec Nxxx, Nxxy, Nxyy, Nyyy;
  int order;
};

int num_derivative_columns(int order);

BasisBlock rational_basis_2d(const NurbsSurfacePatch& patch, const Vec2& xi, int order = 2);
GeometryFrame geometry_map(const NurbsSurfacePatch& patch, const Vec2& xi, int order = 2);
GeometryFrame geometry_map(const NurbsSurfacePatch& patch, const BasisBlock& basis);
PhysicalBasis physical_plate_derivatives(const NurbsSurfacePatch& patch, const Vec2& xi, int order = 2);

/// Geometry-preserving knot insertion, per direction.
NurbsSurfacePatch h_refine(const NurbsSurfacePatch& patch,
                           const std::vector<double>& new_knots_u,
                           const std::vector<double>& new_knots_v);

/// Split every span in both directions `levels` times.
NurbsSurfacePatch h_refine_uniform(const NurbsSurfacePatch& patch, int levels);

/// Geometry-preserving degree elevation by one in both directions.
NurbsSurfacePatch p_elevate(const NurbsSurfacePatch& patch);

/// Map an edge coordinate s in [0,1] to the 2D parameter point on the edge.
Vec2 edge_param(EdgeId edge, double s);
/// Parametric direction running along the edge (0 = u, 1 = v).
int edge_running_dir(EdgeId edge);
/// Outward parametric normal of the edge.
Vec2 edge_outward_param_normal(EdgeId edge);
const KnotVector& edge_knots(const NurbsSurfacePatch& patch, EdgeId edge);

/// Invert the geometry map at a physical point by damped Newton iteration.
/// Returns true and the parameter point on success (tolerance 1e-10 in
/// parameter space, 50 iterations, multi-start on a coarse seed grid).
bool locate_point(const NurbsSurfacePatch& patch, const Vec2& x_phys, Vec2& xi_out);

/// Convenience factories.
NurbsSurfacePatch make_bilinear_patch(const Vec2& p00, const Vec2& p10,
                                      const Vec2& p01, const Vec2& p11,
                                      int degree = 1);
NurbsSurfacePatch make_rectangle_patch(double x0, double y0, double x1, double y1,
                                       int degree = 1);
/// Quarter annulus r in [r0,r1], 90 degrees, exact conic representation.
NurbsSurfacePatch make_quarter_annulus(double r0, double r1);

} // namespace piga

#endif
