#include "piga/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace piga {

namespace {

GaussRule compute_gauss(int n) {
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on the Legendre polynomial from the Chebyshev estimate.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.points[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

std::vector<ElementQuadrature> element_rule(const NurbsSurfacePatch& patch, int order_u,
                                            int order_v) {
  const int nu = order_u > 0 ? order_u : patch.degree_u() + 1;
  const int nv = order_v > 0 ? order_v : patch.degree_v() + 1;
  const GaussRule& gu = gauss_legendre(nu);
  const GaussRule& gv = gauss_legendre(nv);
  const auto bu = patch.knots_u.breakpoints();
  const auto bv = patch.knots_v.breakpoints();

  std::vector<ElementQuadrature> out;
  for (size_t sv = 0; sv + 1 < bv.size(); ++sv) {
    const double v0 = bv[sv], v1 = bv[sv + 1];
    if (v1 - v0 < 1e-14) continue;
    for (size_t su = 0; su + 1 < bu.size(); ++su) {
      const double u0 = bu[su], u1 = bu[su + 1];
      if (u1 - u0 < 1e-14) continue;
      ElementQuadrature eq;
      eq.span_u = static_cast<int>(su);
      eq.span_v = static_cast<int>(sv);
      eq.points.reserve(nu * nv);
      for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
          QuadraturePoint qp;
          qp.xi = Vec2(0.5 * (u0 + u1) + 0.5 * (u1 - u0) * gu.points[i],
                       0.5 * (v0 + v1) + 0.5 * (v1 - v0) * gv.points[j]);
          qp.frame = geometry_map(patch, qp.xi);
          qp.weight = gu.weights[i] * gv.weights[j] * 0.25 * (u1 - u0) * (v1 - v0) *
                      qp.frame.detJ;
          eq.points.push_back(std::move(qp));
        }
      out.push_back(std::move(eq));
    }
  }
  return out;
}

} // namespace piga
