#include "piga/model.hpp"

#include "piga/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace piga {

Mat3 plane_stress_elastic(const ElasticMaterial& mat) {
  Mat3 C;
  const double f = mat.E / (1.0 - mat.nu * mat.nu);
  C << 1.0, mat.nu, 0.0,
       mat.nu, 1.0, 0.0,
       0.0, 0.0, 0.5 * (1.0 - mat.nu);
  return f * C;
}

PiezoConstitutive piezo_constitutive(const PiezoMaterial& mat) {
  PiezoConstitutive out;
  out.C << mat.c11, mat.c12, 0.0,
           mat.c12, mat.c22, 0.0,
           0.0, 0.0, mat.c66;
  out.e = Vec3(mat.e31, mat.e32, 0.0);
  out.eps33 = mat.eps33;
  return out;
}

RayleighDamping fit_rayleigh(double w1, double z1, double w2, double z2) {
  // zeta_i = (alpha/w_i + beta*w_i) / 2
  Mat2 A;
  A << 1.0 / w1, w1, 1.0 / w2, w2;
  Vec2 rhs(2.0 * z1, 2.0 * z2);
  Vec2 sol = A.fullPivLu().solve(rhs);
  return {sol[0], sol[1]};
}

LayupConstants layup_constants(const LayerStack& stack) {
  LayupConstants c{};
  const int n_p = stack.piezo_layer_count();
  c.Cs = plane_stress_elastic(stack.substrate);
  c.Cp = Mat3::Zero();
  c.e = Vec3::Zero();

  const double ts = stack.t_s, tp = stack.t_p;
  double Ip_geom = 0.0;  // total piezo second moment about neutral axis
  double Is_geom = ts * ts * ts / 12.0;

  if (n_p == 2) {
    // Symmetric bimorph: neutral axis at the substrate midplane.
    c.z_bar = 0.0;
    const double per_layer = tp * tp * tp / 3.0 + tp * tp * ts / 2.0 + tp * ts * ts / 4.0;
    Ip_geom = 2.0 * per_layer;
  } else if (n_p == 1) {
    // Unimorph: transformed-section neutral axis, piezo above the substrate.
    const double Es = stack.substrate.E / (1.0 - stack.substrate.nu * stack.substrate.nu);
    const double Ep = stack.piezo->c11;
    const double zp = 0.5 * (ts + tp); // piezo-layer centroid
    c.z_bar = Ep * tp * zp / (Es * ts + Ep * tp);
    Is_geom = ts * ts * ts / 12.0 + ts * c.z_bar * c.z_bar;
    const double a = ts / 2.0 - c.z_bar, b = ts / 2.0 + tp - c.z_bar;
    Ip_geom = (b * b * b - a * a * a) / 3.0;
  }

  c.I_s = Is_geom;
  c.I_p_total = Ip_geom;
  c.mass_trans = stack.substrate.rho * ts + (n_p > 0 ? n_p * stack.piezo->rho * tp : 0.0);
  c.mass_rot = stack.substrate.rho * Is_geom +
               (n_p > 0 ? stack.piezo->rho * Ip_geom : 0.0);

  if (n_p > 0) {
    const PiezoConstitutive pc = piezo_constitutive(*stack.piezo);
    c.Cp = pc.C;
    c.e = pc.e;
    if (n_p == 2) {
      if (stack.connection == Wiring::series) {
        c.coupling = tp + ts;                     // as printed in the plate model
        c.cap_per_area = pc.eps33 / (2.0 * tp);
      } else {
        c.coupling = 2.0 * (tp + ts);
        c.cap_per_area = 2.0 * pc.eps33 / tp;
      }
    } else {
      const double zp = 0.5 * (ts + tp);
      c.coupling = zp - c.z_bar; // first moment of the layer / t_p
      c.cap_per_area = pc.eps33 / tp;
    }
  }
  c.D = Is_geom * c.Cs + Ip_geom * c.Cp;
  return c;
}

namespace {

Vec2 edge_point(const NurbsSurfacePatch& patch, EdgeId edge, double s) {
  return geometry_map(patch, edge_param(edge, s)).x;
}

Vec2 edge_tangent(const NurbsSurfacePatch& patch, EdgeId edge, double s) {
  const GeometryFrame f = geometry_map(patch, edge_param(edge, s));
  return f.J.col(edge_running_dir(edge));
}

double model_diag(const std::vector<PatchRegion>& regions) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : regions) {
    xmin = std::min(xmin, r.patch.net.x.minCoeff());
    xmax = std::max(xmax, r.patch.net.x.maxCoeff());
    ymin = std::min(ymin, r.patch.net.y.minCoeff());
    ymax = std::max(ymax, r.patch.net.y.maxCoeff());
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

} // namespace

double project_to_edge(const NurbsSurfacePatch& patch, EdgeId edge, const Vec2& x,
                       double& tau_out) {
  double best_d = 1e300, best_tau = 0.0;
  for (int seed = 0; seed <= 8; ++seed) {
    double tau = seed / 8.0;
    for (int it = 0; it < 60; ++it) {
      const Vec2 p = edge_point(patch, edge, tau);
      const Vec2 t = edge_tangent(patch, edge, tau);
      const double denom = t.squaredNorm();
      if (denom < 1e-30) break;
      double step = (x - p).dot(t) / denom;
      step = std::clamp(step, -0.2, 0.2);
      const double next = std::clamp(tau + step, 0.0, 1.0);
      if (std::abs(next - tau) < 1e-14) {
        tau = next;
        break;
      }
      tau = next;
    }
    const double d = (edge_point(patch, edge, tau) - x).norm();
    if (d < best_d) {
      best_d = d;
      best_tau = tau;
    }
  }
  tau_out = best_tau;
  return best_d;
}

std::vector<InterfaceSpec> detect_interfaces(const std::vector<PatchRegion>& regions,
                                             double tol) {
  const double diag = model_diag(regions);
  const double eps = tol * diag;
  const int n_samples = 33;
  const EdgeId edges[4] = {EdgeId::u0, EdgeId::u1, EdgeId::v0, EdgeId::v1};

  struct Claim {
    EdgeRef other;
    EdgeSpan span;
  };
  std::vector<InterfaceSpec> out;
  std::vector<std::pair<EdgeRef, std::vector<Claim>>> claims;

  auto claim_list = [&](const EdgeRef& e) -> std::vector<Claim>& {
    for (auto& c : claims)
      if (c.first == e) return c.second;
    claims.push_back({e, {}});
    return claims.back().second;
  };

  for (int pa = 0; pa < static_cast<int>(regions.size()); ++pa)
    for (int pb = pa + 1; pb < static_cast<int>(regions.size()); ++pb)
      for (EdgeId ea : edges)
        for (EdgeId eb : edges) {
          const NurbsSurfacePatch& A = regions[pa].patch;
          const NurbsSurfacePatch& B = regions[pb].patch;
          // sample edge a, project on edge b
          std::vector<bool> close(n_samples);
          std::vector<double> taus(n_samples);
          int n_close = 0;
          for (int k = 0; k < n_samples; ++k) {
            const double s = static_cast<double>(k) / (n_samples - 1);
            double tau;
            const double d = project_to_edge(B, eb, edge_point(A, ea, s), tau);
            close[k] = d < eps;
            taus[k] = tau;
            if (close[k]) ++n_close;
          }
          if (n_close < 2) continue;
          // contiguous overlap window in edge-a coordinates
          int k0 = 0;
          while (!close[k0]) ++k0;
          int k1 = n_samples - 1;
          while (!close[k1]) --k1;
          for (int k = k0; k <= k1; ++k)
            if (!close[k]) n_close = -1;
          if (n_close < 0) continue; // fragmented match: not a clean interface
          if (k1 - k0 < 1) continue;

          // refine interval endpoints by bisection
          auto dist_at = [&](double s) {
            double tau;
            return project_to_edge(B, eb, edge_point(A, ea, s), tau);
          };
          double s_lo = static_cast<double>(k0) / (n_samples - 1);
          if (k0 > 0) {
            double a = static_cast<double>(k0 - 1) / (n_samples - 1), b = s_lo;
            for (int it = 0; it < 40; ++it) {
              const double m = 0.5 * (a + b);
              (dist_at(m) < eps ? b : a) = m;
            }
            s_lo = b;
          }
          double s_hi = static_cast<double>(k1) / (n_samples - 1);
          if (k1 < n_samples - 1) {
            double a = s_hi, b = static_cast<double>(k1 + 1) / (n_samples - 1);
            for (int it = 0; it < 40; ++it) {
              const double m = 0.5 * (a + b);
              (dist_at(m) < eps ? a : b) = m;
            }
            s_hi = a;
          }
          if (s_hi - s_lo < 1e-6) continue;

          InterfaceSpec spec;
          spec.a = {pa, ea};
          spec.b = {pb, eb};
          spec.span_a = {s_lo, s_hi};
          double tau_lo, tau_hi;
          project_to_edge(B, eb, edge_point(A, ea, s_lo), tau_lo);
          project_to_edge(B, eb, edge_point(A, ea, s_hi), tau_hi);
          spec.span_b = {std::min(tau_lo, tau_hi), std::max(tau_lo, tau_hi)};

          // conforming when both sides use whole edges with coincident knot images
          bool conforming = false;
          if (s_lo < 1e-9 && s_hi > 1.0 - 1e-9 && spec.span_b.lo < 1e-9 &&
              spec.span_b.hi > 1.0 - 1e-9) {
            const auto ba = edge_knots(A, ea).breakpoints();
            const auto bb = edge_knots(B, eb).breakpoints();
            if (ba.size() == bb.size()) {
              conforming = true;
              for (size_t i = 0; i < ba.size(); ++i) {
                double tau;
                project_to_edge(B, eb, edge_point(A, ea, ba[i]), tau);
                const Vec2 xa = edge_point(A, ea, ba[i]);
                bool found = false;
                for (double bk : bb)
                  if ((edge_point(B, eb, bk) - xa).norm() < eps) found = true;
                if (!found) conforming = false;
              }
            }
          }
          spec.conforming = conforming;

          // ambiguity: same portion of either edge claimed twice
          for (const EdgeRef& side : {spec.a, spec.b}) {
            const EdgeSpan span = side == spec.a ? spec.span_a : spec.span_b;
            for (const Claim& cl : claim_list(side)) {
              const double overlap =
                  std::min(cl.span.hi, span.hi) - std::max(cl.span.lo, span.lo);
              if (overlap > 1e-6) {
                std::ostringstream msg;
                msg << "detect_interfaces: ambiguous match on patch " << side.patch
                    << " edge " << static_cast<int>(side.edge) << ": candidates patch "
                    << cl.other.patch << " and patch "
                    << (side == spec.a ? spec.b : spec.a).patch;
                throw std::runtime_error(msg.str());
              }
            }
            claim_list(side).push_back({side == spec.a ? spec.b : spec.a, span});
          }
          out.push_back(spec);
        }
  return out;
}

namespace {

bool spd3(const Mat3& A) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(A);
  return es.eigenvalues().minCoeff() > 0.0;
}

} // namespace

std::vector<std::string> validate_model(const MultiPatchModel& model) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& s) { bad.push_back(s); };

  if (model.regions.empty()) {
    fail("model has no patches");
    return bad;
  }

  for (size_t i = 0; i < model.regions.size(); ++i) {
    const PatchRegion& r = model.regions[i];
    const ElasticMaterial& s = r.stack.substrate;
    const std::string tag = "patch " + std::to_string(i) + ": ";
    if (!(s.E > 0)) fail(tag + "substrate E must be positive");
    if (!(s.nu > -1.0 && s.nu < 0.5)) fail(tag + "substrate nu outside (-1, 0.5)");
    if (!(s.rho > 0)) fail(tag + "substrate density must be positive");
    if (!(r.stack.t_s > 0)) fail(tag + "substrate thickness must be positive");
    if (r.stack.t_p < 0) fail(tag + "piezo thickness negative");
    if ((r.stack.t_p > 0) != r.stack.piezo.has_value())
      fail(tag + "piezo layer present iff t_p > 0");
    if (r.stack.piezo) {
      const PiezoMaterial& p = *r.stack.piezo;
      if (!(p.c11 > 0 && p.c22 > 0 && p.c66 > 0)) fail(tag + "piezo elastic constants must be positive");
      if (!(p.eps33 > 0)) fail(tag + "piezo permittivity must be positive");
      Mat2 blk;
      blk << p.c11, p.c12, p.c12, p.c22;
      if (Eigen::SelfAdjointEigenSolver<Mat2>(blk).eigenvalues().minCoeff() <= 0)
        fail(tag + "piezo elastic block not positive definite");
      if (!spd3(plane_stress_elastic(s))) fail(tag + "substrate constitutive not SPD");
    }
    if (r.electrode >= 0 && !r.stack.piezo) fail(tag + "electrode without piezo layer");
    // geometry injectivity at quadrature points
    try {
      for (const auto& eq : element_rule(r.patch))
        for (const auto& qp : eq.points)
          if (qp.frame.detJ <= 0) {
            fail(tag + "non-positive Jacobian at quadrature point");
            break;
          }
    } catch (const std::exception& e) {
      fail(tag + "geometry evaluation failed: " + e.what());
    }
  }

  const double diag = model_diag(model.regions);
  const int np = static_cast<int>(model.regions.size());
  for (size_t i = 0; i < model.interfaces.size(); ++i) {
    const InterfaceSpec& f = model.interfaces[i];
    const std::string tag = "interface " + std::to_string(i) + ": ";
    if (f.a.patch < 0 || f.a.patch >= np || f.b.patch < 0 || f.b.patch >= np) {
      fail(tag + "patch index out of range");
      continue;
    }
    const NurbsSurfacePatch& A = model.regions[f.a.patch].patch;
    const NurbsSurfacePatch& B = model.regions[f.b.patch].patch;
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k) {
      const double s = f.span_a.lo + (f.span_a.hi - f.span_a.lo) * k / 16.0;
      double tau;
      worst = std::max(worst, project_to_edge(B, f.b.edge, edge_point(A, f.a.edge, s), tau));
    }
    if (worst > 1e-9 * diag)
      fail(tag + "sides do not coincide (gap " + std::to_string(worst) + " m)");
  }

  // BC / interface exclusivity
  for (size_t i = 0; i < model.bcs.size(); ++i) {
    const BoundaryCondition& bc = model.bcs[i];
    if (bc.target.patch < 0 || bc.target.patch >= np) {
      fail("bc " + std::to_string(i) + ": patch index out of range");
      continue;
    }
    for (const InterfaceSpec& f : model.interfaces)
      if (f.a == bc.target || f.b == bc.target)
        fail("bc " + std::to_string(i) + ": edge also appears on an interface");
  }

  // interface graph connectivity
  if (np > 1) {
    std::vector<int> parent(np);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const InterfaceSpec& f : model.interfaces)
      if (f.a.patch >= 0 && f.a.patch < np && f.b.patch >= 0 && f.b.patch < np)
        parent[find(f.a.patch)] = find(f.b.patch);
    for (int i = 1; i < np; ++i)
      if (find(i) != find(0)) {
        fail("disconnected structure: patch " + std::to_string(i) +
             " not reachable through interfaces");
        break;
      }
  }

  // circuits
  for (const CircuitSpec& c : model.circuits) {
    const std::string tag = "circuit " + std::to_string(c.id) + ": ";
    if (c.patches.empty()) fail(tag + "no member patches");
    if ((c.kind == CircuitKind::resistor || c.kind == CircuitKind::shunt) && !(c.R_l > 0))
      fail(tag + "load resistance must be positive");
    if (c.kind == CircuitKind::shunt && !(c.L_k > 0) && !(c.omega_t > 0))
      fail(tag + "shunt needs an inductance or a target frequency");
    for (int p : c.patches) {
      if (p < 0 || p >= np) {
        fail(tag + "member patch out of range");
        continue;
      }
      if (model.regions[p].electrode != c.id)
        fail(tag + "member patch " + std::to_string(p) + " does not carry this electrode");
      if (!model.regions[p].stack.piezo)
        fail(tag + "electrode without piezo layer on patch " + std::to_string(p));
    }
  }
  for (int p = 0; p < np; ++p) {
    const int el = model.regions[p].electrode;
    if (el < 0) continue;
    bool found = false;
    for (const CircuitSpec& c : model.circuits)
      if (c.id == el)
        for (int q : c.patches)
          if (q == p) found = true;
    if (!found)
      fail("patch " + std::to_string(p) + ": electrode references missing circuit " +
           std::to_string(el));
  }

  for (size_t i = 0; i < model.attachments.size(); ++i) {
    int patch;
    Vec2 xi;
    if (!locate_in_model(model, model.attachments[i].location, patch, xi))
      fail("attachment " + std::to_string(i) + ": location not inside any patch");
  }

  if (model.damping.alpha < 0 || model.damping.beta < 0)
    fail("negative Rayleigh damping coefficient");

  return bad;
}

bool locate_in_model(const MultiPatchModel& model, const Vec2& x, int& patch_out,
                     Vec2& xi_out) {
  for (size_t i = 0; i < model.regions.size(); ++i) {
    const auto& net = model.regions[i].patch.net;
    const double m = 1e-9 + 0.05 * model_diag(model.regions);
    if (x[0] < net.x.minCoeff() - m || x[0] > net.x.maxCoeff() + m ||
        x[1] < net.y.minCoeff() - m || x[1] > net.y.maxCoeff() + m)
      continue;
    Vec2 xi;
    if (locate_point(model.regions[i].patch, x, xi)) {
      patch_out = static_cast<int>(i);
      xi_out = xi;
      return true;
    }
  }
  return false;
}

ElasticMaterial elastic_material(const std::string& name) {
  // Sources: aluminum per the metastructure host-beam data; brass and the
  // PZT-5A set per Erturk & Inman's bimorph experiments; steel and copper are
  // handbook values used by the variable-width and trapezoidal-hole devices.
  if (name == "aluminum") return {70e9, 0.3, 2700.0, name};
  if (name == "steel") return {200e9, 0.3, 7850.0, name};
  if (name == "copper") return {110e9, 0.34, 8960.0, name};
  if (name == "brass") return {105e9, 0.23, 9000.0, name};
  // Resonator substrate calibrated so the lumped stiffness round-trips to
  // k = 853.08 N/m with the effective cantilever mass convention.
  if (name == "khattak-substrate") return {725e9, 0.3, 7850.0, name};
  throw std::invalid_argument("unknown elastic material: " + name);
}

PiezoMaterial piezo_material(const std::string& name) {
  if (name == "pzt-5a")
    return {69.2e9, 24.3e9, 69.2e9, 22.6e9, -16.0, -16.0, 9.57e-9, 7800.0, name};
  if (name == "pzt-5h")
    return {66.2e9, 19.2e9, 66.2e9, 23.0e9, -23.4, -23.4, 1.503e-8, 7500.0, name};
  throw std::invalid_argument("unknown piezo material: " + name);
}

} // namespace piga
