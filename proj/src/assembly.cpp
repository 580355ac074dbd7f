#include "piga/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace piga {

DofMap build_dofmap(const MultiPatchModel& model) {
  DofMap map;
  map.offsets.resize(model.regions.size());
  int acc = 0;
  for (size_t i = 0; i < model.regions.size(); ++i) {
    map.offsets[i] = acc;
    acc += model.regions[i].patch.num_basis();
  }
  map.total = acc;
  return map;
}

namespace {

double model_diagonal(const std::vector<PatchRegion>& regions) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : regions) {
    xmin = std::min(xmin, r.patch.net.x.minCoeff());
    xmax = std::max(xmax, r.patch.net.x.maxCoeff());
    ymin = std::min(ymin, r.patch.net.y.minCoeff());
    ymax = std::max(ymax, r.patch.net.y.maxCoeff());
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

Vec2 edge_phys(const NurbsSurfacePatch& p, EdgeId e, double s) {
  return geometry_map(p, edge_param(e, s)).x;
}

// Bulk quadrature sweep; fn(patch_id, qp, basis) is called at every point.
template <typename F>
void for_each_bulk_point(const MultiPatchModel& model, const AssemblyOptions& opt, F&& fn) {
  for (size_t p = 0; p < model.regions.size(); ++p) {
    const NurbsSurfacePatch& patch = model.regions[p].patch;
    const int nu = patch.degree_u() + 1 + opt.quad_extra;
    const int nv = patch.degree_v() + 1 + opt.quad_extra;
    for (const ElementQuadrature& eq : element_rule(patch, nu, nv))
      for (const QuadraturePoint& qp : eq.points) {
        PhysicalBasis pb = physical_plate_derivatives(patch, qp.xi, 2);
        fn(static_cast<int>(p), qp, pb);
      }
  }
}

Mat bending_rows(const PhysicalBasis& pb) {
  const int na = static_cast<int>(pb.N.size());
  Mat B(3, na);
  B.row(0) = -pb.Nxx.transpose();
  B.row(1) = -pb.Nyy.transpose();
  B.row(2) = -2.0 * pb.Nxy.transpose();
  return B;
}

void scatter(std::vector<Triplet>& trips, const Eigen::VectorXi& act_r,
             const Eigen::VectorXi& act_c, int off_r, int off_c, const Mat& block) {
  for (int j = 0; j < block.cols(); ++j)
    for (int i = 0; i < block.rows(); ++i)
      if (block(i, j) != 0.0)
        trips.emplace_back(off_r + act_r[i], off_c + act_c[j], block(i, j));
}

} // namespace

SpMat assemble_mass(const MultiPatchModel& model, const DofMap& dofs,
                    const AssemblyOptions& opt) {
  std::vector<Triplet> trips;
  std::vector<LayupConstants> lc;
  for (const auto& r : model.regions) lc.push_back(layup_constants(r.stack));

  for_each_bulk_point(model, opt, [&](int p, const QuadraturePoint& qp,
                                      const PhysicalBasis& pb) {
    const double w = qp.weight;
    Mat block = w * lc[p].mass_trans * (pb.N * pb.N.transpose());
    block.noalias() += w * lc[p].mass_rot *
                       (pb.Nx * pb.Nx.transpose() + pb.Ny * pb.Ny.transpose());
    scatter(trips, pb.active, pb.active, dofs.offsets[p], dofs.offsets[p], block);
  });

  // Point masses: translational inertia only.
  for (const PointAttachment& at : model.attachments) {
    if (at.kind != AttachmentKind::point_mass) continue;
    int p = -1;
    Vec2 xi;
    if (!locate_in_model(model, at.location, p, xi))
      throw std::runtime_error("assemble_mass: point mass outside the domain");
    PhysicalBasis pb = physical_plate_derivatives(model.regions[p].patch, xi, 2);
    Mat block = at.value * (pb.N * pb.N.transpose());
    scatter(trips, pb.active, pb.active, dofs.offsets[p], dofs.offsets[p], block);
  }

  SpMat M(dofs.total, dofs.total);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

SpMat assemble_stiffness_bulk(const MultiPatchModel& model, const DofMap& dofs,
                              const AssemblyOptions& opt) {
  std::vector<Triplet> trips;
  std::vector<LayupConstants> lc;
  for (const auto& r : model.regions) lc.push_back(layup_constants(r.stack));

  for_each_bulk_point(model, opt, [&](int p, const QuadraturePoint& qp,
                                      const PhysicalBasis& pb) {
    const Mat B = bending_rows(pb);
    Mat block = qp.weight * (B.transpose() * lc[p].D * B);
    scatter(trips, pb.active, pb.active, dofs.offsets[p], dofs.offsets[p], block);
  });

  SpMat K(dofs.total, dofs.total);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

std::vector<InterfaceSegment> interface_segments(const InterfaceSpec& spec,
                                                 const std::vector<PatchRegion>& regions) {
  const NurbsSurfacePatch& A = regions[spec.a.patch].patch;
  const NurbsSurfacePatch& B = regions[spec.b.patch].patch;
  const double diag = model_diagonal(regions);

  std::set<double> cuts;
  cuts.insert(spec.span_a.lo);
  cuts.insert(spec.span_a.hi);
  for (double s : edge_knots(A, spec.a.edge).breakpoints())
    if (s > spec.span_a.lo + 1e-12 && s < spec.span_a.hi - 1e-12) cuts.insert(s);
  for (double tau : edge_knots(B, spec.b.edge).breakpoints()) {
    if (tau < spec.span_b.lo - 1e-12 || tau > spec.span_b.hi + 1e-12) continue;
    const Vec2 x = edge_phys(B, spec.b.edge, tau);
    double s;
    const double d = project_to_edge(A, spec.a.edge, x, s);
    if (d < 1e-7 * diag && s > spec.span_a.lo + 1e-10 && s < spec.span_a.hi - 1e-10) {
      // snap to an existing cut if within tolerance
      bool dup = false;
      for (double c : cuts)
        if (std::abs(c - s) < 1e-10) dup = true;
      if (!dup) cuts.insert(s);
    }
  }

  std::vector<double> sc(cuts.begin(), cuts.end());
  std::vector<InterfaceSegment> out;
  const GaussRule& g5 = gauss_legendre(5);
  for (size_t k = 0; k + 1 < sc.size(); ++k) {
    InterfaceSegment seg;
    seg.a_lo = sc[k];
    seg.a_hi = sc[k + 1];
    if (seg.a_hi - seg.a_lo < 1e-12) continue;
    double tau;
    project_to_edge(B, spec.b.edge, edge_phys(A, spec.a.edge, seg.a_lo), tau);
    seg.b_lo = tau;
    project_to_edge(B, spec.b.edge, edge_phys(A, spec.a.edge, seg.a_hi), tau);
    seg.b_hi = tau;
    double len = 0.0;
    const int run = edge_running_dir(spec.a.edge);
    for (int q = 0; q < 5; ++q) {
      const double s = 0.5 * (seg.a_lo + seg.a_hi) + 0.5 * (seg.a_hi - seg.a_lo) * g5.points[q];
      const GeometryFrame f = geometry_map(A, edge_param(spec.a.edge, s));
      len += 0.5 * (seg.a_hi - seg.a_lo) * g5.weights[q] * f.J.col(run).norm();
    }
    seg.arc_length = len;
    out.push_back(seg);
  }
  return out;
}

namespace {

// Everything needed from one side of an interface at one quadrature point.
struct SideEval {
  Eigen::VectorXi active;
  Vec N;
  Mat G;    // 2 x na gradient rows
  Mat Fm;   // 2 x na moment-flux vectors T(D B_k)
  Vec qn;   // na shear-flux values Q(N_k) . n
  Vec2 Te;  // moment flux of the electrical moment, T(c_theta e)
  int circuit = -1;
  int dof_offset = 0;
  double sigma = 1.0;
  double gw = 0.5;
  // literal-print coupling pieces
  Vec lit_theta; // na
};

SideEval eval_side(const PatchRegion& region, EdgeId edge, double par, const Vec2& n,
                   double sigma, double gw, int dof_offset, const LayupConstants& lc,
                   bool paper_literal) {
  SideEval se;
  const PhysicalBasis pb = physical_plate_derivatives(region.patch, edge_param(edge, par), 3);
  const int na = static_cast<int>(pb.N.size());
  se.active = pb.active;
  se.N = pb.N;
  se.G.resize(2, na);
  se.G.row(0) = pb.Nx.transpose();
  se.G.row(1) = pb.Ny.transpose();

  Mat B(3, na), Bx(3, na), By(3, na);
  B.row(0) = -pb.Nxx.transpose();
  B.row(1) = -pb.Nyy.transpose();
  B.row(2) = -2.0 * pb.Nxy.transpose();
  Bx.row(0) = -pb.Nxxx.transpose();
  Bx.row(1) = -pb.Nxyy.transpose();
  Bx.row(2) = -2.0 * pb.Nxxy.transpose();
  By.row(0) = -pb.Nxxy.transpose();
  By.row(1) = -pb.Nyyy.transpose();
  By.row(2) = -2.0 * pb.Nxyy.transpose();

  const Mat M = lc.D * B;   // rows (Mxx, Myy, Mxy) per function
  const Mat Mx = lc.D * Bx;
  const Mat My = lc.D * By;
  se.Fm.resize(2, na);
  se.Fm.row(0) = n[0] * M.row(0) + n[1] * M.row(2);
  se.Fm.row(1) = n[0] * M.row(2) + n[1] * M.row(1);
  se.qn = (n[0] * (Mx.row(0) + My.row(2)) + n[1] * (My.row(1) + Mx.row(2))).transpose();

  se.circuit = region.electrode;
  se.dof_offset = dof_offset;
  se.sigma = sigma;
  se.gw = gw;
  se.Te.setZero();
  se.lit_theta = Vec::Zero(na);
  if (region.electrode >= 0) {
    const Vec3 ebar = lc.coupling * lc.e;
    se.Te = Vec2(n[0] * ebar[0] + n[1] * ebar[2], n[0] * ebar[2] + n[1] * ebar[1]);
    if (paper_literal) {
      // printed contraction: (n4 e)^T B_I with the side's own outward normal
      const double nxo = sigma * n[0], nyo = sigma * n[1];
      se.lit_theta = lc.coupling * (nxo * lc.e[0] * B.row(0).transpose() +
                                    nyo * lc.e[1] * B.row(1).transpose());
    }
  }
  return se;
}

double transverse_element_size(const NurbsSurfacePatch& patch, EdgeId edge) {
  const int run = edge_running_dir(edge);
  const int trans = 1 - run;
  const KnotVector& kt = trans == 0 ? patch.knots_u : patch.knots_v;
  const auto bp = kt.breakpoints();
  double dxi;
  if (edge == EdgeId::u0 || edge == EdgeId::v0)
    dxi = bp[1] - bp[0];
  else
    dxi = bp[bp.size() - 1] - bp[bp.size() - 2];
  const GeometryFrame f = geometry_map(patch, edge_param(edge, 0.5));
  return dxi * f.J.col(trans).norm();
}

} // namespace

SpMat assemble_nitsche(const MultiPatchModel& model, const DofMap& dofs,
                       const AssemblyOptions& opt, std::vector<Vec>* theta_by_circuit,
                       const std::vector<int>* circuit_ids) {
  std::vector<Triplet> trips;
  std::vector<LayupConstants> lc;
  for (const auto& r : model.regions) lc.push_back(layup_constants(r.stack));
  const double diag = model_diagonal(model.regions);

  auto circuit_slot = [&](int circuit) -> Vec* {
    if (!theta_by_circuit || !circuit_ids || circuit < 0) return nullptr;
    for (size_t i = 0; i < circuit_ids->size(); ++i)
      if ((*circuit_ids)[i] == circuit) return &(*theta_by_circuit)[i];
    return nullptr;
  };

  for (size_t fidx = 0; fidx < model.interfaces.size(); ++fidx) {
    const InterfaceSpec& spec = model.interfaces[fidx];
    const PatchRegion& RA = model.regions[spec.a.patch];
    const PatchRegion& RB = model.regions[spec.b.patch];
    const LayupConstants& LA = lc[spec.a.patch];
    const LayupConstants& LB = lc[spec.b.patch];

    // transverse sizes measured at the actual interface edges
    auto emod = [](const PatchRegion& r) {
      double e = r.stack.substrate.E / (1.0 - r.stack.substrate.nu * r.stack.substrate.nu);
      if (r.stack.piezo) e = std::max(e, r.stack.piezo->c11);
      return e;
    };
    const double Ebar = std::max(emod(RA), emod(RB));
    const double Ibar = std::max(LA.I_s + LA.I_p_total, LB.I_s + LB.I_p_total);
    const double h = std::min(transverse_element_size(RA.patch, spec.a.edge),
                              transverse_element_size(RB.patch, spec.b.edge));
    const double alpha = opt.theta_pen * Ebar / h;
    const double s_r = alpha * Ibar;
    const double s_w = alpha * Ibar / (h * h);

    const int p_run_a = edge_knots(RA.patch, spec.a.edge).degree();
    const int p_run_b = edge_knots(RB.patch, spec.b.edge).degree();
    const int nq = std::max(p_run_a, p_run_b) + 2 + opt.quad_extra;
    const GaussRule& gr = gauss_legendre(nq);
    const int run_a = edge_running_dir(spec.a.edge);

    for (const InterfaceSegment& seg : interface_segments(spec, model.regions)) {
      for (int q = 0; q < nq; ++q) {
        const double s =
            0.5 * (seg.a_lo + seg.a_hi) + 0.5 * (seg.a_hi - seg.a_lo) * gr.points[q];
        const GeometryFrame fa = geometry_map(RA.patch, edge_param(spec.a.edge, s));
        const double wq = 0.5 * (seg.a_hi - seg.a_lo) * gr.weights[q] * fa.J.col(run_a).norm();

        // outward unit normal of side a
        const Vec2 npar = edge_outward_param_normal(spec.a.edge);
        Vec2 n = fa.J.inverse().transpose() * npar;
        n.normalize();

        double tau;
        const double d = project_to_edge(RB.patch, spec.b.edge, fa.x, tau);
        if (d > 1e-8 * diag) {
          std::ostringstream msg;
          msg << "assemble_nitsche: projection failure on interface " << fidx
              << " segment [" << seg.a_lo << ", " << seg.a_hi << "], gap " << d << " m";
          throw std::runtime_error(msg.str());
        }

        const SideEval sides[2] = {
            eval_side(RA, spec.a.edge, s, n, +1.0, opt.gamma, dofs.offsets[spec.a.patch],
                      LA, opt.paper_literal),
            eval_side(RB, spec.b.edge, tau, n, -1.0, 1.0 - opt.gamma,
                      dofs.offsets[spec.b.patch], LB, opt.paper_literal)};

        for (const SideEval& T : sides) {   // test side
          for (const SideEval& U : sides) { // trial side
            Mat block = (T.sigma * U.gw) * (T.G.transpose() * U.Fm - T.N * U.qn.transpose());
            block.noalias() +=
                (U.sigma * T.gw) * (T.Fm.transpose() * U.G - T.qn * U.N.transpose());
            block.noalias() += (T.sigma * U.sigma) *
                               (s_w * (T.N * U.N.transpose()) + s_r * (T.G.transpose() * U.G));
            block *= wq;
            scatter(trips, T.active, U.active, T.dof_offset, U.dof_offset, block);

            // interface part of the coupling vector: electrical moment of the
            // trial side against the test-side jump
            if (U.circuit >= 0) {
              if (Vec* th = circuit_slot(U.circuit)) {
                if (!opt.paper_literal) {
                  const Vec contrib = wq * T.sigma * U.gw * (T.G.transpose() * U.Te);
                  for (int i = 0; i < contrib.size(); ++i)
                    (*th)[T.dof_offset + T.active[i]] += contrib[i];
                }
              }
            }
          }
          if (opt.paper_literal && T.circuit >= 0) {
            if (Vec* th = circuit_slot(T.circuit)) {
              for (int i = 0; i < T.lit_theta.size(); ++i)
                (*th)[T.dof_offset + T.active[i]] += wq * T.lit_theta[i];
            }
          }
        }
      }
    }
  }

  SpMat Kn(dofs.total, dofs.total);
  Kn.setFromTriplets(trips.begin(), trips.end());
  return Kn;
}

std::vector<Vec> assemble_coupling(const MultiPatchModel& model, const DofMap& dofs,
                                   const std::vector<int>& circuit_ids,
                                   const AssemblyOptions& opt) {
  std::vector<Vec> theta(circuit_ids.size(), Vec::Zero(dofs.total));
  std::vector<LayupConstants> lc;
  for (const auto& r : model.regions) lc.push_back(layup_constants(r.stack));

  auto slot = [&](int circuit) -> Vec* {
    for (size_t i = 0; i < circuit_ids.size(); ++i)
      if (circuit_ids[i] == circuit) return &theta[i];
    return nullptr;
  };

  for_each_bulk_point(model, opt, [&](int p, const QuadraturePoint& qp,
                                      const PhysicalBasis& pb) {
    const int circuit = model.regions[p].electrode;
    if (circuit < 0) return;
    Vec* th = slot(circuit);
    if (!th) return;
    const Mat B = bending_rows(pb);
    const Vec contrib = qp.weight * lc[p].coupling * (B.transpose() * lc[p].e);
    for (int i = 0; i < contrib.size(); ++i)
      (*th)[dofs.offsets[p] + pb.active[i]] += contrib[i];
  });
  return theta;
}

std::vector<double> compute_capacitance(const MultiPatchModel& model,
                                        const std::vector<int>& circuit_ids) {
  std::vector<double> cp(circuit_ids.size(), 0.0);
  for (size_t ci = 0; ci < circuit_ids.size(); ++ci) {
    for (const CircuitSpec& c : model.circuits) {
      if (c.id != circuit_ids[ci]) continue;
      for (int p : c.patches) {
        const PatchRegion& r = model.regions[p];
        if (!(r.stack.t_p > 0))
          throw std::runtime_error("compute_capacitance: electrode patch without piezo thickness");
        const LayupConstants lc = layup_constants(r.stack);
        double area = 0.0;
        for (const ElementQuadrature& eq : element_rule(r.patch))
          for (const QuadraturePoint& qp : eq.points) area += qp.weight;
        cp[ci] += lc.cap_per_area * area;
      }
    }
  }
  return cp;
}

Vec assemble_load(const MultiPatchModel& model, const DofMap& dofs, const LoadSpec& load,
                  const AssemblyOptions& opt) {
  Vec F = Vec::Zero(dofs.total);
  if (load.distributed) {
    for_each_bulk_point(model, opt, [&](int p, const QuadraturePoint& qp,
                                        const PhysicalBasis& pb) {
      const double q = load.distributed(qp.frame.x);
      for (int i = 0; i < pb.N.size(); ++i)
        F[dofs.offsets[p] + pb.active[i]] += qp.weight * q * pb.N[i];
    });
  }
  for (const auto& [x, f] : load.point_forces) {
    int p = -1;
    Vec2 xi;
    if (!locate_in_model(model, x, p, xi))
      throw std::runtime_error("assemble_load: point force outside the domain");
    PhysicalBasis pb = physical_plate_derivatives(model.regions[p].patch, xi, 2);
    for (int i = 0; i < pb.N.size(); ++i)
      F[dofs.offsets[p] + pb.active[i]] += f * pb.N[i];
  }
  // transverse point forces from the model's attachment list as well
  for (const PointAttachment& at : model.attachments) {
    if (at.kind != AttachmentKind::point_force) continue;
    int p = -1;
    Vec2 xi;
    if (!locate_in_model(model, at.location, p, xi))
      throw std::runtime_error("assemble_load: point force outside the domain");
    PhysicalBasis pb = physical_plate_derivatives(model.regions[p].patch, xi, 2);
    for (int i = 0; i < pb.N.size(); ++i)
      F[dofs.offsets[p] + pb.active[i]] += at.value * pb.N[i];
  }
  return F;
}

GlobalSystem assemble_system(const MultiPatchModel& model, const AssemblyOptions& opt,
                             const LoadSpec* load) {
  GlobalSystem sys;
  sys.dofs = build_dofmap(model);
  for (const CircuitSpec& c : model.circuits) sys.circuit_ids.push_back(c.id);

  sys.M = assemble_mass(model, sys.dofs, opt);
  sys.Theta = assemble_coupling(model, sys.dofs, sys.circuit_ids, opt);
  SpMat Kn = assemble_nitsche(model, sys.dofs, opt, &sys.Theta, &sys.circuit_ids);
  sys.K = assemble_stiffness_bulk(model, sys.dofs, opt) + Kn;
  sys.Cp = compute_capacitance(model, sys.circuit_ids);
  sys.C = model.damping.alpha * sys.M + model.damping.beta * sys.K;
  sys.F_base = sys.M * Vec::Ones(sys.dofs.total);
  sys.F_ext = load ? assemble_load(model, sys.dofs, *load, opt) : Vec::Zero(sys.dofs.total);
  return sys;
}

std::vector<int> constrained_dofs(const MultiPatchModel& model, const DofMap& dofs) {
  std::set<int> fixed;
  for (const BoundaryCondition& bc : model.bcs) {
    if (bc.kind == BcKind::free_edge) continue;
    const NurbsSurfacePatch& patch = model.regions[bc.target.patch].patch;
    const int nu = patch.net.nu(), nv = patch.net.nv();
    const int depth = bc.kind == BcKind::clamped ? 2 : 1;
    for (int d = 0; d < depth; ++d) {
      for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
          bool on = false;
          switch (bc.target.edge) {
            case EdgeId::u0: on = (i == d); break;
            case EdgeId::u1: on = (i == nu - 1 - d); break;
            case EdgeId::v0: on = (j == d); break;
            case EdgeId::v1: on = (j == nv - 1 - d); break;
          }
          if (on) fixed.insert(dofs.dof(bc.target.patch, i + nu * j));
        }
    }
  }
  return {fixed.begin(), fixed.end()};
}

namespace {

SpMat reduce_matrix(const SpMat& A, const std::vector<int>& newid, int n_keep) {
  std::vector<Triplet> trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = newid[it.row()], c = newid[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  SpMat R(n_keep, n_keep);
  R.setFromTriplets(trips.begin(), trips.end());
  return R;
}

} // namespace

Vec ReducedSystem::expand(const Vec& reduced) const {
  Vec full = Vec::Zero(full_size);
  for (size_t i = 0; i < keep.size(); ++i) full[keep[i]] = reduced[i];
  return full;
}

CVec ReducedSystem::expand(const CVec& reduced) const {
  CVec full = CVec::Zero(full_size);
  for (size_t i = 0; i < keep.size(); ++i) full[keep[i]] = reduced[i];
  return full;
}

Vec ReducedSystem::restrict_vec(const Vec& full) const {
  Vec r(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) r[i] = full[keep[i]];
  return r;
}

ReducedSystem apply_constraints(const GlobalSystem& sys, const MultiPatchModel& model) {
  const std::vector<int> fixed = constrained_dofs(model, sys.dofs);
  std::vector<int> newid(sys.dofs.total, -1);
  for (int f : fixed) newid[f] = -2;
  ReducedSystem red;
  red.full_size = sys.dofs.total;
  int next = 0;
  for (int i = 0; i < sys.dofs.total; ++i)
    if (newid[i] == -1) {
      newid[i] = next++;
      red.keep.push_back(i);
    } else {
      newid[i] = -1;
    }
  if (next == 0) throw std::runtime_error("apply_constraints: no free DOFs remain");

  red.M = reduce_matrix(sys.M, newid, next);
  red.K = reduce_matrix(sys.K, newid, next);
  red.C = reduce_matrix(sys.C, newid, next);
  red.circuit_ids = sys.circuit_ids;
  red.Cp = sys.Cp;
  for (const Vec& th : sys.Theta) red.Theta.push_back(red.restrict_vec(th));
  red.F_base = red.restrict_vec(sys.F_base);
  red.F_ext = red.restrict_vec(sys.F_ext);
  return red;
}

void export_matrix(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_matrix: cannot open " + path);
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", static_cast<int>(it.row()),
                    static_cast<int>(it.col()), it.value());
      out << buf;
    }
}

} // namespace piga
