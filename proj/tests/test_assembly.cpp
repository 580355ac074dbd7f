#include <doctest.h>

#include "piga/assembly.hpp"
#include "piga/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

using namespace piga;

namespace {

ElasticMaterial test_elastic() { return {100e6, 0.3, 1000.0, "test"}; }

LayerStack plain_stack(double t = 0.01) {
  LayerStack s;
  s.t_s = t;
  s.substrate = test_elastic();
  return s;
}

LayerStack bimorph_stack() {
  LayerStack s;
  s.t_s = 0.14e-3;
  s.t_p = 0.26e-3;
  s.substrate = elastic_material("brass");
  s.piezo = piezo_material("pzt-5a");
  return s;
}

// Square plate [0,a]^2 split by an interface line inclined 30 degrees to the
// y-axis through the centre, as two bilinear quads elevated to `degree`.
MultiPatchModel inclined_two_patch(double a, int degree, int refine) {
  const double t = std::tan(30.0 * pi / 180.0);
  const double x0 = a / 2 - t * a / 2, x1 = a / 2 + t * a / 2;
  MultiPatchModel m;
  NurbsSurfacePatch p1 =
      make_bilinear_patch(Vec2(0, 0), Vec2(x0, 0), Vec2(0, a), Vec2(x1, a), 1);
  NurbsSurfacePatch p2 =
      make_bilinear_patch(Vec2(x0, 0), Vec2(a, 0), Vec2(x1, a), Vec2(a, a), 1);
  for (int d = 1; d < degree; ++d) {
    p1 = p_elevate(p1);
    p2 = p_elevate(p2);
  }
  m.regions.push_back({h_refine_uniform(p1, refine), plain_stack(), -1});
  m.regions.push_back({h_refine_uniform(p2, refine), plain_stack(), -1});
  m.interfaces = detect_interfaces(m.regions);
  return m;
}

MultiPatchModel single_square(double a, int degree, int refine) {
  MultiPatchModel m;
  m.regions.push_back(
      {h_refine_uniform(make_rectangle_patch(0, 0, a, a, degree), refine), plain_stack(), -1});
  return m;
}

void simply_support_boundary(MultiPatchModel& m) {
  // every outer (non-interface) edge
  for (int p = 0; p < static_cast<int>(m.regions.size()); ++p)
    for (EdgeId e : {EdgeId::u0, EdgeId::u1, EdgeId::v0, EdgeId::v1}) {
      bool on_iface = false;
      for (const auto& f : m.interfaces)
        if ((f.a.patch == p && f.a.edge == e) || (f.b.patch == p && f.b.edge == e))
          on_iface = true;
      if (!on_iface) m.bcs.push_back({{p, e}, BcKind::simply_supported});
    }
}

} // namespace

TEST_CASE("element rule: counts, area additivity, curved area") {
  NurbsSurfacePatch sq = make_rectangle_patch(0, 0, 1, 1, 2);
  auto rule = element_rule(sq);
  REQUIRE(rule.size() == 1);
  CHECK(rule[0].points.size() == 9);
  double area = 0;
  for (const auto& qp : rule[0].points) area += qp.weight;
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));

  NurbsSurfacePatch ann = h_refine_uniform(make_quarter_annulus(1.0, 2.0), 4);
  double a2 = 0;
  for (const auto& eq : element_rule(ann))
    for (const auto& qp : eq.points) a2 += qp.weight;
  CHECK(a2 == doctest::Approx(3.0 * pi / 4.0).epsilon(1e-10));

  // refinement leaves the total measure unchanged
  NurbsSurfacePatch fine = h_refine_uniform(sq, 2);
  double a3 = 0;
  for (const auto& eq : element_rule(fine))
    for (const auto& qp : eq.points) a3 += qp.weight;
  CHECK(a3 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mass matrix: audit, symmetry, point mass") {
  MultiPatchModel m;
  m.regions.push_back(
      {h_refine_uniform(make_rectangle_patch(0, 0, 0.4, 0.3, 2), 2), bimorph_stack(), -1});
  DofMap dofs = build_dofmap(m);
  SpMat M = assemble_mass(m, dofs);

  const LayupConstants lc = layup_constants(m.regions[0].stack);
  const double area = 0.4 * 0.3;
  const Vec r = Vec::Ones(dofs.total);
  const double mass = r.dot(M * r);
  CHECK(mass == doctest::Approx(lc.mass_trans * area).epsilon(1e-10));

  SpMat MT = SpMat(M.transpose());
  CHECK((Mat(M) - Mat(MT)).cwiseAbs().maxCoeff() < 1e-14 * Mat(M).cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Mat> es((Mat(M)));
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  m.attachments.push_back({AttachmentKind::point_mass, Vec2(0.13, 0.21), 0.012});
  SpMat M2 = assemble_mass(m, dofs);
  CHECK(r.dot(M2 * r) - mass == doctest::Approx(0.012).epsilon(1e-12));

  m.attachments[0].location = Vec2(5.0, 5.0);
  CHECK_THROWS(assemble_mass(m, dofs));
}

TEST_CASE("bulk stiffness: null space and symmetry") {
  MultiPatchModel m = single_square(2.0, 3, 2);
  DofMap dofs = build_dofmap(m);
  SpMat K = assemble_stiffness_bulk(m, dofs);

  const auto& net = m.regions[0].patch.net;
  Vec ones = Vec::Ones(dofs.total);
  Vec xf(dofs.total), yf(dofs.total);
  for (int j = 0; j < net.nv(); ++j)
    for (int i = 0; i < net.nu(); ++i) {
      xf[i + net.nu() * j] = net.x(i, j);
      yf[i + net.nu() * j] = net.y(i, j);
    }
  const double knorm = Mat(K).cwiseAbs().maxCoeff();
  CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-12 * knorm);
  // control-point coordinates are the spline coefficients of the linear field
  CHECK((K * xf).cwiseAbs().maxCoeff() < 1e-11 * knorm);
  CHECK((K * yf).cwiseAbs().maxCoeff() < 1e-11 * knorm);
  CHECK((Mat(K) - Mat(K).transpose()).cwiseAbs().maxCoeff() < 1e-12 * knorm);
}

TEST_CASE("loads: partition of unity and base-excitation audit") {
  MultiPatchModel m = single_square(2.0, 2, 2);
  DofMap dofs = build_dofmap(m);
  LoadSpec load;
  load.distributed = [](const Vec2&) { return -10.0; };
  Vec F = assemble_load(m, dofs, load);
  const Vec r = Vec::Ones(dofs.total);
  CHECK(r.dot(F) == doctest::Approx(-10.0 * 4.0).epsilon(1e-12));

  SpMat M = assemble_mass(m, dofs);
  Vec Fb = M * r;
  CHECK(r.dot(Fb) == doctest::Approx(layup_constants(m.regions[0].stack).mass_trans * 4.0)
                         .epsilon(1e-10));

  // additivity
  LoadSpec l1, l2;
  l1.distributed = [](const Vec2& x) { return x[0]; };
  l2.distributed = [](const Vec2& x) { return 3.0 - x[0]; };
  LoadSpec sum;
  sum.distributed = [](const Vec2& x) { return 3.0; };
  Vec Fs = assemble_load(m, dofs, l1) + assemble_load(m, dofs, l2) -
           assemble_load(m, dofs, sum);
  CHECK(Fs.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constraint counting for supported and clamped plates") {
  MultiPatchModel m = single_square(1.0, 2, 3); // 10x10 control net
  const int n = m.regions[0].patch.net.nu();
  const int mm = m.regions[0].patch.net.nv();
  for (EdgeId e : {EdgeId::u0, EdgeId::u1, EdgeId::v0, EdgeId::v1})
    m.bcs.push_back({{0, e}, BcKind::simply_supported});
  DofMap dofs = build_dofmap(m);
  CHECK(dofs.total - static_cast<int>(constrained_dofs(m, dofs).size()) ==
        n * mm - 2 * n - 2 * mm + 4);

  for (auto& bc : m.bcs) bc.kind = BcKind::clamped;
  CHECK(dofs.total - static_cast<int>(constrained_dofs(m, dofs).size()) ==
        n * mm - 4 * n - 4 * mm + 16);
}

TEST_CASE("navier static: single patch center deflection") {
  const double a = 10.0, q0 = -10.0;
  MultiPatchModel m = single_square(a, 3, 4); // 16x16 elements
  simply_support_boundary(m);
  LoadSpec load;
  load.distributed = [&](const Vec2& x) {
    return q0 * std::sin(pi * x[0] / a) * std::sin(pi * x[1] / a);
  };
  GlobalSystem sys = assemble_system(m, {}, &load);
  ReducedSystem red = apply_constraints(sys, m);
  Vec w = red.expand(solve_static(red.K, red.F_ext));

  const double D0 = 100e6 * 1e-6 / (12.0 * (1 - 0.09));
  const double exact = q0 / (pi * pi * pi * pi * D0 * std::pow(2.0 / (a * a), 2));
  CHECK(exact == doctest::Approx(-28.03).epsilon(2e-4));

  Vec obs_full = Vec::Zero(sys.dofs.total);
  PhysicalBasis pb;
  {
    Vec2 xi;
    int p;
    REQUIRE(locate_in_model(m, Vec2(a / 2, a / 2), p, xi));
    pb = physical_plate_derivatives(m.regions[p].patch, xi, 2);
    for (int i = 0; i < pb.N.size(); ++i) obs_full[pb.active[i]] = pb.N[i];
  }
  const double w_center = obs_full.dot(w);
  CHECK(w_center == doctest::Approx(exact).epsilon(5e-3));

  // linearity
  Vec w2 = red.expand(solve_static(red.K, Vec(2.0 * red.F_ext)));
  CHECK((w2 - 2.0 * w).cwiseAbs().maxCoeff() < 1e-12 * w.cwiseAbs().maxCoeff());
}

TEST_CASE("interface segments: conforming counts and arc lengths") {
  std::vector<PatchRegion> regions;
  regions.push_back(
      {h_refine_uniform(make_rectangle_patch(0, 0, 5, 10, 2), 2), plain_stack(), -1});
  regions.push_back(
      {h_refine_uniform(make_rectangle_patch(5, 0, 10, 10, 2), 2), plain_stack(), -1});
  auto ifaces = detect_interfaces(regions);
  REQUIRE(ifaces.size() == 1);
  auto segs = interface_segments(ifaces[0], regions);
  CHECK(segs.size() == 4);
  double len = 0;
  for (const auto& s : segs) len += s.arc_length;
  CHECK(len == doctest::Approx(10.0).epsilon(1e-12));

  // non-conforming 3 vs 5 spans
  std::vector<PatchRegion> nc;
  NurbsSurfacePatch left = make_rectangle_patch(0, 0, 5, 10, 2);
  left = h_refine(left, {}, {1.0 / 3.0, 2.0 / 3.0});
  NurbsSurfacePatch right = make_rectangle_patch(5, 0, 10, 10, 2);
  right = h_refine(right, {}, {0.15, 0.4, 0.6, 0.85});
  nc.push_back({left, plain_stack(), -1});
  nc.push_back({right, plain_stack(), -1});
  auto nifaces = detect_interfaces(nc);
  REQUIRE(nifaces.size() == 1);
  CHECK(!nifaces[0].conforming);
  auto nsegs = interface_segments(nifaces[0], nc);
  CHECK(nsegs.size() <= 7);
  CHECK(nsegs.size() >= 6);
  double nlen = 0;
  for (const auto& s : nsegs) nlen += s.arc_length;
  CHECK(nlen == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("nitsche patch test: quadratic fields are reproduced exactly") {
  for (int degree : {2, 3}) {
    MultiPatchModel m = inclined_two_patch(4.0, degree, 2);
    REQUIRE(m.interfaces.size() == 1);
    DofMap dofs = build_dofmap(m);
    GlobalSystem sys = assemble_system(m);

    // exact quadratic field, projected per patch by least squares
    auto phi = [](const Vec2& x) {
      return 1.0 + 0.5 * x[0] + 0.2 * x[1] + 0.3 * x[0] * x[0] + 0.25 * x[0] * x[1] +
             0.4 * x[1] * x[1];
    };
    Vec c_exact = Vec::Zero(dofs.total);
    for (int p = 0; p < 2; ++p) {
      const NurbsSurfacePatch& patch = m.regions[p].patch;
      const int nb = patch.num_basis();
      Mat A = Mat::Zero(nb, nb);
      Vec b = Vec::Zero(nb);
      for (const auto& eq : element_rule(patch))
        for (const auto& qp : eq.points) {
          BasisBlock bb = rational_basis_2d(patch, qp.xi, 0);
          for (int i = 0; i < bb.active.size(); ++i) {
            b[bb.active[i]] += qp.weight * bb.der(i, 0) * phi(qp.frame.x);
            for (int j = 0; j < bb.active.size(); ++j)
              A(bb.active[i], bb.active[j]) += qp.weight * bb.der(i, 0) * bb.der(j, 0);
          }
        }
      c_exact.segment(dofs.offsets[p], nb) = A.llt().solve(b);
    }

    // fix the outer boundary (two control rows) at the exact values, solve the rest
    std::vector<bool> fixed(dofs.total, false);
    for (int p = 0; p < 2; ++p) {
      const auto& net = m.regions[p].patch.net;
      for (EdgeId e : {EdgeId::u0, EdgeId::u1, EdgeId::v0, EdgeId::v1}) {
        bool on_iface = false;
        for (const auto& f : m.interfaces)
          if ((f.a.patch == p && f.a.edge == e) || (f.b.patch == p && f.b.edge == e))
            on_iface = true;
        if (on_iface) continue;
        for (int j = 0; j < net.nv(); ++j)
          for (int i = 0; i < net.nu(); ++i) {
            const bool row0 = (e == EdgeId::u0 && i <= 1) || (e == EdgeId::u1 && i >= net.nu() - 2) ||
                              (e == EdgeId::v0 && j <= 1) || (e == EdgeId::v1 && j >= net.nv() - 2);
            if (row0) fixed[dofs.dof(p, i + net.nu() * j)] = true;
          }
      }
    }
    std::vector<int> free_ids;
    for (int i = 0; i < dofs.total; ++i)
      if (!fixed[i]) free_ids.push_back(i);

    Mat Kd(sys.K);
    Mat Kff(free_ids.size(), free_ids.size());
    Vec rhs = Vec::Zero(free_ids.size());
    for (size_t a = 0; a < free_ids.size(); ++a) {
      double acc = 0;
      for (int j = 0; j < dofs.total; ++j)
        if (fixed[j]) acc -= Kd(free_ids[a], j) * c_exact[j];
      rhs[a] = acc;
      for (size_t b = 0; b < free_ids.size(); ++b) Kff(a, b) = Kd(free_ids[a], free_ids[b]);
    }
    Vec wf = Kff.ldlt().solve(rhs);
    double err = 0, ref = 0;
    for (size_t a = 0; a < free_ids.size(); ++a) {
      err = std::max(err, std::abs(wf[a] - c_exact[free_ids[a]]));
      ref = std::max(ref, std::abs(c_exact[free_ids[a]]));
    }
    CHECK(err / ref < 1e-8);
  }
}

TEST_CASE("nitsche rigid modes: exactly three near-zero eigenvalues") {
  MultiPatchModel m = inclined_two_patch(4.0, 2, 1);
  GlobalSystem sys = assemble_system(m);
  Mat K(sys.K);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-12 * K.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  int near_zero = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) < 1e-8 * scale) ++near_zero;
  CHECK(near_zero == 3);
}

TEST_CASE("nitsche convergence: two-patch solution approaches the navier field") {
  const double a = 10.0, q0 = -10.0;
  const double D0 = 100e6 * 1e-6 / (12.0 * 0.91);
  auto l2_error = [&](const MultiPatchModel& m, const Vec& w, const DofMap& dofs) {
    double num = 0, den = 0;
    for (int p = 0; p < static_cast<int>(m.regions.size()); ++p)
      for (const auto& eq : element_rule(m.regions[p].patch, 4, 4))
        for (const auto& qp : eq.points) {
          BasisBlock bb = rational_basis_2d(m.regions[p].patch, qp.xi, 0);
          double wh = 0;
          for (int i = 0; i < bb.active.size(); ++i)
            wh += bb.der(i, 0) * w[dofs.dof(p, bb.active[i])];
          const double we = q0 / (pi * pi * pi * pi * D0 * std::pow(2.0 / (a * a), 2)) *
                            std::sin(pi * qp.frame.x[0] / a) *
                            std::sin(pi * qp.frame.x[1] / a);
          num += qp.weight * (wh - we) * (wh - we);
          den += qp.weight * we * we;
        }
    return std::sqrt(num / den);
  };

  double prev = 1e300;
  for (int refine : {2, 3}) {
    MultiPatchModel m = inclined_two_patch(a, 2, refine);
    simply_support_boundary(m);
    LoadSpec load;
    load.distributed = [&](const Vec2& x) {
      return q0 * std::sin(pi * x[0] / a) * std::sin(pi * x[1] / a);
    };
    GlobalSystem sys = assemble_system(m, {}, &load);
    ReducedSystem red = apply_constraints(sys, m);
    Vec w = red.expand(solve_static(red.K, red.F_ext));
    const double err = l2_error(m, w, sys.dofs);
    CHECK(err < prev * 0.35); // at least second-order drop per bisection
    prev = err;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("nitsche coupling: electrode additivity across a split") {
  // one bimorph rectangle split into two conforming patches, same circuit
  auto build = [&](bool split, bool two_circuits) {
    MultiPatchModel m;
    if (split) {
      m.regions.push_back(
          {h_refine_uniform(make_rectangle_patch(0, 0, 0.025, 0.02, 2), 2), bimorph_stack(), 0});
      m.regions.push_back({h_refine_uniform(make_rectangle_patch(0.025, 0, 0.05, 0.02, 2), 2),
                           bimorph_stack(), two_circuits ? 1 : 0});
      m.interfaces = detect_interfaces(m.regions);
    } else {
      m.regions.push_back(
          {h_refine_uniform(make_rectangle_patch(0, 0, 0.05, 0.02, 2), 2), bimorph_stack(), 0});
    }
    if (two_circuits) {
      m.circuits.push_back({0, {0}, CircuitKind::resistor, 1e4, 0, 0});
      m.circuits.push_back({1, {1}, CircuitKind::resistor, 1e4, 0, 0});
    } else {
      std::vector<int> members;
      for (int p = 0; p < static_cast<int>(m.regions.size()); ++p) members.push_back(p);
      m.circuits.push_back({0, members, CircuitKind::resistor, 1e4, 0, 0});
    }
    return m;
  };

  MultiPatchModel one = build(true, false);
  GlobalSystem sys_one = assemble_system(one);
  MultiPatchModel two = build(true, true);
  GlobalSystem sys_two = assemble_system(two);
  REQUIRE(sys_one.Theta.size() == 1);
  REQUIRE(sys_two.Theta.size() == 2);
  CHECK((sys_two.Theta[0] + sys_two.Theta[1] - sys_one.Theta[0]).cwiseAbs().maxCoeff() <
        1e-12 * sys_one.Theta[0].cwiseAbs().maxCoeff());

  // rigid translation produces no charge
  CHECK(std::abs(sys_one.Theta[0].dot(Vec::Ones(sys_one.dofs.total))) <
        1e-12 * sys_one.Theta[0].cwiseAbs().sum());

  // zero coupling constants kill the vector
  MultiPatchModel inert = build(false, false);
  inert.regions[0].stack.piezo->e31 = 0;
  inert.regions[0].stack.piezo->e32 = 0;
  GlobalSystem sys_inert = assemble_system(inert);
  CHECK(sys_inert.Theta[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("capacitance: resonator value, scaling, wiring") {
  auto build = [&](double Lp, double W, Wiring wiring) {
    MultiPatchModel m;
    LayerStack s;
    s.t_s = 0.330e-3;
    s.t_p = 0.045e-3;
    s.substrate = elastic_material("khattak-substrate");
    s.piezo = piezo_material("pzt-5a");
    s.connection = wiring;
    m.regions.push_back({make_rectangle_patch(0, 0, Lp, W, 2), s, 0});
    m.circuits.push_back({0, {0}, CircuitKind::resistor, 1e4, 0, 0});
    return m;
  };
  MultiPatchModel m = build(0.010, 0.003, Wiring::series);
  auto cp = compute_capacitance(m, {0});
  REQUIRE(cp.size() == 1);
  // series plate formula: eps33 A / (2 t_p) = 3.19 nF, within 2% of the
  // printed 3.23 nF (nF-corrected) value
  CHECK(cp[0] == doctest::Approx(3.19e-9).epsilon(0.002));
  CHECK(std::abs(cp[0] - 3.23e-9) / 3.23e-9 < 0.02);

  auto cp2 = compute_capacitance(build(0.020, 0.003, Wiring::series), {0});
  CHECK(cp2[0] == doctest::Approx(2 * cp[0]).epsilon(1e-12));
  auto cpp = compute_capacitance(build(0.010, 0.003, Wiring::parallel), {0});
  CHECK(cpp[0] == doctest::Approx(4 * cp[0]).epsilon(1e-12));
}

TEST_CASE("matrix export round trip") {
  MultiPatchModel m = single_square(1.0, 2, 1);
  GlobalSystem sys = assemble_system(m);
  export_matrix(sys.K, "/tmp/piga_K.txt");
  std::ifstream in("/tmp/piga_K.txt");
  int r, c;
  long nnz;
  in >> r >> c >> nnz;
  CHECK(r == sys.dofs.total);
  CHECK(nnz == sys.K.nonZeros());
}
