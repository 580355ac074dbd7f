#include <doctest.h>

#include "piga/nurbs.hpp"

#include <cmath>
#include <random>

using namespace piga;

namespace {

KnotVector random_open_knots(int degree, int spans, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  std::vector<double> interior(spans - 1);
  double acc = 0;
  std::vector<double> gaps(spans);
  for (double& g : gaps) {
    g = uni(rng);
    acc += g;
  }
  double run = 0;
  for (int i = 0; i < spans - 1; ++i) {
    run += gaps[i];
    interior[i] = run / acc;
  }
  std::vector<double> knots;
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  for (double k : interior) knots.push_back(k);
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
  return KnotVector(degree, knots);
}

NurbsSurfacePatch random_weighted_patch(std::mt19937& rng, int degree = 2) {
  std::uniform_real_distribution<double> jitter(-0.08, 0.08);
  std::uniform_real_distribution<double> wdist(0.5, 2.0);
  KnotVector ku = random_open_knots(degree, 3, rng);
  KnotVector kv = random_open_knots(degree, 2, rng);
  const int n = ku.count(), m = kv.count();
  ControlNet net;
  net.x.resize(n, m);
  net.y.resize(n, m);
  net.w.resize(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      net.x(i, j) = static_cast<double>(i) / (n - 1) + jitter(rng);
      net.y(i, j) = static_cast<double>(j) / (m - 1) + jitter(rng);
      net.w(i, j) = wdist(rng);
    }
  return NurbsSurfacePatch(ku, kv, net);
}

} // namespace

TEST_CASE("find_span basics") {
  KnotVector kv(2, {0, 0, 0, 1, 1, 1});
  CHECK(kv.find_span(0.5) == 2);
  CHECK(kv.find_span(1.0) == 2); // right-end convention: last non-empty span

  KnotVector kv2(2, {0, 0, 0, 0.5, 1, 1, 1});
  CHECK(kv2.find_span(0.75) == 3);
  CHECK(kv2.find_span(1.0) == 3);
  CHECK(kv2.find_span(0.0) == 2);

  CHECK_THROWS_AS(kv.find_span(-0.1), std::domain_error);
  CHECK_THROWS_AS(kv.find_span(1.1), std::domain_error);
}

TEST_CASE("basis values: single-span quadratic") {
  KnotVector kv(2, {0, 0, 0, 1, 1, 1});
  Mat d = kv.basis_derivs(0.5, 0);
  CHECK(d(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(d(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d(0, 2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS(kv.basis_derivs(0.5, 4));
}

TEST_CASE("partition of unity and derivative sums") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int p : {2, 3}) {
    KnotVector kv = random_open_knots(p, 5, rng);
    for (int s = 0; s < 40; ++s) {
      const double u = uni(rng);
      Mat d = kv.basis_derivs(u, 2);
      CHECK(std::abs(d.row(0).sum() - 1.0) < 1e-12);
      CHECK(std::abs(d.row(1).sum()) < 1e-10);
      CHECK(std::abs(d.row(2).sum()) < 1e-8);
    }
  }
}

TEST_CASE("1d derivatives match central finite differences") {
  std::mt19937 rng(7);
  KnotVector kv = random_open_knots(3, 4, rng);
  const double h = 1e-6;
  auto eval = [&](double u, int k) {
    return kv.basis_derivs(u, k);
  };
  int checked = 0;
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  for (int s = 0; s < 100; ++s) {
    double u = s == 0 ? 0.37 : uni(rng);
    // keep away from breakpoints so the stencil stays inside one span
    bool near_break = false;
    for (double b : kv.breakpoints())
      if (std::abs(u - b) < 10 * h) near_break = true;
    if (near_break) continue;
    Mat d0 = eval(u, 2);
    Mat dm = eval(u - h, 1);
    Mat dp = eval(u + h, 1);
    for (int i = 0; i <= kv.degree(); ++i) {
      const double fd1 = (dp(0, i) - dm(0, i)) / (2 * h);
      if (std::abs(d0(1, i)) > 1e-8)
        CHECK(std::abs(fd1 - d0(1, i)) / std::abs(d0(1, i)) < 1e-5);
      const double fd2 = (dp(1, i) - dm(1, i)) / (2 * h);
      if (std::abs(d0(2, i)) > 1e-6)
        CHECK(std::abs(fd2 - d0(2, i)) / std::abs(d0(2, i)) < 1e-5);
    }
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("rational 2d basis: equal weights reduce to tensor b-splines") {
  std::mt19937 rng(3);
  NurbsSurfacePatch patch = random_weighted_patch(rng);
  patch.net.w.setConstant(1.7); // equal weights cancel in the quotient
  BasisBlock bb = rational_basis_2d(patch, Vec2(0.3, 0.6), 2);
  const KnotVector& ku = patch.knots_u;
  const KnotVector& kv = patch.knots_v;
  Mat du = ku.basis_derivs(0.3, 0);
  Mat dv = kv.basis_derivs(0.6, 0);
  int idx = 0;
  for (int j = 0; j <= kv.degree(); ++j)
    for (int i = 0; i <= ku.degree(); ++i) {
      CHECK(bb.der(idx, 0) == doctest::Approx(du(0, i) * dv(0, j)).epsilon(1e-13));
      ++idx;
    }
}

TEST_CASE("rational 2d basis: partition of unity and derivative sums") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    NurbsSurfacePatch patch = random_weighted_patch(rng, rep % 2 == 0 ? 2 : 3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int s = 0; s < 10; ++s) {
      Vec2 xi(uni(rng), uni(rng));
      BasisBlock bb = rational_basis_2d(patch, xi, 2);
      CHECK(std::abs(bb.der.col(0).sum() - 1.0) < 1e-12);
      for (int c = 1; c < 6; ++c) CHECK(std::abs(bb.der.col(c).sum()) < 1e-9);
    }
  }
}

TEST_CASE("rational second and third derivatives match finite differences") {
  std::mt19937 rng(19);
  NurbsSurfacePatch patch = random_weighted_patch(rng, 3);
  const double h = 1e-5;
  Vec2 xi(0.413, 0.377);
  BasisBlock b0 = rational_basis_2d(patch, xi, 3);
  BasisBlock bxp = rational_basis_2d(patch, xi + Vec2(h, 0), 2);
  BasisBlock bxm = rational_basis_2d(patch, xi - Vec2(h, 0), 2);
  BasisBlock byp = rational_basis_2d(patch, xi + Vec2(0, h), 2);
  BasisBlock bym = rational_basis_2d(patch, xi - Vec2(0, h), 2);

  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
  };
  for (int k = 0; k < b0.der.rows(); ++k) {
    // d2N/du2 vs FD of dN/du
    CHECK(rel((bxp.der(k, 1) - bxm.der(k, 1)) / (2 * h), b0.der(k, 3)) < 1e-5);
    // d2N/dudv vs FD of dN/du in v
    CHECK(rel((byp.der(k, 1) - bym.der(k, 1)) / (2 * h), b0.der(k, 4)) < 1e-5);
    // third derivatives vs FD of second
    CHECK(rel((bxp.der(k, 3) - bxm.der(k, 3)) / (2 * h), b0.der(k, 6)) < 1e-4);
    CHECK(rel((byp.der(k, 3) - bym.der(k, 3)) / (2 * h), b0.der(k, 7)) < 1e-4);
    CHECK(rel((byp.der(k, 4) - bym.der(k, 4)) / (2 * h), b0.der(k, 8)) < 1e-4);
    CHECK(rel((byp.der(k, 5) - bym.der(k, 5)) / (2 * h), b0.der(k, 9)) < 1e-4);
  }
}

TEST_CASE("geometry map: affine patch and translation invariance") {
  const double a = 3.0, b = 2.0;
  NurbsSurfacePatch patch = make_rectangle_patch(0, 0, a, b, 2);
  GeometryFrame f = geometry_map(patch, Vec2(0.25, 0.75));
  CHECK(f.x[0] == doctest::Approx(a * 0.25).epsilon(1e-14));
  CHECK(f.x[1] == doctest::Approx(b * 0.75).epsilon(1e-14));
  CHECK(f.J(0, 0) == doctest::Approx(a).epsilon(1e-13));
  CHECK(f.J(1, 1) == doctest::Approx(b).epsilon(1e-13));
  CHECK(std::abs(f.J(0, 1)) < 1e-13);
  CHECK(f.H.cwiseAbs().maxCoeff() < 1e-10);

  NurbsSurfacePatch moved = patch;
  moved.net.x.array() += 5.0;
  moved.net.y.array() -= 2.0;
  GeometryFrame g = geometry_map(moved, Vec2(0.25, 0.75));
  CHECK((g.J - f.J).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((g.H - f.H).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("quarter annulus boundary lies on exact circles") {
  NurbsSurfacePatch patch = make_quarter_annulus(1.0, 2.0);
  for (int k = 0; k <= 20; ++k) {
    const double s = k / 20.0;
    GeometryFrame fin = geometry_map(patch, Vec2(0.0, s));
    GeometryFrame fout = geometry_map(patch, Vec2(1.0, s));
    CHECK(std::abs(fin.x.norm() - 1.0) < 1e-12);
    CHECK(std::abs(fout.x.norm() - 2.0) < 1e-12);
  }
}

TEST_CASE("physical derivatives: affine scaling and sum identities") {
  const double a = 4.0;
  NurbsSurfacePatch patch = make_rectangle_patch(0, 0, a, a, 2);
  Vec2 xi(0.4, 0.3);
  PhysicalBasis pb = physical_plate_derivatives(patch, xi);
  BasisBlock bb = rational_basis_2d(patch, xi, 2);
  for (int k = 0; k < pb.N.size(); ++k) {
    CHECK(pb.Nxx[k] == doctest::Approx(bb.der(k, 3) / (a * a)).epsilon(1e-12));
    CHECK(pb.Nxy[k] == doctest::Approx(bb.der(k, 4) / (a * a)).epsilon(1e-12));
  }
  CHECK(std::abs(pb.Nx.sum()) < 1e-12);
  CHECK(std::abs(pb.Nxx.sum()) < 1e-10);
}

TEST_CASE("physical derivatives on curved patch match physical finite differences") {
  NurbsSurfacePatch patch = make_quarter_annulus(1.0, 2.0);
  Vec2 xi(0.43, 0.36);
  PhysicalBasis pb = physical_plate_derivatives(patch, xi, 3);
  GeometryFrame f = geometry_map(patch, xi);

  // displace in physical space, re-locate parameters, finite-difference N
  const double h = 1e-5;
  auto value_at = [&](const Vec2& xp) {
    Vec2 xiq;
    REQUIRE(locate_point(patch, xp, xiq));
    PhysicalBasis q = physical_plate_derivatives(patch, xiq);
    return q;
  };
  PhysicalBasis qxp = value_at(f.x + Vec2(h, 0));
  PhysicalBasis qxm = value_at(f.x - Vec2(h, 0));
  PhysicalBasis qyp = value_at(f.x + Vec2(0, h));
  PhysicalBasis qym = value_at(f.x - Vec2(0, h));
  for (int k = 0; k < pb.N.size(); ++k) {
    const double ref = std::max(1.0, std::abs(pb.Nxy[k]));
    const double fd_xy = (qyp.Nx[k] - qym.Nx[k]) / (2 * h);
    CHECK(std::abs(fd_xy - pb.Nxy[k]) / ref < 1e-4);
    const double fd_xx = (qxp.Nx[k] - qxm.Nx[k]) / (2 * h);
    CHECK(std::abs(fd_xx - pb.Nxx[k]) / std::max(1.0, std::abs(pb.Nxx[k])) < 1e-4);
    // third derivatives against FD of second
    const double fd_xxx = (qxp.Nxx[k] - qxm.Nxx[k]) / (2 * h);
    CHECK(std::abs(fd_xxx - pb.Nxxx[k]) / std::max(1.0, std::abs(pb.Nxxx[k])) < 1e-3);
    const double fd_yyy = (qyp.Nyy[k] - qym.Nyy[k]) / (2 * h);
    CHECK(std::abs(fd_yyy - pb.Nyyy[k]) / std::max(1.0, std::abs(pb.Nyyy[k])) < 1e-3);
  }
}

TEST_CASE("h_refine preserves geometry and multiplies elements") {
  std::mt19937 rng(5);
  NurbsSurfacePatch patch = random_weighted_patch(rng);
  NurbsSurfacePatch fine = h_refine(patch, {0.5}, {});
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    Vec2 xi(uni(rng), uni(rng));
    GeometryFrame f0 = geometry_map(patch, xi);
    GeometryFrame f1 = geometry_map(fine, xi);
    CHECK((f0.x - f1.x).norm() < 1e-12);
  }

  NurbsSurfacePatch tri = h_refine_uniform(patch, 3);
  const int spans_u0 = static_cast<int>(patch.knots_u.breakpoints().size()) - 1;
  const int spans_u1 = static_cast<int>(tri.knots_u.breakpoints().size()) - 1;
  CHECK(spans_u1 == 8 * spans_u0);

  // inserting a knot degree-many times is allowed, one more is not
  NurbsSurfacePatch twice = h_refine(patch, {0.31, 0.31}, {});
  CHECK_THROWS(h_refine(twice, {0.31}, {}));
}

TEST_CASE("p_elevate preserves geometry") {
  NurbsSurfacePatch sq = make_rectangle_patch(0, 0, 1, 2, 1);
  NurbsSurfacePatch el = p_elevate(sq);
  CHECK(el.degree_u() == 2);
  CHECK(el.degree_v() == 2);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    Vec2 xi(uni(rng), uni(rng));
    CHECK((geometry_map(sq, xi).x - geometry_map(el, xi).x).norm() < 1e-12);
    BasisBlock bb = rational_basis_2d(el, xi, 2);
    CHECK(std::abs(bb.der.col(0).sum() - 1.0) < 1e-12);
  }

  // multi-span weighted patch
  NurbsSurfacePatch ann = h_refine(make_quarter_annulus(1.0, 2.0), {0.5}, {0.3, 0.7});
  NurbsSurfacePatch ann2 = p_elevate(ann);
  for (int s = 0; s < 20; ++s) {
    Vec2 xi(uni(rng), uni(rng));
    CHECK((geometry_map(ann, xi).x - geometry_map(ann2, xi).x).norm() < 1e-11);
  }
  for (int k = 0; k <= 20; ++k) {
    GeometryFrame fout = geometry_map(ann2, Vec2(1.0, k / 20.0));
    CHECK(std::abs(fout.x.norm() - 2.0) < 1e-10);
  }
}

TEST_CASE("locate_point inverts the geometry map") {
  NurbsSurfacePatch patch = make_quarter_annulus(1.0, 2.0);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  for (int s = 0; s < 10; ++s) {
    Vec2 xi(uni(rng), uni(rng));
    Vec2 x = geometry_map(patch, xi).x;
    Vec2 found;
    REQUIRE(locate_point(patch, x, found));
    CHECK((found - xi).norm() < 1e-8);
  }
}
