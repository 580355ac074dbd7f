#include "piga/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace piga {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Column index of the parametric derivative d^(a+b)/du^a dv^b.
int der_col(int a, int b) {
  const int o = a + b;
  return o * (o + 1) / 2 + b;
}

} // namespace

int num_derivative_columns(int order) { return (order + 1) * (order + 2) / 2; }

void ControlNet::validate() const {
  if (x.rows() != y.rows() || x.rows() != w.rows() || x.cols() != y.cols() ||
      x.cols() != w.cols())
    throw std::invalid_argument("control net: mismatched grid dimensions");
  if (x.rows() < 2 || x.cols() < 2)
    throw std::invalid_argument("control net: grid must be at least 2x2");
  if ((w.array() <= 0.0).any())
    throw std::invalid_argument("control net: weights must be strictly positive");
}

NurbsSurfacePatch::NurbsSurfacePatch(KnotVector ku, KnotVector kv, ControlNet n)
    : knots_u(std::move(ku)), knots_v(std::move(kv)), net(std::move(n)) {
  net.validate();
  if (net.nu() != knots_u.count() || net.nv() != knots_v.count())
    throw std::invalid_argument("patch: control net does not match knot vectors");
}

BasisBlock rational_basis_2d(const NurbsSurfacePatch& patch, const Vec2& xi, int order) {
  if (order < 0 || order > 3)
    throw std::invalid_argument("rational_basis_2d: unsupported order");
  const KnotVector& ku = patch.knots_u;
  const KnotVector& kv = patch.knots_v;
  const int p = ku.degree(), q = kv.degree();
  const int span_u = ku.find_span(xi[0]);
  const int span_v = kv.find_span(xi[1]);
  const Mat du = ku.basis_derivs(xi[0], std::min(order, 3));
  const Mat dv = kv.basis_derivs(xi[1], std::min(order, 3));

  const int na = (p + 1) * (q + 1);
  const int ncol = num_derivative_columns(order);

  BasisBlock out;
  out.order = order;
  out.active.resize(na);
  Mat A(na, ncol);
  Vec W = Vec::Zero(ncol);

  int idx = 0;
  for (int j = 0; j <= q; ++j) {
    const int gj = span_v - q + j;
    for (int i = 0; i <= p; ++i) {
      const int gi = span_u - p + i;
      out.active[idx] = patch.global_index(gi, gj);
      const double wt = patch.net.w(gi, gj);
      for (int a = 0; a <= order; ++a)
        for (int b = 0; a + b <= order; ++b) {
          const double nu = a <= p ? du(a, i) : 0.0;
          const double nv = b <= q ? dv(b, j) : 0.0;
          A(idx, der_col(a, b)) = nu * nv * wt;
        }
      ++idx;
    }
  }
  for (int c = 0; c < ncol; ++c) W[c] = A.col(c).sum();

  // Rational derivatives by the Leibniz rule: A = W * R.
  out.der.resize(na, ncol);
  for (int o = 0; o <= order; ++o)
    for (int b = 0; b <= o; ++b) {
      const int a = o - b;
      Vec v = A.col(der_col(a, b));
      for (int c = 0; c <= a; ++c)
        for (int d = 0; d <= b; ++d) {
          if (c == 0 && d == 0) continue;
          v -= binom(a, c) * binom(b, d) * W[der_col(c, d)] *
               out.der.col(der_col(a - c, b - d));
        }
      out.der.col(der_col(a, b)) = v / W[0];
    }
  return out;
}

GeometryFrame geometry_map(const NurbsSurfacePatch& patch, const BasisBlock& basis) {
  const int order = basis.order;
  if (order < 2) throw std::invalid_argument("geometry_map: needs order >= 2 basis");
  GeometryFrame f;
  const int na = static_cast<int>(basis.active.size());
  Vec px(na), py(na);
  for (int k = 0; k < na; ++k) {
    const int g = basis.active[k];
    const int i = g % patch.net.nu();
    const int j = g / patch.net.nu();
    px[k] = patch.net.x(i, j);
    py[k] = patch.net.y(i, j);
  }
  auto comp = [&](int col) -> Vec2 {
    return Vec2(basis.der.col(col).dot(px), basis.der.col(col).dot(py));
  };
  f.x = comp(0);
  f.J.col(0) = comp(der_col(1, 0));
  f.J.col(1) = comp(der_col(0, 1));
  f.H.resize(2, 3);
  f.H.col(0) = comp(der_col(2, 0));
  f.H.col(1) = comp(der_col(1, 1));
  f.H.col(2) = comp(der_col(0, 2));
  f.T = Mat::Zero(2, 4);
  if (order >= 3) {
    f.T.col(0) = comp(der_col(3, 0));
    f.T.col(1) = comp(der_col(2, 1));
    f.T.col(2) = comp(der_col(1, 2));
    f.T.col(3) = comp(der_col(0, 3));
  }
  f.detJ = f.J.determinant();
  return f;
}

GeometryFrame geometry_map(const NurbsSurfacePatch& patch, const Vec2& xi, int order) {
  GeometryFrame f = geometry_map(patch, rational_basis_2d(patch, xi, std::max(order, 2)));
  if (f.detJ <= 0.0)
    throw std::runtime_error("geometry_map: degenerate geometry (detJ <= 0)");
  return f;
}

PhysicalBasis physical_plate_derivatives(const NurbsSurfacePatch& patch, const Vec2& xi,
                                         int order) {
  if (order < 2 || order > 3)
    throw std::invalid_argument("physical_plate_derivatives: order must be 2 or 3");
  const BasisBlock basis = rational_basis_2d(patch, xi, order);
  const GeometryFrame f = geometry_map(patch, basis);
  if (std::abs(f.detJ) < 1e-300)
    throw std::runtime_error("physical_plate_derivatives: singular Jacobian");
  if (f.detJ <= 0.0)
    throw std::runtime_error("physical_plate_derivatives: degenerate geometry");

  const int na = static_cast<int>(basis.active.size());
  PhysicalBasis out;
  out.order = order;
  out.active = basis.active;
  out.N = basis.der.col(0);

  const double xu = f.J(0, 0), xv = f.J(0, 1), yu = f.J(1, 0), yv = f.J(1, 1);

  // First order: [Nu Nv]^T = J^T [Nx Ny]^T.
  Mat2 Jt;
  Jt << xu, yu, xv, yv;
  Mat2 JtInv = Jt.inverse();
  Mat rhs1(2, na);
  rhs1.row(0) = basis.der.col(der_col(1, 0)).transpose();
  rhs1.row(1) = basis.der.col(der_col(0, 1)).transpose();
  Mat g1 = JtInv * rhs1;
  out.Nx = g1.row(0).transpose();
  out.Ny = g1.row(1).transpose();

  // Second order: 3x3 system per point set.
  const double xuu = f.H(0, 0), xuv = f.H(0, 1), xvv = f.H(0, 2);
  const double yuu = f.H(1, 0), yuv = f.H(1, 1), yvv = f.H(1, 2);
  Mat3 J2;
  J2 << xu * xu, 2 * xu * yu, yu * yu,
        xu * xv, xu * yv + xv * yu, yu * yv,
        xv * xv, 2 * xv * yv, yv * yv;
  Mat rhs2(3, na);
  rhs2.row(0) = basis.der.col(der_col(2, 0)).transpose() - xuu * out.Nx.transpose() -
                yuu * out.Ny.transpose();
  rhs2.row(1) = basis.der.col(der_col(1, 1)).transpose() - xuv * out.Nx.transpose() -
                yuv * out.Ny.transpose();
  rhs2.row(2) = basis.der.col(der_col(0, 2)).transpose() - xvv * out.Nx.transpose() -
                yvv * out.Ny.transpose();
  Mat g2 = J2.fullPivLu().solve(rhs2);
  out.Nxx = g2.row(0).transpose();
  out.Nxy = g2.row(1).transpose();
  out.Nyy = g2.row(2).transpose();

  if (order == 3) {
    const double xuuu = f.T(0, 0), xuuv = f.T(0, 1), xuvv = f.T(0, 2), xvvv = f.T(0, 3);
    const double yuuu = f.T(1, 0), yuuv = f.T(1, 1), yuvv = f.T(1, 2), yvvv = f.T(1, 3);

    // Slot data per row: first derivatives (one per slot) and the second
    // derivatives of the geometry for each unordered slot pair.
    struct Row {
      double x1[3], y1[3]; // first derivs of map in each slot
      double x2[3], y2[3]; // pair (01),(02),(12) second derivs
      double x3, y3;       // third deriv
      int rhs_col;
    };
    auto d1 = [&](int s) { return s == 0 ? Vec2(xu, yu) : Vec2(xv, yv); };
    auto d2 = [&](int s, int t) {
      const int k = s + t; // 0:uu 1:uv 2:vv
      return Vec2(f.H(0, k), f.H(1, k));
    };
    const int slots[4][3] = {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}};
    const double x3s[4] = {xuuu, xuuv, xuvv, xvvv};
    const double y3s[4] = {yuuu, yuuv, yuvv, yvvv};
    const int rhs_cols[4] = {der_col(3, 0), der_col(2, 1), der_col(1, 2), der_col(0, 3)};

    Mat J3(4, 4);
    Mat rhs3(4, na);
    for (int r = 0; r < 4; ++r) {
      const int* sl = slots[r];
      Vec2 a = d1(sl[0]), b = d1(sl[1]), c = d1(sl[2]);
      J3(r, 0) = a[0] * b[0] * c[0];
      J3(r, 1) = a[0] * b[0] * c[1] + a[0] * b[1] * c[0] + a[1] * b[0] * c[0];
      J3(r, 2) = a[0] * b[1] * c[1] + a[1] * b[0] * c[1] + a[1] * b[1] * c[0];
      J3(r, 3) = a[1] * b[1] * c[1];

      // Corrections from second derivatives of the map: pairs (01|2),(02|1),(12|0).
      double cxx = 0, cxy = 0, cyy = 0;
      const int pairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
      for (const auto& pr : pairs) {
        Vec2 s2 = d2(sl[pr[0]], sl[pr[1]]);
        Vec2 s1 = d1(sl[pr[2]]);
        cxx += s2[0] * s1[0];
        cxy += s2[0] * s1[1] + s2[1] * s1[0];
        cyy += s2[1] * s1[1];
      }
      rhs3.row(r) = basis.der.col(rhs_cols[r]).transpose() -
                    cxx * out.Nxx.transpose() - cxy * out.Nxy.transpose() -
                    cyy * out.Nyy.transpose() - x3s[r] * out.Nx.transpose() -
                    y3s[r] * out.Ny.transpose();
    }
    Mat g3 = J3.fullPivLu().solve(rhs3);
    out.Nxxx = g3.row(0).transpose();
    out.Nxxy = g3.row(1).transpose();
    out.Nxyy = g3.row(2).transpose();
    out.Nyyy = g3.row(3).transpose();
  }
  return out;
}

namespace {

// Homogeneous control rows for univariate algorithms: row i of P holds all
// components (3 per transverse control point) scaled forms (wx, wy, w).
struct HomoGrid {
  Mat P; // n x (3*m)
  int m;
};

HomoGrid to_homo_u(const ControlNet& net) {
  HomoGrid g;
  g.m = net.nv();
  g.P.resize(net.nu(), 3 * g.m);
  for (int j = 0; j < g.m; ++j)
    for (int i = 0; i < net.nu(); ++i) {
      const double w = net.w(i, j);
      g.P(i, 3 * j + 0) = net.x(i, j) * w;
      g.P(i, 3 * j + 1) = net.y(i, j) * w;
      g.P(i, 3 * j + 2) = w;
    }
  return g;
}

ControlNet from_homo_u(const Mat& P, int m) {
  const int n = static_cast<int>(P.rows());
  ControlNet net;
  net.x.resize(n, m);
  net.y.resize(n, m);
  net.w.resize(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      const double w = P(i, 3 * j + 2);
      net.w(i, j) = w;
      net.x(i, j) = P(i, 3 * j + 0) / w;
      net.y(i, j) = P(i, 3 * j + 1) / w;
    }
  return net;
}

ControlNet transposed(const ControlNet& net) {
  ControlNet t;
  t.x = net.x.transpose();
  t.y = net.y.transpose();
  t.w = net.w.transpose();
  return t;
}

// Boehm single-knot insertion applied along the row direction.
void insert_knot_u(KnotVector& kv, Mat& P, double u) {
  const int p = kv.degree();
  if (kv.multiplicity(u) >= p)
    throw std::invalid_argument("h_refine: knot multiplicity would exceed degree");
  const int k = kv.find_span(u);
  const int n = static_cast<int>(P.rows());
  Mat Q(n + 1, P.cols());
  for (int i = 0; i <= k - p; ++i) Q.row(i) = P.row(i);
  for (int i = k - p + 1; i <= k; ++i) {
    const double denom = kv[i + p] - kv[i];
    const double a = denom > 0.0 ? (u - kv[i]) / denom : 0.0;
    Q.row(i) = a * P.row(i) + (1.0 - a) * P.row(i - 1);
  }
  for (int i = k + 1; i <= n; ++i) Q.row(i) = P.row(i - 1);
  P = Q;
  kv = kv.with_inserted({u});
}

// Degree elevation by one along the row direction (Piegl & Tiller A5.9).
void elevate_u(KnotVector& kv, Mat& P) {
  const int p = kv.degree();
  const int t = 1;
  const int n = static_cast<int>(P.rows()) - 1;
  const std::vector<double>& U = kv.values();
  const int m = n + p + 1;
  const int ph = p + t, ph2 = ph / 2;
  const int cols = static_cast<int>(P.cols());

  Mat bezalfs = Mat::Zero(ph + 1, p + 1);
  bezalfs(0, 0) = bezalfs(ph, p) = 1.0;
  for (int i = 1; i <= ph2; ++i) {
    const double inv = 1.0 / binom(ph, i);
    const int mpi = std::min(p, i);
    for (int j = std::max(0, i - t); j <= mpi; ++j)
      bezalfs(i, j) = inv * binom(p, j) * binom(t, i - j);
  }
  for (int i = ph2 + 1; i <= ph - 1; ++i) {
    const int mpi = std::min(p, i);
    for (int j = std::max(0, i - t); j <= mpi; ++j) bezalfs(i, j) = bezalfs(ph - i, p - j);
  }

  const int guess_pts = 2 * (n + 1) + ph + 2;
  Mat Q = Mat::Zero(guess_pts, cols);
  std::vector<double> Uh(guess_pts + ph + 2, 0.0);
  Mat bpts(p + 1, cols), ebpts(ph + 1, cols), Nextbpts(std::max(p - 1, 1), cols);
  Vec alfs = Vec::Zero(std::max(p - 1, 1));

  int mh = ph, kind = ph + 1, r = -1, a = p, b = p + 1, cind = 1;
  double ua = U[0];
  Q.row(0) = P.row(0);
  for (int i = 0; i <= ph; ++i) Uh[i] = ua;
  for (int i = 0; i <= p; ++i) bpts.row(i) = P.row(i);

  while (b < m) {
    const int i0 = b;
    while (b < m && U[b] == U[b + 1]) ++b;
    const int mul = b - i0 + 1;
    mh += mul + t;
    const double ub = U[b];
    const int oldr = r;
    r = p - mul;
    const int lbz = oldr > 0 ? (oldr + 2) / 2 : 1;
    const int rbz = r > 0 ? ph - (r + 1) / 2 : ph;
    if (r > 0) {
      const double numer = ub - ua;
      for (int k = p; k > mul; --k) alfs[k - mul - 1] = numer / (U[a + k] - ua);
      for (int j = 1; j <= r; ++j) {
        const int save = r - j, s = mul + j;
        for (int k = p; k >= s; --k)
          bpts.row(k) = alfs[k - s] * bpts.row(k) + (1.0 - alfs[k - s]) * bpts.row(k - 1);
        Nextbpts.row(save) = bpts.row(p);
      }
    }
    for (int i = lbz; i <= ph; ++i) {
      ebpts.row(i).setZero();
      const int mpi = std::min(p, i);
      for (int j = std::max(0, i - t); j <= mpi; ++j)
        ebpts.row(i) += bezalfs(i, j) * bpts.row(j);
    }
    if (oldr > 1) {
      int first = kind - 2, last = kind;
      const double den = ub - ua;
      const double bet = (ub - Uh[kind - 1]) / den;
      for (int tr = 1; tr < oldr; ++tr) {
        int i = first, j = last, kj = j - kind + 1;
        while (j - i > tr) {
          if (i < cind) {
            const double alf = (ub - Uh[i]) / (ua - Uh[i]);
            Q.row(i) = alf * Q.row(i) + (1.0 - alf) * Q.row(i - 1);
          }
          if (j >= lbz) {
            if (j - tr <= kind - ph + oldr) {
              const double gam = (ub - Uh[j - tr]) / den;
              ebpts.row(kj) = gam * ebpts.row(kj) + (1.0 - gam) * ebpts.row(kj + 1);
            } else {
              ebpts.row(kj) = bet * ebpts.row(kj) + (1.0 - bet) * ebpts.row(kj + 1);
            }
          }
          ++i;
          --j;
          --kj;
        }
        --first;
        ++last;
      }
    }
    if (a != p) {
      for (int i = 0; i < ph - oldr; ++i) {
        Uh[kind] = ua;
        ++kind;
      }
    }
    for (int j = lbz; j <= rbz; ++j) {
      Q.row(cind) = ebpts.row(j);
      ++cind;
    }
    if (b < m) {
      for (int j = 0; j < r; ++j) bpts.row(j) = Nextbpts.row(j);
      for (int j = r; j <= p; ++j) bpts.row(j) = P.row(b - p + j);
      a = b;
      ++b;
      ua = ub;
    } else {
      for (int i = 0; i <= ph; ++i) Uh[kind + i] = ub;
    }
  }
  const int nh = mh - ph - 1;
  P = Q.topRows(nh + 1);
  kv = KnotVector(p + 1, std::vector<double>(Uh.begin(), Uh.begin() + nh + ph + 2));
}

} // namespace

NurbsSurfacePatch h_refine(const NurbsSurfacePatch& patch,
                           const std::vector<double>& new_knots_u,
                           const std::vector<double>& new_knots_v) {
  KnotVector ku = patch.knots_u;
  HomoGrid gu = to_homo_u(patch.net);
  for (double u : new_knots_u) insert_knot_u(ku, gu.P, u);
  ControlNet net = from_homo_u(gu.P, gu.m);

  KnotVector kvv = patch.knots_v;
  ControlNet tnet = transposed(net);
  HomoGrid gv = to_homo_u(tnet);
  for (double v : new_knots_v) insert_knot_u(kvv, gv.P, v);
  net = transposed(from_homo_u(gv.P, gv.m));

  return NurbsSurfacePatch(ku, kvv, net);
}

NurbsSurfacePatch h_refine_uniform(const NurbsSurfacePatch& patch, int levels) {
  NurbsSurfacePatch out = patch;
  for (int l = 0; l < levels; ++l) {
    std::vector<double> mids_u, mids_v;
    const auto bu = out.knots_u.breakpoints();
    for (size_t i = 0; i + 1 < bu.size(); ++i) mids_u.push_back(0.5 * (bu[i] + bu[i + 1]));
    const auto bv = out.knots_v.breakpoints();
    for (size_t i = 0; i + 1 < bv.size(); ++i) mids_v.push_back(0.5 * (bv[i] + bv[i + 1]));
    out = h_refine(out, mids_u, mids_v);
  }
  return out;
}

NurbsSurfacePatch p_elevate(const NurbsSurfacePatch& patch) {
  KnotVector ku = patch.knots_u;
  HomoGrid gu = to_homo_u(patch.net);
  elevate_u(ku, gu.P);
  ControlNet net = from_homo_u(gu.P, gu.m);

  KnotVector kvv = patch.knots_v;
  ControlNet tnet = transposed(net);
  HomoGrid gv = to_homo_u(tnet);
  elevate_u(kvv, gv.P);
  net = transposed(from_homo_u(gv.P, gv.m));

  return NurbsSurfacePatch(ku, kvv, net);
}

Vec2 edge_param(EdgeId edge, double s) {
  switch (edge) {
    case EdgeId::u0: return Vec2(0.0, s);
    case EdgeId::u1: return Vec2(1.0, s);
    case EdgeId::v0: return Vec2(s, 0.0);
    default: return Vec2(s, 1.0);
  }
}

int edge_running_dir(EdgeId edge) {
  return (edge == EdgeId::u0 || edge == EdgeId::u1) ? 1 : 0;
}

Vec2 edge_outward_param_normal(EdgeId edge) {
  switch (edge) {
    case EdgeId::u0: return Vec2(-1.0, 0.0);
    case EdgeId::u1: return Vec2(1.0, 0.0);
    case EdgeId::v0: return Vec2(0.0, -1.0);
    default: return Vec2(0.0, 1.0);
  }
}

const KnotVector& edge_knots(const NurbsSurfacePatch& patch, EdgeId edge) {
  return edge_running_dir(edge) == 0 ? patch.knots_u : patch.knots_v;
}

bool locate_point(const NurbsSurfacePatch& patch, const Vec2& x_phys, Vec2& xi_out) {
  const double scale = std::max({patch.net.x.maxCoeff() - patch.net.x.minCoeff(),
                                 patch.net.y.maxCoeff() - patch.net.y.minCoeff(), 1e-300});
  double best_err = std::numeric_limits<double>::max();
  Vec2 best = Vec2(0.5, 0.5);
  bool ok = false;
  for (int si = 0; si < 5; ++si)
    for (int sj = 0; sj < 5; ++sj) {
      Vec2 xi(0.1 + 0.2 * si, 0.1 + 0.2 * sj);
      for (int it = 0; it < 50; ++it) {
        GeometryFrame f = geometry_map(patch, xi, 2);
        const Vec2 rvec = x_phys - f.x;
        Vec2 step = f.J.fullPivLu().solve(rvec);
        // Damped update, clamped to the parameter square.
        double lambda = 1.0;
        if (step.norm() > 0.25) lambda = 0.25 / step.norm();
        Vec2 next = xi + lambda * step;
        next[0] = std::clamp(next[0], 0.0, 1.0);
        next[1] = std::clamp(next[1], 0.0, 1.0);
        const double move = (next - xi).norm();
        xi = next;
        if (move < 1e-12) break;
      }
      const GeometryFrame f = geometry_map(patch, xi, 2);
      const double err = (x_phys - f.x).norm();
      if (err < best_err) {
        best_err = err;
        best = xi;
      }
      if (err < 1e-9 * scale) {
        xi_out = xi;
        return true;
      }
    }
  xi_out = best;
  ok = best_err < 1e-7 * scale;
  return ok;
}

NurbsSurfacePatch make_bilinear_patch(const Vec2& p00, const Vec2& p10, const Vec2& p01,
                                      const Vec2& p11, int degree) {
  KnotVector k1(1, {0, 0, 1, 1});
  ControlNet net;
  net.x.resize(2, 2);
  net.y.resize(2, 2);
  net.w = Mat::Ones(2, 2);
  net.x << p00[0], p01[0], p10[0], p11[0];
  net.y << p00[1], p01[1], p10[1], p11[1];
  NurbsSurfacePatch patch(k1, k1, net);
  for (int d = 1; d < degree; ++d) patch = p_elevate(patch);
  return patch;
}

NurbsSurfacePatch make_rectangle_patch(double x0, double y0, double x1, double y1,
                                       int degree) {
  return make_bilinear_patch(Vec2(x0, y0), Vec2(x1, y0), Vec2(x0, y1), Vec2(x1, y1),
                             degree);
}

NurbsSurfacePatch make_quarter_annulus(double r0, double r1) {
  KnotVector ku(1, {0, 0, 1, 1});
  KnotVector kv(2, {0, 0, 0, 1, 1, 1});
  const double s = std::sqrt(2.0) / 2.0;
  ControlNet net;
  net.x.resize(2, 3);
  net.y.resize(2, 3);
  net.w.resize(2, 3);
  net.x << r0, r0, 0.0, r1, r1, 0.0;
  net.y << 0.0, r0, r0, 0.0, r1, r1;
  net.w << 1.0, s, 1.0, 1.0, s, 1.0;
  return NurbsSurfacePatch(ku, kv, net);
}

} // namespace piga
