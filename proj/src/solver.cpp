#include "piga/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cstdio>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace piga {

Vec solve_static(const SpMat& K, const Vec& F) {
  if (F.cwiseAbs().maxCoeff() == 0.0) return Vec::Zero(F.size());
  Eigen::SimplicialLDLT<SpMat> ldlt(K);
  // normwise backward error |Kw - F| / (|K||w| + |F|)
  auto residual = [&](const Vec& w) {
    const Vec r = K * w - F;
    const Vec den = K.cwiseAbs() * w.cwiseAbs() + F.cwiseAbs();
    return r.norm() / std::max(den.norm(), 1e-300);
  };
  Vec w;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    w = ldlt.solve(F);
    ok = ldlt.info() == Eigen::Success;
    // refinement passes recover digits lost to interface penalties
    for (int it = 0; ok && it < 3 && residual(w) > 1e-14; ++it)
      w += ldlt.solve(Vec(F - K * w));
  }
  if (!ok) {
    Eigen::SparseLU<SpMat> lu(K);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve_static: factorization failed (singular or indefinite K)");
    w = lu.solve(F);
    for (int it = 0; it < 3 && residual(w) > 1e-14; ++it) w += lu.solve(Vec(F - K * w));
  }
  const double res = residual(w);
  if (!(res < 1e-10)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", res);
    throw std::runtime_error(std::string("solve_static: residual ") + buf +
                             " exceeds tolerance");
  }
  return w;
}

SpMat rayleigh_damping(const SpMat& M, const SpMat& K, double alpha, double beta) {
  if (alpha < 0 || beta < 0)
    throw std::invalid_argument("rayleigh_damping: coefficients must be non-negative");
  return alpha * M + beta * K;
}

namespace {

ModalBasis modal_dense(const SpMat& K, const SpMat& M, int n_modes) {
  const Mat Kd(K), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Kd, Md);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("solve_modal: dense eigensolver failed");
  ModalBasis out;
  out.omega = es.eigenvalues().head(n_modes).cwiseMax(0.0).cwiseSqrt();
  out.shapes = es.eigenvectors().leftCols(n_modes);
  return out;
}

// Block subspace iteration with shift-invert at zero; robust for the tightly
// clustered spectra of metastructure lattices.
ModalBasis modal_sparse(const SpMat& K, const SpMat& M, int n_modes,
                        const ModalOptions& opt) {
  const int n = static_cast<int>(K.rows());
  const int n_sub = std::min(n, n_modes + std::max(12, n_modes / 2));
  Eigen::SimplicialLDLT<SpMat> Kf(K);
  if (Kf.info() != Eigen::Success)
    throw std::runtime_error("solve_modal: factorization failed (K not positive definite?)");

  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> gauss;
  Mat X(n, n_sub);
  for (int j = 0; j < n_sub; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);

  auto m_orthonormalize = [&](Mat& Y) {
    Mat G = Y.transpose() * (M * Y);
    Eigen::LLT<Mat> llt(G);
    if (llt.info() != Eigen::Success) {
      // rank loss: refresh with random directions and retry once
      for (int j = 0; j < Y.cols(); ++j)
        for (int i = 0; i < n; ++i) Y(i, j) += 1e-8 * gauss(rng);
      G = Y.transpose() * (M * Y);
      llt.compute(G);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_modal: subspace lost rank");
    }
    Y = Y * Mat(llt.matrixU()).inverse();
  };

  m_orthonormalize(X);
  Vec theta = Vec::Zero(n_sub);
  int converged_count = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    Mat Y = Kf.solve(M * X);
    m_orthonormalize(Y);
    Mat H = Y.transpose() * (K * Y);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    X = Y * es.eigenvectors();
    theta = es.eigenvalues();

    if (it % 2 == 1 || it == opt.max_iter - 1) {
      const Mat KX = K * X.leftCols(n_modes);
      const Mat MX = M * X.leftCols(n_modes);
      converged_count = 0;
      bool all_ok = true;
      for (int j = 0; j < n_modes; ++j) {
        const double res =
            (KX.col(j) - theta[j] * MX.col(j)).norm() / std::max(KX.col(j).norm(), 1e-300);
        if (res < opt.tol)
          ++converged_count;
        else
          all_ok = false;
      }
      if (all_ok) break;
    }
  }
  if (converged_count < n_modes)
    throw std::runtime_error("solve_modal: converged only " +
                             std::to_string(converged_count) + " of " +
                             std::to_string(n_modes) + " modes");
  ModalBasis out;
  out.omega = theta.head(n_modes).cwiseMax(0.0).cwiseSqrt();
  out.shapes = X.leftCols(n_modes);
  return out;
}

} // namespace

ModalBasis solve_modal(const SpMat& K, const SpMat& M, int n_modes, const ModalOptions& opt) {
  if (n_modes < 1 || n_modes > K.rows())
    throw std::invalid_argument("solve_modal: invalid mode count");
  if (K.rows() <= opt.dense_threshold || n_modes > K.rows() / 3)
    return modal_dense(K, M, n_modes);
  return modal_sparse(K, M, n_modes, opt);
}

CVec& FrequencyResponse::add(const std::string& name) {
  names.push_back(name);
  data.emplace_back(CVec::Zero(freq_hz.size()));
  return data.back();
}

const CVec& FrequencyResponse::channel(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return data[i];
  throw std::invalid_argument("FrequencyResponse: no channel " + name);
}

bool FrequencyResponse::has(const std::string& name) const {
  for (const auto& n : names)
    if (n == name) return true;
  return false;
}

std::vector<CircuitLoad> resolve_circuit_loads(const MultiPatchModel& model,
                                               const std::vector<int>& circuit_ids,
                                               const std::vector<double>& Cp,
                                               bool literal_inductor) {
  std::vector<CircuitLoad> loads;
  for (size_t i = 0; i < circuit_ids.size(); ++i) {
    const CircuitSpec* spec = nullptr;
    for (const CircuitSpec& c : model.circuits)
      if (c.id == circuit_ids[i]) spec = &c;
    if (!spec) throw std::runtime_error("resolve_circuit_loads: missing circuit spec");
    CircuitLoad load;
    load.kind = spec->kind;
    load.R = spec->R_l;
    if (spec->kind == CircuitKind::shunt) {
      if (spec->L_k > 0)
        load.L = spec->L_k;
      else if (spec->omega_t > 0)
        load.L = literal_inductor ? 1.0 / (Cp[i] * spec->omega_t)
                                  : 1.0 / (Cp[i] * spec->omega_t * spec->omega_t);
      else
        throw std::runtime_error("resolve_circuit_loads: shunt without L or target");
    }
    loads.push_back(load);
  }
  return loads;
}

cplx circuit_scale(const CircuitLoad& load, double Cp, double omega, bool literal_inductor) {
  const cplx jw(0.0, omega);
  switch (load.kind) {
    case CircuitKind::short_circuit:
      return cplx(0.0, 0.0);
    case CircuitKind::open_circuit:
      return cplx(1.0 / Cp, 0.0);
    case CircuitKind::resistor: {
      if (omega == 0.0) return cplx(0.0, 0.0);
      return jw / (cplx(1.0 / load.R, 0.0) + jw * Cp);
    }
    case CircuitKind::shunt: {
      if (omega == 0.0)
        throw std::domain_error("circuit_scale: shunt admittance singular at omega = 0");
      const cplx Y = literal_inductor
                         ? cplx(1.0 / load.R, 0.0) + 1.0 / (cplx(0.0, load.L))
                         : cplx(1.0 / load.R, 0.0) + 1.0 / (jw * load.L);
      return jw / (Y + jw * Cp);
    }
  }
  return cplx(0.0, 0.0);
}

namespace {

CVec circuit_scales(const std::vector<CircuitLoad>& loads, const std::vector<double>& Cp,
                    double omega, bool literal) {
  CVec s(loads.size());
  for (size_t i = 0; i < loads.size(); ++i)
    s[i] = circuit_scale(loads[i], Cp[i], omega, literal);
  return s;
}

} // namespace

HarmonicSolution solve_harmonic(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                                double omega, const Vec& rhs, bool literal_inductor) {
  const int n = static_cast<int>(sys.K.rows());
  const int m = static_cast<int>(sys.Theta.size());
  if (static_cast<int>(loads.size()) != m)
    throw std::invalid_argument("solve_harmonic: loads do not match circuits");

  CSpMat A0 = sys.K.cast<cplx>();
  if (omega != 0.0) {
    A0 += cplx(0.0, omega) * sys.C.cast<cplx>();
    A0 += cplx(-omega * omega, 0.0) * sys.M.cast<cplx>();
  }
  Eigen::SparseLU<CSpMat> lu(A0);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(
        "solve_harmonic: dynamic matrix singular at omega = " + std::to_string(omega) +
        " rad/s (undamped resonance?); add damping or shift the grid");

  CMat Th(n, m);
  for (int k = 0; k < m; ++k) Th.col(k) = sys.Theta[k].cast<cplx>();
  CMat B(n, 1 + m);
  B.col(0) = rhs.cast<cplx>();
  B.rightCols(m) = Th;
  CMat X = lu.solve(B);

  HarmonicSolution out;
  out.v = CVec::Zero(m);
  if (m == 0) {
    out.w = X.col(0);
    const double r = (A0 * out.w - B.col(0)).norm() / std::max(B.col(0).norm(), 1e-300);
    if (!(r < 1e-7)) throw std::runtime_error("solve_harmonic: poor residual");
    return out;
  }

  const CVec s = circuit_scales(loads, sys.Cp, omega, literal_inductor);
  // Woodbury update for A = A0 + sum_m s_m Theta_m Theta_m^T, stable at s = 0.
  const CMat W = Th.transpose() * X.rightCols(m);
  const CVec t = Th.transpose() * X.col(0);
  CMat lhs = CMat::Identity(m, m) + s.asDiagonal() * W;
  CVec y = lhs.partialPivLu().solve(CVec(s.asDiagonal() * t));
  out.w = X.col(0) - X.rightCols(m) * y;
  out.v = -(s.array() * (Th.transpose() * out.w).array()).matrix();
  return out;
}

ModalReduction mor_reduce(const ReducedSystem& sys, const ModalBasis& basis, int n_modes) {
  if (n_modes > basis.omega.size())
    throw std::invalid_argument("mor_reduce: requested more modes than computed");
  ModalReduction red;
  red.omega = basis.omega.head(n_modes);
  red.phi = basis.shapes.leftCols(n_modes);
  red.k_o = red.omega.array().square().matrix();
  red.c_o = red.phi.transpose() * (sys.C * red.phi);
  red.circuit_ids = sys.circuit_ids;
  for (const Vec& th : sys.Theta) red.theta_o.push_back(red.phi.transpose() * th);
  red.Cp = sys.Cp;
  red.f_base = red.phi.transpose() * sys.F_base;
  red.f_ext = red.phi.transpose() * sys.F_ext;
  return red;
}

HarmonicSolution solve_harmonic(const ModalReduction& red, const std::vector<CircuitLoad>& loads,
                                double omega, const Vec& rhs_modal, bool literal_inductor) {
  const int K = static_cast<int>(red.k_o.size());
  const int m = static_cast<int>(red.theta_o.size());
  if (static_cast<int>(loads.size()) != m)
    throw std::invalid_argument("solve_harmonic: loads do not match circuits");

  CMat A = CMat::Zero(K, K);
  A.diagonal() = (red.k_o.array() - omega * omega).cast<cplx>();
  A += cplx(0.0, omega) * red.c_o.cast<cplx>();
  CVec s = m > 0 ? circuit_scales(loads, red.Cp, omega, literal_inductor) : CVec();
  for (int k = 0; k < m; ++k)
    A += s[k] * (red.theta_o[k].cast<cplx>() * red.theta_o[k].cast<cplx>().transpose());

  HarmonicSolution out;
  out.w = A.partialPivLu().solve(CVec(rhs_modal.cast<cplx>()));
  out.v = CVec::Zero(m);
  for (int k = 0; k < m; ++k)
    out.v[k] = -s[k] * red.theta_o[k].cast<cplx>().dot(out.w);
  return out;
}

Vec observation_vector(const MultiPatchModel& model, const ReducedSystem& sys,
                       const Vec2& x) {
  int p = -1;
  Vec2 xi;
  if (!locate_in_model(model, x, p, xi))
    throw std::runtime_error("observation_vector: point outside the domain");
  const DofMap dofs = build_dofmap(model);
  PhysicalBasis pb = physical_plate_derivatives(model.regions[p].patch, xi, 2);
  Vec full = Vec::Zero(dofs.total);
  for (int i = 0; i < pb.N.size(); ++i) full[dofs.dof(p, pb.active[i])] = pb.N[i];
  return sys.restrict_vec(full);
}

Vec log_grid(double fmin_hz, double fmax_hz, int n) {
  if (!(fmin_hz > 0) || !(fmax_hz > fmin_hz) || n < 2)
    throw std::invalid_argument("log_grid: invalid range");
  Vec g(n);
  const double a = std::log(fmin_hz), b = std::log(fmax_hz);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

Vec lin_grid(double fmin_hz, double fmax_hz, int n) {
  if (!(fmax_hz > fmin_hz) || n < 2) throw std::invalid_argument("lin_grid: invalid range");
  Vec g(n);
  for (int i = 0; i < n; ++i) g[i] = fmin_hz + (fmax_hz - fmin_hz) * i / (n - 1);
  return g;
}

namespace {

void run_parallel(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next(0);
  std::exception_ptr err;
  std::mutex err_mtx;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mtx);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// Shared sweep driver: fn(omega) -> channel row.
template <class RowFn>
FrequencyResponse sweep(const Vec& grid_hz, const std::vector<std::string>& names,
                        const SweepOptions& opt, RowFn&& fn) {
  std::vector<double> freqs(grid_hz.data(), grid_hz.data() + grid_hz.size());
  std::vector<std::vector<cplx>> rows(freqs.size());

  auto solve_all = [&](const std::vector<int>& idx) {
    run_parallel(static_cast<int>(idx.size()), opt.workers, [&](int k) {
      rows[idx[k]] = fn(2.0 * pi * freqs[idx[k]]);
    });
  };
  std::vector<int> all(freqs.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  solve_all(all);

  for (int pass = 0; opt.adaptive && pass < opt.adaptive_passes; ++pass) {
    std::vector<double> extra;
    for (size_t i = 0; i + 1 < freqs.size(); ++i) {
      bool jump = false;
      for (size_t c = 0; c < names.size(); ++c) {
        const double a = std::abs(rows[i][c]), b = std::abs(rows[i + 1][c]);
        const double hi = std::max(a, b);
        if (hi > 0 && std::abs(a - b) / hi > 0.10) jump = true;
      }
      if (jump) {
        const double mid = freqs[i] > 0 ? std::sqrt(freqs[i] * freqs[i + 1])
                                        : 0.5 * (freqs[i] + freqs[i + 1]);
        if (mid > freqs[i] * (1 + 1e-9) && mid < freqs[i + 1] * (1 - 1e-9))
          extra.push_back(mid);
      }
    }
    if (extra.empty()) break;
    const size_t base = freqs.size();
    freqs.insert(freqs.end(), extra.begin(), extra.end());
    rows.resize(freqs.size());
    std::vector<int> idx;
    for (size_t i = base; i < freqs.size(); ++i) idx.push_back(static_cast<int>(i));
    solve_all(idx);
    // re-sort by frequency
    std::vector<int> order(freqs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return freqs[a] < freqs[b]; });
    std::vector<double> f2(freqs.size());
    std::vector<std::vector<cplx>> r2(freqs.size());
    for (size_t i = 0; i < order.size(); ++i) {
      f2[i] = freqs[order[i]];
      r2[i] = std::move(rows[order[i]]);
    }
    freqs = std::move(f2);
    rows = std::move(r2);
  }

  FrequencyResponse out;
  out.freq_hz = Eigen::Map<Vec>(freqs.data(), freqs.size());
  for (const std::string& n : names) out.add(n);
  for (size_t i = 0; i < freqs.size(); ++i)
    for (size_t c = 0; c < names.size(); ++c) out.data[c][i] = rows[i][c];
  return out;
}

std::vector<std::string> voltage_names(const std::vector<int>& ids) {
  if (ids.size() == 1) return {"voltage"};
  std::vector<std::string> names;
  for (int id : ids) names.push_back("voltage_" + std::to_string(id));
  return names;
}

void require_no_zero(const Vec& grid_hz, const char* who) {
  for (int i = 0; i < grid_hz.size(); ++i)
    if (grid_hz[i] == 0.0)
      throw std::invalid_argument(std::string(who) + ": omega = 0 must be excluded");
}

} // namespace

FrequencyResponse frf_voltage(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                              const Vec& grid_hz, const SweepOptions& opt) {
  const std::vector<std::string> names = voltage_names(sys.circuit_ids);
  const Vec rhs = sys.F_base; // response per unit base acceleration, up to sign
  return sweep(grid_hz, names, opt, [&](double omega) {
    HarmonicSolution sol = solve_harmonic(sys, loads, omega, Vec(-rhs), opt.literal_inductor);
    std::vector<cplx> row(sol.v.data(), sol.v.data() + sol.v.size());
    return row;
  });
}

FrequencyResponse frf_voltage(const ModalReduction& red, const std::vector<CircuitLoad>& loads,
                              const Vec& grid_hz, const SweepOptions& opt) {
  const std::vector<std::string> names = voltage_names(red.circuit_ids);
  return sweep(grid_hz, names, opt, [&](double omega) {
    HarmonicSolution sol =
        solve_harmonic(red, loads, omega, Vec(-red.f_base), opt.literal_inductor);
    std::vector<cplx> row(sol.v.data(), sol.v.data() + sol.v.size());
    return row;
  });
}

FrequencyResponse frf_single_circuit(const ReducedSystem& sys, double R_l,
                                     const Vec& grid_hz, const SweepOptions& opt) {
  if (sys.Theta.size() != 1)
    throw std::invalid_argument("frf_single_circuit: model must have exactly one circuit");
  if (!(R_l > 0)) throw std::invalid_argument("frf_single_circuit: R_l must be positive");
  return frf_voltage(sys, {CircuitLoad{CircuitKind::resistor, R_l, 0.0}}, grid_hz, opt);
}

FrequencyResponse frf_independent_circuits(const ReducedSystem& sys,
                                           const std::vector<double>& R_l,
                                           const Vec& grid_hz, const SweepOptions& opt) {
  if (R_l.size() != sys.Theta.size())
    throw std::invalid_argument("frf_independent_circuits: one resistance per circuit");
  std::vector<CircuitLoad> loads;
  for (double r : R_l) loads.push_back({CircuitKind::resistor, r, 0.0});
  return frf_voltage(sys, loads, grid_hz, opt);
}

FrequencyResponse frf_shunt(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                            const Vec& grid_hz, const SweepOptions& opt) {
  require_no_zero(grid_hz, "frf_shunt");
  return frf_voltage(sys, loads, grid_hz, opt);
}

cplx harmonic_displacement(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                           double omega, const Vec& obs, const Vec& rhs,
                           bool literal_inductor) {
  HarmonicSolution sol = solve_harmonic(sys, loads, omega, rhs, literal_inductor);
  return obs.cast<cplx>().dot(sol.w);
}

namespace {

template <class Sys>
FrequencyResponse tr_base_impl(const Sys& sys, const std::vector<CircuitLoad>& loads,
                               const Vec& grid_hz, const Vec& obs, const Vec& f_base,
                               const SweepOptions& opt) {
  require_no_zero(grid_hz, "transmissibility_base");
  return sweep(grid_hz, {"tr"}, opt, [&](double omega) {
    HarmonicSolution sol = solve_harmonic(sys, loads, omega, Vec(-f_base), opt.literal_inductor);
    // relative transmissibility: w_rel / (base displacement) = -w^2 w_rel / A_b
    const cplx tr = -omega * omega * obs.cast<cplx>().dot(sol.w);
    return std::vector<cplx>{tr};
  });
}

template <class Sys>
FrequencyResponse tr_force_impl(const Sys& sys, const std::vector<CircuitLoad>& loads,
                                const Vec& grid_hz, const Vec& obs_in, const Vec& obs_out,
                                const Vec& rhs, const SweepOptions& opt) {
  return sweep(grid_hz, {"tr"}, opt, [&](double omega) {
    HarmonicSolution sol = solve_harmonic(sys, loads, omega, rhs, opt.literal_inductor);
    const cplx win = obs_in.cast<cplx>().dot(sol.w);
    const cplx wout = obs_out.cast<cplx>().dot(sol.w);
    const double scale = sol.w.norm();
    cplx tr;
    if (std::abs(win) < 1e-14 * scale)
      tr = cplx(std::nan(""), std::nan("")); // input motion vanishes: undefined
    else
      tr = wout / win;
    return std::vector<cplx>{tr};
  });
}

} // namespace

FrequencyResponse transmissibility_base(const ReducedSystem& sys,
                                        const std::vector<CircuitLoad>& loads,
                                        const Vec& grid_hz, const Vec& obs,
                                        const SweepOptions& opt) {
  return tr_base_impl(sys, loads, grid_hz, obs, sys.F_base, opt);
}

FrequencyResponse transmissibility_base(const ModalReduction& red,
                                        const std::vector<CircuitLoad>& loads,
                                        const Vec& grid_hz, const Vec& obs_modal,
                                        const SweepOptions& opt) {
  return tr_base_impl(red, loads, grid_hz, obs_modal, red.f_base, opt);
}

FrequencyResponse transmissibility_force(const ReducedSystem& sys,
                                         const std::vector<CircuitLoad>& loads,
                                         const Vec& grid_hz, const Vec& obs_in,
                                         const Vec& obs_out, const Vec& rhs_force,
                                         const SweepOptions& opt) {
  return tr_force_impl(sys, loads, grid_hz, obs_in, obs_out, rhs_force, opt);
}

FrequencyResponse transmissibility_force(const ModalReduction& red,
                                         const std::vector<CircuitLoad>& loads,
                                         const Vec& grid_hz, const Vec& obs_in,
                                         const Vec& obs_out, const Vec& rhs_force,
                                         const SweepOptions& opt) {
  return tr_force_impl(red, loads, grid_hz, obs_in, obs_out, rhs_force, opt);
}

FrequencyResponse power_frf(const FrequencyResponse& voltage, double R_l) {
  if (!(R_l > 0)) throw std::invalid_argument("power_frf: R_l must be positive");
  FrequencyResponse out;
  out.freq_hz = voltage.freq_hz;
  for (size_t c = 0; c < voltage.names.size(); ++c) {
    std::string name = voltage.names[c];
    const size_t pos = name.find("voltage");
    if (pos != std::string::npos) name.replace(pos, 7, "power");
    else name = "power_" + name;
    CVec& ch = out.add(name);
    for (int i = 0; i < voltage.freq_hz.size(); ++i) {
      const double a = std::abs(voltage.data[c][i]);
      ch[i] = cplx(a * a / R_l, 0.0);
    }
  }
  return out;
}

} // namespace piga
