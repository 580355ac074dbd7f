#ifndef PIGA_SOLVER_HPP
#define PIGA_SOLVER_HPP

#include "piga/assembly.hpp"
#include "piga/model.hpp"
#include "piga/types.hpp"

#include <string>
#include <vector>

namespace piga {

/// Direct sparse solve of K w = F (LDLT with LU fallback), relative residual
/// checked against 1e-10.
Vec solve_static(const SpMat& K, const Vec& F);

/// Mass-normalized modal basis: shapes^T M shapes = I, frequencies ascending.
struct ModalBasis {
  Vec omega; // [rad/s]
  Mat shapes;
};

struct ModalOptions {
  double tol = 1e-8;       // relative eigen-residual
  int max_iter = 300;
  int dense_threshold = 1500;
  unsigned seed = 0x5eed;
};

ModalBasis solve_modal(const SpMat& K, const SpMat& M, int n_modes,
                       const ModalOptions& opt = {});

SpMat rayleigh_damping(const SpMat& M, const SpMat& K, double alpha, double beta);

/// Named complex channels over a strictly increasing frequency grid.
struct FrequencyResponse {
  Vec freq_hz;
  std::vector<std::string> names;
  std::vector<CVec> data;

  CVec& add(const std::string& name);
  const CVec& channel(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// Electrical termination of one circuit for a harmonic analysis.
struct CircuitLoad {
  CircuitKind kind = CircuitKind::resistor;
  double R = 1e4; // [Ohm]
  double L = 0.0; // [H], shunts only
};

/// Resolve runtime loads from the model's circuit specs; shunt inductance
/// defaults to 1/(Cp w_t^2) from the assembled capacitances (or the printed
/// 1/(Cp w_t) rule under literal mode).
std::vector<CircuitLoad> resolve_circuit_loads(const MultiPatchModel& model,
                                               const std::vector<int>& circuit_ids,
                                               const std::vector<double>& Cp,
                                               bool literal_inductor = false);

/// Feedback scale s(w) = j w (Y + j w Cp)^(-1) with Y the branch admittance.
cplx circuit_scale(const CircuitLoad& load, double Cp, double omega,
                   bool literal_inductor = false);

/// Complex response at one frequency, per unit input amplitude.
struct HarmonicSolution {
  CVec w; // deflection DOFs (reduced space)
  CVec v; // one voltage per circuit
};

HarmonicSolution solve_harmonic(const ReducedSystem& sys,
                                const std::vector<CircuitLoad>& loads, double omega,
                                const Vec& rhs, bool literal_inductor = false);

/// Truncated modal representation of a ReducedSystem (mass-normalized, so the
/// reduced mass matrix is the identity).
struct ModalReduction {
  Vec omega;                  // [rad/s]
  Mat phi;                    // reduced-DOF x K
  Vec k_o;                    // diag(omega^2)
  Mat c_o;                    // phi^T C phi
  std::vector<int> circuit_ids;
  std::vector<Vec> theta_o;   // phi^T Theta
  std::vector<double> Cp;
  Vec f_base;                 // phi^T M r
  Vec f_ext;
};

ModalReduction mor_reduce(const ReducedSystem& sys, const ModalBasis& basis, int n_modes);

HarmonicSolution solve_harmonic(const ModalReduction& red,
                                const std::vector<CircuitLoad>& loads, double omega,
                                const Vec& rhs_modal, bool literal_inductor = false);

struct SweepOptions {
  int workers = 1;
  bool literal_inductor = false;
  bool adaptive = false;   // insert midpoints where |H| jumps >10%
  int adaptive_passes = 2;
};

/// Basis row at a physical point, restricted to free DOFs. w(x) = obs . w_hat.
Vec observation_vector(const MultiPatchModel& model, const ReducedSystem& sys,
                       const Vec2& x);

Vec log_grid(double fmin_hz, double fmax_hz, int n);
Vec lin_grid(double fmin_hz, double fmax_hz, int n);

// Voltage FRFs per unit base acceleration [V s^2/m].
FrequencyResponse frf_single_circuit(const ReducedSystem& sys, double R_l,
                                     const Vec& grid_hz, const SweepOptions& opt = {});
FrequencyResponse frf_independent_circuits(const ReducedSystem& sys,
                                           const std::vector<double>& R_l,
                                           const Vec& grid_hz,
                                           const SweepOptions& opt = {});
FrequencyResponse frf_shunt(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                            const Vec& grid_hz, const SweepOptions& opt = {});

cplx harmonic_displacement(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                           double omega, const Vec& obs, const Vec& rhs,
                           bool literal_inductor = false);

/// Base-relative transmissibility TR = -w^2 w_rel(x_out)/A_b ("tr" channel).
FrequencyResponse transmissibility_base(const ReducedSystem& sys,
                                        const std::vector<CircuitLoad>& loads,
                                        const Vec& grid_hz, const Vec& obs,
                                        const SweepOptions& opt = {});
FrequencyResponse transmissibility_base(const ModalReduction& red,
                                        const std::vector<CircuitLoad>& loads,
                                        const Vec& grid_hz, const Vec& obs_modal,
                                        const SweepOptions& opt = {});

/// Point-to-point transmissibility TR = w(x_out)/w(x_in) under a unit point
/// force at x_in; undefined samples (vanishing input motion) become NaN.
FrequencyResponse transmissibility_force(const ReducedSystem& sys,
                                         const std::vector<CircuitLoad>& loads,
                                         const Vec& grid_hz, const Vec& obs_in,
                                         const Vec& obs_out, const Vec& rhs_force,
                                         const SweepOptions& opt = {});
FrequencyResponse transmissibility_force(const ModalReduction& red,
                                         const std::vector<CircuitLoad>& loads,
                                         const Vec& grid_hz, const Vec& obs_in,
                                         const Vec& obs_out, const Vec& rhs_force,
                                         const SweepOptions& opt = {});

// Voltage FRFs from a modal reduction.
FrequencyResponse frf_voltage(const ModalReduction& red, const std::vector<CircuitLoad>& loads,
                              const Vec& grid_hz, const SweepOptions& opt = {});
FrequencyResponse frf_voltage(const ReducedSystem& sys, const std::vector<CircuitLoad>& loads,
                              const Vec& grid_hz, const SweepOptions& opt = {});

/// Elementwise |V|^2 / R_l for every voltage channel.
FrequencyResponse power_frf(const FrequencyResponse& voltage, double R_l);

} // namespace piga

#endif
