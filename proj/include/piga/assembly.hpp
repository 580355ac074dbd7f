#ifndef PIGA_ASSEMBLY_HPP
#define PIGA_ASSEMBLY_HPP

#include "piga/model.hpp"
#include "piga/quadrature.hpp"
#include "piga/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace piga {

/// One transverse-deflection DOF per control point; patches do not share
/// DOFs (coupling is weak, through the interface terms only).
struct DofMap {
  std::vector<int> offsets;
  int total = 0;

  int dof(int patch, int local) const { return offsets[patch] + local; }
};
DofMap build_dofmap(const MultiPatchModel& model);

/// Matched quadrature interval of one interface.
struct InterfaceSegment {
  double a_lo = 0, a_hi = 0; // side-a edge parameters
  double b_lo = 0, b_hi = 0; // matched side-b edge parameters
  double arc_length = 0;     // [m]
};

std::vector<InterfaceSegment> interface_segments(const InterfaceSpec& spec,
                                                 const std::vector<PatchRegion>& regions);

struct LoadSpec {
  std::function<double(const Vec2&)> distributed; // q(x, y) [N/m^2]
  std::vector<std::pair<Vec2, double>> point_forces;
};

struct AssemblyOptions {
  double gamma = 0.5;      // interface averaging weight
  double theta_pen = 1e2;  // stabilization multiplier
  int quad_extra = 0;      // extra Gauss points per direction
  bool paper_literal = false;
};

struct GlobalSystem {
  DofMap dofs;
  SpMat M;
  SpMat K;                       // bulk + interface terms
  SpMat C;                       // Rayleigh damping
  std::vector<int> circuit_ids;  // order of the per-circuit arrays below
  std::vector<Vec> Theta;        // electromechanical coupling, bulk + interface
  std::vector<double> Cp;        // capacitance [F]
  Vec F_base;                    // M r
  Vec F_ext;                     // assembled load
};

SpMat assemble_mass(const MultiPatchModel& model, const DofMap& dofs,
                    const AssemblyOptions& opt = {});
SpMat assemble_stiffness_bulk(const MultiPatchModel& model, const DofMap& dofs,
                              const AssemblyOptions& opt = {});
/// Additive interface contributions K_n + K_s + K_c, plus the interface part
/// of the coupling vectors (accumulated into theta_by_circuit when given).
SpMat assemble_nitsche(const MultiPatchModel& model, const DofMap& dofs,
                       const AssemblyOptions& opt = {},
                       std::vector<Vec>* theta_by_circuit = nullptr,
                       const std::vector<int>* circuit_ids = nullptr);
std::vector<Vec> assemble_coupling(const MultiPatchModel& model, const DofMap& dofs,
                                   const std::vector<int>& circuit_ids,
                                   const AssemblyOptions& opt = {});
std::vector<double> compute_capacitance(const MultiPatchModel& model,
                                        const std::vector<int>& circuit_ids);
Vec assemble_load(const MultiPatchModel& model, const DofMap& dofs, const LoadSpec& load,
                  const AssemblyOptions& opt = {});

GlobalSystem assemble_system(const MultiPatchModel& model, const AssemblyOptions& opt = {},
                             const LoadSpec* load = nullptr);

/// Constrained view of a GlobalSystem after strong BC elimination.
struct ReducedSystem {
  SpMat M, K, C;
  std::vector<int> circuit_ids;
  std::vector<Vec> Theta;
  std::vector<double> Cp;
  Vec F_base, F_ext;
  std::vector<int> keep; // global indices of free DOFs
  int full_size = 0;

  Vec expand(const Vec& reduced) const;
  CVec expand(const CVec& reduced) const;
  Vec restrict_vec(const Vec& full) const;
};

ReducedSystem apply_constraints(const GlobalSystem& sys, const MultiPatchModel& model);

/// Constrained DOF indices implied by the model's boundary conditions.
std::vector<int> constrained_dofs(const MultiPatchModel& model, const DofMap& dofs);

/// Coordinate-format text export: one "rows cols nnz" header line, then
/// "row col value" triples.
void export_matrix(const SpMat& A, const std::string& path);

} // namespace piga

#endif
