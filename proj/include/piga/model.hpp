#ifndef PIGA_MODEL_HPP
#define PIGA_MODEL_HPP

#include "piga/nurbs.hpp"
#include "piga/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace piga {

struct ElasticMaterial {
  double E;   // Young's modulus [Pa]
  double nu;  // Poisson ratio
  double rho; // density [kg/m^3]
  std::string name;
};

/// Plane-stress piezoelectric constants (poling in z).
struct PiezoMaterial {
  double c11, c12, c22, c66; // [Pa]
  double e31, e32;           // [C/m^2]
  double eps33;              // permittivity at constant strain [F/m]
  double rho;                // [kg/m^3]
  std::string name;
};

/// C_s = E/(1-nu^2) [[1,nu,0],[nu,1,0],[0,0,(1-nu)/2]]
Mat3 plane_stress_elastic(const ElasticMaterial& mat);

struct PiezoConstitutive {
  Mat3 C;       // elastic block at constant field
  Vec3 e;       // {e31, e32, 0}
  double eps33;
};
PiezoConstitutive piezo_constitutive(const PiezoMaterial& mat);

enum class LayerTopology { bimorph, unimorph };
enum class Wiring { series, parallel };

struct LayerStack {
  double t_s = 0;                     // substrate thickness [m]
  double t_p = 0;                     // per-layer piezo thickness [m]
  ElasticMaterial substrate;
  std::optional<PiezoMaterial> piezo; // present iff t_p > 0
  LayerTopology topology = LayerTopology::bimorph;
  Wiring connection = Wiring::series;

  int piezo_layer_count() const {
    if (!piezo) return 0;
    return topology == LayerTopology::bimorph ? 2 : 1;
  }
  double total_thickness() const { return t_s + piezo_layer_count() * t_p; }
};

/// Thickness-integral constants of one layup, evaluated about the
/// transformed-section neutral axis (midplane for symmetric bimorphs).
struct LayupConstants {
  double z_bar;        // neutral-axis offset from substrate midplane [m]
  double mass_trans;   // rho_s t_s + n rho_p t_p            [kg/m^2]
  double mass_rot;     // second moment of density about z_bar [kg]
  double I_s;          // substrate second moment about z_bar  [m^3]
  double I_p_total;    // total piezo second moment about z_bar [m^3]
  double coupling;     // electrical moment per unit voltage and e [m]
  double cap_per_area; // capacitance per unit electrode area  [F/m^2]
  Mat3 Cs;
  Mat3 Cp;             // zero when no piezo layer
  Vec3 e;              // zero when no piezo layer
  Mat3 D;              // bending stiffness matrix I_s Cs + I_p_total Cp [N m]
};
LayupConstants layup_constants(const LayerStack& stack);

struct PatchRegion {
  NurbsSurfacePatch patch;
  LayerStack stack;
  int electrode = -1; // circuit id, or -1 for none
};

struct EdgeRef {
  int patch = -1;
  EdgeId edge = EdgeId::u0;
  bool operator==(const EdgeRef& o) const { return patch == o.patch && edge == o.edge; }
};

/// Parameter sub-interval of an edge (edge coordinate in [0,1]).
struct EdgeSpan {
  double lo = 0.0, hi = 1.0;
  double length() const { return hi - lo; }
};

struct InterfaceSpec {
  EdgeRef a, b;
  EdgeSpan span_a, span_b; // overlapping portions; full edges by default
  bool conforming = false;
};

enum class BcKind { simply_supported, clamped, free_edge };

struct BoundaryCondition {
  EdgeRef target;
  BcKind kind = BcKind::simply_supported;
};

enum class AttachmentKind { point_mass, point_force };

struct PointAttachment {
  AttachmentKind kind = AttachmentKind::point_mass;
  Vec2 location; // physical [m]
  double value;  // [kg] or [N]
};

enum class CircuitKind { resistor, shunt, open_circuit, short_circuit };

struct CircuitSpec {
  int id = 0;
  std::vector<int> patches;
  CircuitKind kind = CircuitKind::resistor;
  double R_l = 0.0;     // [Ohm]
  double L_k = 0.0;     // [H]; 0 means derive from omega_t
  double omega_t = 0.0; // shunt target [rad/s]
};

struct RayleighDamping {
  double alpha = 0.0; // [1/s]
  double beta = 0.0;  // [s]
};

/// Fit (alpha, beta) so the modal damping ratio is z1 at w1 and z2 at w2.
RayleighDamping fit_rayleigh(double w1, double z1, double w2, double z2);

struct MultiPatchModel {
  std::vector<PatchRegion> regions;
  std::vector<InterfaceSpec> interfaces;
  std::vector<BoundaryCondition> bcs;
  std::vector<PointAttachment> attachments;
  std::vector<CircuitSpec> circuits;
  RayleighDamping damping;
};

/// Geometric edge matching by sampled-point proximity. Detects full and
/// partial overlaps; an interface is flagged conforming when the two sides'
/// knot images coincide over the shared portion.
std::vector<InterfaceSpec> detect_interfaces(const std::vector<PatchRegion>& regions,
                                             double tol = 1e-9);

/// All type invariants plus cross-checks; returns human-readable violations.
std::vector<std::string> validate_model(const MultiPatchModel& model);

/// Locate a physical point in some patch of the model.
bool locate_in_model(const MultiPatchModel& model, const Vec2& x, int& patch_out,
                     Vec2& xi_out);

/// Distance from x to the nearest point of a patch edge; tau_out receives the
/// edge parameter of the projection (Newton with multi-start, clamped).
double project_to_edge(const NurbsSurfacePatch& patch, EdgeId edge, const Vec2& x,
                       double& tau_out);

/// Built-in material registry. Elastic: aluminum, steel, copper, brass,
/// khattak-substrate. Piezo: pzt-5a, pzt-5h. Throws on unknown names.
ElasticMaterial elastic_material(const std::string& name);
PiezoMaterial piezo_material(const std::string& name);

} // namespace piga

#endif
