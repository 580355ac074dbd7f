// scratch: convergence table for the sinusoidally loaded square plate
#include "piga/assembly.hpp"
#include "piga/solver.hpp"

#include <cmath>
#include <cstdio>

using namespace piga;

namespace {

LayerStack plain_stack() {
  LayerStack s;
  s.t_s = 0.01;
  s.substrate = ElasticMaterial{100e6, 0.3, 1000.0, "test"};
  return s;
}

MultiPatchModel inclined_two_patch(double a, int degree, int refine) {
  const double t = std::tan(30.0 * pi / 180.0);
  const double x0 = a / 2 - t * a / 2, x1 = a / 2 + t * a / 2;
  MultiPatchModel m;
  NurbsSurfacePatch p1 = make_bilinear_patch(Vec2(0, 0), Vec2(x0, 0), Vec2(0, a), Vec2(x1, a), 1);
  NurbsSurfacePatch p2 = make_bilinear_patch(Vec2(x0, 0), Vec2(a, 0), Vec2(x1, a), Vec2(a, a), 1);
  for (int d = 1; d < degree; ++d) {
    p1 = p_elevate(p1);
    p2 = p_elevate(p2);
  }
  m.regions.push_back({h_refine_uniform(p1, refine), plain_stack(), -1});
  m.regions.push_back({h_refine_uniform(p2, refine), plain_stack(), -1});
  m.interfaces = detect_interfaces(m.regions);
  return m;
}

MultiPatchModel vertical_two_patch(double a, int degree, int refine) {
  MultiPatchModel m;
  m.regions.push_back(
      {h_refine_uniform(make_rectangle_patch(0, 0, a / 2, a, degree), refine), plain_stack(), -1});
  m.regions.push_back(
      {h_refine_uniform(make_rectangle_patch(a / 2, 0, a, a, degree), refine), plain_stack(), -1});
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

int main(int argc, char** argv) {
  const double a = 10.0, q0 = -10.0;
  const double D0 = 100e6 * 1e-6 / (12.0 * 0.91);
  const double theta_pen = argc > 1 ? std::atof(argv[1]) : 1e2;

  auto run = [&](int kind, int degree, int refine) {
    MultiPatchModel m = kind == 0   ? single_square(a, degree, refine)
                        : kind == 1 ? vertical_two_patch(a, degree, refine)
                                    : inclined_two_patch(a, degree, refine);
    simply_support_boundary(m);
    LoadSpec load;
    load.distributed = [&](const Vec2& x) {
      return q0 * std::sin(pi * x[0] / a) * std::sin(pi * x[1] / a);
    };
    AssemblyOptions opt;
    opt.theta_pen = theta_pen;
    GlobalSystem sys = assemble_system(m, opt, &load);
    ReducedSystem red = apply_constraints(sys, m);
    Vec w = red.expand(solve_static(red.K, red.F_ext));

    double num = 0, den = 0;
    for (int p = 0; p < static_cast<int>(m.regions.size()); ++p)
      for (const auto& eq : element_rule(m.regions[p].patch, degree + 2, degree + 2))
        for (const auto& qp : eq.points) {
          BasisBlock bb = rational_basis_2d(m.regions[p].patch, qp.xi, 0);
          double wh = 0;
          for (int i = 0; i < bb.active.size(); ++i)
            wh += bb.der(i, 0) * w[sys.dofs.dof(p, bb.active[i])];
          const double we = q0 / (pi * pi * pi * pi * D0 * std::pow(2.0 / (a * a), 2)) *
                            std::sin(pi * qp.frame.x[0] / a) * std::sin(pi * qp.frame.x[1] / a);
          num += qp.weight * (wh - we) * (wh - we);
          den += qp.weight * we * we;
        }
    return std::sqrt(num / den);
  };

  for (int degree : {2, 3}) {
    std::printf("degree %d (theta_pen = %g)\n", degree, theta_pen);
    std::printf("%8s %14s %14s %14s %10s %10s\n", "refine", "single", "case-I", "case-II",
                "ratio-I", "ratio-II");
    for (int refine = 1; refine <= 5; ++refine) {
      const double es = run(0, degree, refine);
      const double e1 = run(1, degree, refine);
      const double e2 = run(2, degree, refine);
      std::printf("%8d %14.6e %14.6e %14.6e %10.3f %10.3f\n", refine, es, e1, e2, e1 / es,
                  e2 / es);
    }
  }
  return 0;
}
