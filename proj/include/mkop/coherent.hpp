#pragma once

#include <json.hpp>

#include "mkop/grid.hpp"
#include "mkop/symplectic.hpp"
#include "mkop/types.hpp"

namespace mkop {

struct CoherentLabel {
  PhasePoint z;
  WidthParameter alpha;

  static CoherentLabel of(double q, double p, cplx alpha) {
    return CoherentLabel{PhasePoint::of(q, p), WidthParameter(alpha)};
  }

  nlohmann::json to_json() const;
  static CoherentLabel from_json(const nlohmann::json& j);
};

/// Normalization prefactor (pi hbar)^{-n/4} |det Im(alpha^{-1})|^{1/4}; for
/// n = 1 this is (Im alpha / (pi hbar |alpha|^2))^{1/4}.
double coherent_prefactor(const WidthParameter& alpha, double hbar);

/// Pointwise value of psi^alpha_z at position x (any dimension):
///   pref * exp(-(i/2hbar)(x-q).alpha^{-1}(x-q) + i p.x/hbar - i p.q/(2hbar)).
cplx coherent_eval(const CoherentLabel& label, const VectorXd& x, double hbar);

WaveFunction coherent_state(const CoherentLabel& label, const GridSpec& grid);

/// <psi_a | psi_b> by exact complex Gaussian integration (n = 1). Validated
/// against grid inner_product before use anywhere else.
cplx overlap_closed_form(const CoherentLabel& a, const CoherentLabel& b,
                         double hbar);

/// |x + alpha xi - (q + alpha p)| : zero iff (x, xi) lies on the complex
/// Lagrangian of the state (n = 1).
double lagrangian_residual(const CoherentLabel& label, cplx x, cplx xi);

struct LagrangianAuditRow {
  std::string convention;
  double max_residual;
};

struct LagrangianAuditReport {
  std::vector<LagrangianAuditRow> rows;
  std::string best;
  nlohmann::json to_json() const;
};

/// Samples points of the state's complex Lagrangian, pushes them through
/// S^{-1} (and S), and reports membership residuals in the transported
/// Lagrangian under each convention variant.
LagrangianAuditReport lagrangian_transport_check(const ComplexSymplectic& S,
                                                 const CoherentLabel& label,
                                                 int samples);

}  // namespace mkop
