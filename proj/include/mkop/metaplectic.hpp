#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkop/coherent.hpp"
#include "mkop/grid.hpp"
#include "mkop/symplectic.hpp"

namespace mkop {

struct KernelBuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discretized integral-kernel operator for a complex canonical matrix.
/// Charts: "b-chart" (dense Gaussian kernel), "delta-limit" (b = 0 scaling
/// with a chirp), "a-chart" (Fourier-side multiplier; also the regularization
/// used when the position-side Gaussian grows on the grid box).
class MetaplecticKernel {
 public:
  ComplexSymplectic S;
  GridSpec grid;
  std::string chart;

  WaveFunction apply(const WaveFunction& psi) const;
  /// Dense kernel-value matrix (assembled on demand for the a-chart).
  const OperatorMatrix& op() const;

  // factory use only
  MetaplecticKernel(ComplexSymplectic S_, GridSpec grid_, std::string chart_)
      : S(std::move(S_)), grid(grid_), chart(std::move(chart_)) {}
  std::shared_ptr<OperatorMatrix> dense;  // set for b-chart / delta-limit
  VectorXcd multiplier;                   // a-chart: values on the conjugate lattice

 private:
  mutable std::shared_ptr<OperatorMatrix> assembled_;
};

/// Largest admissible magnitude of a kernel-entry exponent before the dense
/// matrix stops being representable in doubles.
inline constexpr double kKernelExpCap = 600.0;

MetaplecticKernel kernel_build(const ComplexSymplectic& S, const GridSpec& grid);

struct PropagatedPrediction {
  CoherentLabel label;
  cplx scalar;
};

/// The propagation law exactly as printed: beta = S.alpha,
/// w = transport_matrix(S, alpha) z, scalar = (a + b/alpha)^{-1/2}
/// (Im (S.alpha)^{-1} / Im alpha^{-1})^{1/4} e^{i S(z) ^ w / (2 hbar)}.
/// A hypothesis generator; the audit decides what the kernel realizes.
PropagatedPrediction closed_form_propagate(const ComplexSymplectic& S,
                                           const CoherentLabel& label,
                                           double hbar);

struct AuditCase {
  std::string name;
  ComplexSymplectic S;
  WidthParameter alpha;
  std::vector<PhasePoint> zs;
};

struct FamilyFit {
  std::string family;
  double beta_err = 0.0;
  double w_err = 0.0;
  double worst() const { return std::max(beta_err, w_err); }
};

struct AuditCaseResult {
  std::string name;
  bool fed_inverse = false;  // kernel built from S^{-1} when S itself is not
                             // grid-representable
  double fit_residual = 0.0;
  cplx fitted_beta;
  PhasePoint fitted_w;
  cplx fitted_lambda;
  cplx lambda_ratio;  // fitted / closed-form prediction at the fed matrix
  std::vector<FamilyFit> families;
  std::string best_family;
};

struct MetaArrangementRow {
  std::string arrangement;
  double residual = 0.0;
};

struct ConventionReport {
  std::vector<AuditCaseResult> cases;
  std::string winning_family;
  bool unique_winner = false;
  double winner_worst_error = 0.0;
  std::vector<MetaArrangementRow> meta_rows;  // Heisenberg-relation audit
  std::string meta_arrangement;

  nlohmann::json to_json() const;
};

/// The four hypothesis families {moebius of M or M^{-1}} x {transport source
/// M or M^{-1}}, fitted against kernel-propagated coherent states.
ConventionReport convention_audit(const std::vector<AuditCase>& cases,
                                  const GridSpec& grid);

/// The z-dependent part of the propagation scalar under the audited
/// conventions: e^{i (Lambda S Lambda z) ^ w / (2 hbar)} with w the audited
/// real center and the wedge extended bilinearly. Dividing the fitted scalar
/// by this leaves a z-independent constant.
cplx audited_propagation_phase(const ComplexSymplectic& S,
                               const WidthParameter& alpha, const PhasePoint& z,
                               double hbar);

/// free evolution t in {0.1, 0.25}, gaussian multiplier t in {0.1, 0.25},
/// complexified oscillator t = 0.2; alpha = i.
std::vector<AuditCase> standard_audit_cases();

ComplexSymplectic case_free_evolution(double t);
ComplexSymplectic case_gaussian_multiplier(double t);
ComplexSymplectic case_complex_oscillator(double t);
ComplexSymplectic case_rotation(double theta);
ComplexSymplectic case_shear(double s);

/// Heisenberg-relation residuals ||conj(U) Z U - (target rows)|| for each
/// conjugation arrangement, interior-truncated; real S only (uses U^* for
/// U^{-1}).
std::vector<MetaArrangementRow> meta_relation_audit(const ComplexSymplectic& S,
                                                    const GridSpec& grid);

struct ComposeCheckRow {
  CoherentLabel probe;
  cplx best_scalar;
  double residual;
};

struct ComposeCheckReport {
  std::vector<ComposeCheckRow> rows;
  double worst = 0.0;
};

/// || U(S) U(S2) psi - c U(S S2) psi || / || U(S S2) psi || minimized over c.
ComposeCheckReport kernel_compose_check(const ComplexSymplectic& S,
                                        const ComplexSymplectic& S2,
                                        const GridSpec& grid,
                                        const std::vector<CoherentLabel>& probes);

}  // namespace mkop
