#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkop/types.hpp"

namespace mkop {

class WidthParameter;

/// 2n x 2n complex matrix stored in (A B; C D) block form with det = +1
/// (canonical) or -1 (anticanonical).
class ComplexSymplectic {
 public:
  explicit ComplexSymplectic(MatrixXcd m, int det_class = +1);

  static ComplexSymplectic from_abcd(cplx a, cplx b, cplx c, cplx d,
                                     int det_class = +1);
  static ComplexSymplectic identity(int n = 1);

  int n() const { return n_; }
  int det_class() const { return det_class_; }
  const MatrixXcd& matrix() const { return m_; }

  MatrixXcd A() const { return m_.topLeftCorner(n_, n_); }
  MatrixXcd B() const { return m_.topRightCorner(n_, n_); }
  MatrixXcd C() const { return m_.bottomLeftCorner(n_, n_); }
  MatrixXcd D() const { return m_.bottomRightCorner(n_, n_); }

  // scalar block accessors, n == 1 only
  cplx a() const { return m_(0, 0); }
  cplx b() const { return m_(0, 1); }
  cplx c() const { return m_(1, 0); }
  cplx d() const { return m_(1, 1); }

  ComplexSymplectic inverse() const;
  /// Entrywise conjugate (the "bar" matrix pairing bras with kets).
  ComplexSymplectic conjugated() const;
  /// diag(1,-1)-blockwise conjugation, i.e. (A,-B;-C,D). The integral kernels
  /// realize the Heisenberg relation with this twist of S; see the audit.
  ComplexSymplectic lambda_twist() const;

  ComplexSymplectic operator*(const ComplexSymplectic& rhs) const;

  bool is_real(double tol = 1e-12) const;
  /// Apply to a real phase-space vector; result is complex in general.
  VectorXcd apply(const VectorXd& qp) const;

  nlohmann::json to_json() const;
  static ComplexSymplectic from_json(const nlohmann::json& j);

 private:
  int n_;
  MatrixXcd m_;
  int det_class_;
};

/// Width label of a coherent state: a point of the Siegel upper half-space
/// (complex symmetric with positive definite imaginary part). n = 1 is the
/// complex upper half-plane.
class WidthParameter {
 public:
  WidthParameter() : WidthParameter(cplx(0.0, 1.0)) {}
  explicit WidthParameter(cplx value);
  explicit WidthParameter(MatrixXcd value);

  int n() const { return n_; }
  cplx scalar() const { return v_(0, 0); }
  const MatrixXcd& value() const { return v_; }
  MatrixXcd inverse() const { return v_.inverse(); }

  bool is_symmetric(double tol = 1e-12) const;
  /// Smallest eigenvalue of Im(value); admissible when > 0.
  double imag_min_eig() const;
  bool admissible() const;

  nlohmann::json to_json() const;
  static WidthParameter from_json(const nlohmann::json& j);

 private:
  int n_;
  MatrixXcd v_;
};

struct PhasePoint {
  VectorXd q;
  VectorXd p;

  PhasePoint() = default;
  PhasePoint(VectorXd q_, VectorXd p_) : q(std::move(q_)), p(std::move(p_)) {}
  static PhasePoint of(double q, double p);
  static PhasePoint zero(int n);

  int n() const { return static_cast<int>(q.size()); }
  /// Stacked (q, p) column vector.
  VectorXd qp() const;
  static PhasePoint from_qp(const VectorXd& qp);
  double norm() const { return qp().norm(); }
};

struct ExtendedPoint {
  PhasePoint z;
  WidthParameter alpha;
};

/// Real 2n x 2n linear map acting on phase-space centers.
struct TransportMatrix {
  MatrixXd m;

  int n() const { return static_cast<int>(m.rows()) / 2; }
  PhasePoint apply(const PhasePoint& z) const;
  TransportMatrix inverse() const { return TransportMatrix{m.inverse()}; }
  double imag_residual = 0.0;  // dropped imaginary part of the construction
};

struct PoleError : std::runtime_error {
  explicit PoleError(const std::string& what, cplx alpha_)
      : std::runtime_error(what), alpha(alpha_) {}
  cplx alpha;
};

struct DegenerateWidthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Moebius action S.alpha = (A alpha + B)(C alpha + D)^{-1}, symmetrized for
/// n > 1. The result may leave the upper half-space; admissibility is a
/// separate check.
WidthParameter moebius(const ComplexSymplectic& S, const WidthParameter& alpha);

/// Real solution of q' + beta p' = u for complex u, beta = given width.
PhasePoint real_center(const WidthParameter& beta, const VectorXcd& u,
                       double* imag_residual = nullptr);

/// The real-linear map z -> z' solving q' + beta p' = q^S + beta p^S with
/// beta = S.alpha and (q^S, p^S) = S(z).
TransportMatrix transport_matrix(const ComplexSymplectic& S,
                                 const WidthParameter& alpha);

/// Same defining relation but with the source point taken as Lambda S Lambda
/// applied to z. This is the center map the metaplectic kernels are measured
/// to realize (see convention_audit); it coincides with transport_matrix of
/// S^{-1} whenever a = d.
TransportMatrix kernel_center_map(const ComplexSymplectic& S,
                                  const WidthParameter& alpha);

/// Extended phase-space flow (z, alpha) -> (T z, S.alpha).
ExtendedPoint flow_map(const ComplexSymplectic& S, const ExtendedPoint& pt);

/// z ^ z' = p.q' - q.p'
double symplectic_form(const PhasePoint& z1, const PhasePoint& z2);

/// Joint admissibility: V.alpha finite and in the upper half space for
/// V = S^{-1}, Sbar^{-1}, S^{-1} Sbar (the images the off-diagonal
/// representation needs).
bool admissible_triple(const ComplexSymplectic& S, const WidthParameter& alpha);

/// Bounded scan of the upper half-plane (n = 1) for an alpha passing
/// admissible_triple. Scan order: |log10 Im| ascending, then |Re| ascending,
/// so the first candidate tried is alpha = i.
std::optional<WidthParameter> admissible_alpha_search(
    const ComplexSymplectic& S, int grid_density);

/// One row of a flow composition audit: residuals of Phi_{S S2} against each
/// candidate composition convention at one sample point.
struct FlowAuditRow {
  PhasePoint z;
  cplx alpha;
  std::vector<double> residual;  // one entry per convention
};

struct FlowAuditReport {
  std::vector<std::string> conventions;
  std::vector<FlowAuditRow> rows;
  /// conventions whose residual stays below tol on every sample
  std::vector<std::string> matching;
  double tol = 1e-9;

  nlohmann::json to_json() const;
};

/// Evaluates Phi_{S S2} against the four composition conventions
/// (either order, with and without inverse substitution) on the samples.
/// Data, not a pass/fail.
FlowAuditReport flow_composition_audit(const ComplexSymplectic& S,
                                       const ComplexSymplectic& S2,
                                       const std::vector<ExtendedPoint>& samples);

nlohmann::json complex_to_json(cplx v);
cplx complex_from_json(const nlohmann::json& j);

}  // namespace mkop
