#include "mkop/symplectic.hpp"

#include <algorithm>
#include <cmath>

namespace mkop {

namespace {

MatrixXcd symplectic_unit(int n) {
  MatrixXcd J = MatrixXcd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = MatrixXcd::Identity(n, n);
  J.bottomLeftCorner(n, n) = -MatrixXcd::Identity(n, n);
  return J;
}

}  // namespace

ComplexSymplectic::ComplexSymplectic(MatrixXcd m, int det_class)
    : m_(std::move(m)), det_class_(det_class) {
  if (m_.rows() != m_.cols() || m_.rows() % 2 != 0 || m_.rows() == 0)
    throw std::invalid_argument("ComplexSymplectic: need a 2n x 2n matrix");
  n_ = static_cast<int>(m_.rows()) / 2;
  if (det_class_ != 1 && det_class_ != -1)
    throw std::invalid_argument("ComplexSymplectic: det_class must be +1 or -1");
  const cplx det = m_.determinant();
  if (std::abs(det - cplx(det_class_, 0.0)) > 1e-12 * std::max(1.0, m_.norm()))
    throw std::invalid_argument("ComplexSymplectic: determinant is not det_class");
  if (det_class_ == 1 && n_ > 1) {
    const MatrixXcd J = symplectic_unit(n_);
    if ((m_.transpose() * J * m_ - J).norm() > 1e-12 * std::max(1.0, m_.squaredNorm()))
      throw std::invalid_argument("ComplexSymplectic: S^T J S != J");
  }
}

ComplexSymplectic ComplexSymplectic::from_abcd(cplx a, cplx b, cplx c, cplx d,
                                               int det_class) {
  MatrixXcd m(2, 2);
  m << a, b, c, d;
  return ComplexSymplectic(std::move(m), det_class);
}

ComplexSymplectic ComplexSymplectic::identity(int n) {
  return ComplexSymplectic(MatrixXcd::Identity(2 * n, 2 * n), +1);
}

ComplexSymplectic ComplexSymplectic::inverse() const {
  return ComplexSymplectic(m_.inverse(), det_class_);
}

ComplexSymplectic ComplexSymplectic::conjugated() const {
  return ComplexSymplectic(m_.conjugate(), det_class_);
}

ComplexSymplectic ComplexSymplectic::lambda_twist() const {
  MatrixXcd t = m_;
  t.topRightCorner(n_, n_) *= -1.0;
  t.bottomLeftCorner(n_, n_) *= -1.0;
  return ComplexSymplectic(std::move(t), det_class_);
}

ComplexSymplectic ComplexSymplectic::operator*(const ComplexSymplectic& rhs) const {
  return ComplexSymplectic(m_ * rhs.m_, det_class_ * rhs.det_class_);
}

bool ComplexSymplectic::is_real(double tol) const {
  return m_.imag().cwiseAbs().maxCoeff() <= tol;
}

VectorXcd ComplexSymplectic::apply(const VectorXd& qp) const {
  return m_ * qp.cast<cplx>();
}

nlohmann::json ComplexSymplectic::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 2 * n_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 2 * n_; ++j) row.push_back(complex_to_json(m_(i, j)));
    rows.push_back(row);
  }
  return {{"n", n_}, {"rows", rows}, {"det_class", det_class_}};
}

ComplexSymplectic ComplexSymplectic::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  MatrixXcd m(2 * n, 2 * n);
  const auto& rows = j.at("rows");
  for (int i = 0; i < 2 * n; ++i)
    for (int k = 0; k < 2 * n; ++k) m(i, k) = complex_from_json(rows.at(i).at(k));
  const int dc = j.contains("det_class") ? j.at("det_class").get<int>() : +1;
  return ComplexSymplectic(std::move(m), dc);
}

WidthParameter::WidthParameter(cplx value) : n_(1), v_(1, 1) { v_(0, 0) = value; }

WidthParameter::WidthParameter(MatrixXcd value) : v_(std::move(value)) {
  if (v_.rows() != v_.cols() || v_.rows() == 0)
    throw std::invalid_argument("WidthParameter: need a square matrix");
  n_ = static_cast<int>(v_.rows());
}

bool WidthParameter::is_symmetric(double tol) const {
  return (v_ - v_.transpose()).norm() <= tol * std::max(1.0, v_.norm());
}

double WidthParameter::imag_min_eig() const {
  if (n_ == 1) return v_(0, 0).imag();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(
      (0.5 * (v_.imag() + v_.imag().transpose())).eval());
  return es.eigenvalues().minCoeff();
}

bool WidthParameter::admissible() const {
  return is_symmetric() && imag_min_eig() > 0.0;
}

nlohmann::json WidthParameter::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < n_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < n_; ++j) row.push_back(complex_to_json(v_(i, j)));
    rows.push_back(row);
  }
  return rows;
}

WidthParameter WidthParameter::from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  MatrixXcd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) v(i, k) = complex_from_json(j.at(i).at(k));
  return WidthParameter(std::move(v));
}

PhasePoint PhasePoint::of(double q, double p) {
  VectorXd vq(1), vp(1);
  vq << q;
  vp << p;
  return PhasePoint(vq, vp);
}

PhasePoint PhasePoint::zero(int n) {
  return PhasePoint(VectorXd::Zero(n), VectorXd::Zero(n));
}

VectorXd PhasePoint::qp() const {
  VectorXd v(2 * n());
  v << q, p;
  return v;
}

PhasePoint PhasePoint::from_qp(const VectorXd& qp) {
  const int n = static_cast<int>(qp.size()) / 2;
  return PhasePoint(qp.head(n), qp.tail(n));
}

PhasePoint TransportMatrix::apply(const PhasePoint& z) const {
  return PhasePoint::from_qp(m * z.qp());
}

WidthParameter moebius(const ComplexSymplectic& S, const WidthParameter& alpha) {
  const int n = S.n();
  if (alpha.n() != n) throw std::invalid_argument("moebius: dimension mismatch");
  const MatrixXcd den = S.C() * alpha.value() + S.D();
  Eigen::FullPivLU<MatrixXcd> lu(den);
  if (!lu.isInvertible() ||
      std::abs(den.determinant()) < 1e-14 * std::max(1.0, alpha.value().norm()))
    throw PoleError("moebius: C alpha + D is singular", alpha.value()(0, 0));
  MatrixXcd r = (S.A() * alpha.value() + S.B()) * lu.inverse();
  if (n > 1) r = 0.5 * (r + r.transpose().eval());  // symmetrize
  return WidthParameter(std::move(r));
}

PhasePoint real_center(const WidthParameter& beta, const VectorXcd& u,
                       double* imag_residual) {
  const int n = beta.n();
  const MatrixXd im = beta.value().imag();
  Eigen::FullPivLU<MatrixXd> lu(im);
  if (!lu.isInvertible())
    throw DegenerateWidthError("real_center: Im(beta) is singular");
  const VectorXd p = lu.solve(u.imag());
  const VectorXd q = u.real() - beta.value().real() * p;
  if (imag_residual) {
    // reconstruction must land back on u exactly; any residue comes from the
    // linear solve
    VectorXcd rec = q.cast<cplx>() + beta.value() * p.cast<cplx>();
    *imag_residual = (rec - u).norm();
  }
  return PhasePoint(q, p);
}

namespace {

TransportMatrix center_map_impl(const ComplexSymplectic& source,
                                const WidthParameter& beta) {
  const int n = source.n();
  MatrixXd T(2 * n, 2 * n);
  double worst = 0.0;
  for (int col = 0; col < 2 * n; ++col) {
    VectorXd e = VectorXd::Zero(2 * n);
    e(col) = 1.0;
    const VectorXcd w = source.apply(e);
    const VectorXcd u = w.head(n) + beta.value() * w.tail(n);
    double res = 0.0;
    const PhasePoint out = real_center(beta, u, &res);
    worst = std::max(worst, res);
    T.col(col) = out.qp();
  }
  TransportMatrix t{std::move(T)};
  t.imag_residual = worst;
  return t;
}

}  // namespace

TransportMatrix transport_matrix(const ComplexSymplectic& S,
                                 const WidthParameter& alpha) {
  const WidthParameter beta = moebius(S, alpha);
  if (std::abs(beta.imag_min_eig()) < 1e-14)
    throw DegenerateWidthError("transport_matrix: Im(S.alpha) is degenerate");
  return center_map_impl(S, beta);
}

TransportMatrix kernel_center_map(const ComplexSymplectic& S,
                                  const WidthParameter& alpha) {
  const WidthParameter beta = moebius(S, alpha);
  if (std::abs(beta.imag_min_eig()) < 1e-14)
    throw DegenerateWidthError("kernel_center_map: Im(S.alpha) is degenerate");
  return center_map_impl(S.lambda_twist(), beta);
}

ExtendedPoint flow_map(const ComplexSymplectic& S, const ExtendedPoint& pt) {
  const TransportMatrix T = transport_matrix(S, pt.alpha);
  return ExtendedPoint{T.apply(pt.z), moebius(S, pt.alpha)};
}

double symplectic_form(const PhasePoint& z1, const PhasePoint& z2) {
  return z1.p.dot(z2.q) - z1.q.dot(z2.p);
}

bool admissible_triple(const ComplexSymplectic& S, const WidthParameter& alpha) {
  const ComplexSymplectic sinv = S.inverse();
  const ComplexSymplectic sbar_inv = S.conjugated().inverse();
  const ComplexSymplectic mix = sinv * S.conjugated();
  for (const ComplexSymplectic* V : {&sinv, &sbar_inv, &mix}) {
    try {
      const WidthParameter img = moebius(*V, alpha);
      if (!img.value().allFinite() || img.imag_min_eig() <= 0.0) return false;
    } catch (const PoleError&) {
      return false;
    }
  }
  return true;
}

std::optional<WidthParameter> admissible_alpha_search(
    const ComplexSymplectic& S, int grid_density) {
  if (S.n() != 1)
    throw std::invalid_argument("admissible_alpha_search: n = 1 only");
  const int half = std::max(grid_density / 2, 4);

  // log levels for Im in (0, 10]: 10^0 first, then spreading outwards
  std::vector<double> im_levels{1.0};
  for (int k = 1; k <= half; ++k) {
    const double step = k * 1.0 / half;  // up to 10^{\pm 1}
    im_levels.push_back(std::pow(10.0, -step));
    if (std::pow(10.0, step) <= 10.0) im_levels.push_back(std::pow(10.0, step));
  }
  std::vector<double> re_values{0.0};
  for (int k = 1; k <= half; ++k) {
    const double r = std::pow(10.0, -1.0 + 2.0 * k / half);  // 0.1 .. 10
    if (r <= 10.0) {
      re_values.push_back(r);
      re_values.push_back(-r);
    }
  }

  for (double im : im_levels) {
    for (double re : re_values) {
      const WidthParameter cand(cplx(re, im));
      if (admissible_triple(S, cand)) return cand;
    }
  }
  return std::nullopt;
}

FlowAuditReport flow_composition_audit(const ComplexSymplectic& S,
                                       const ComplexSymplectic& S2,
                                       const std::vector<ExtendedPoint>& samples) {
  FlowAuditReport rep;
  rep.conventions = {"Phi_S o Phi_S2", "Phi_S2 o Phi_S",
                     "Phi_Sinv o Phi_S2inv vs Phi_(SS2)inv",
                     "Phi_S2inv o Phi_Sinv vs Phi_(SS2)inv"};
  const ComplexSymplectic prod = S * S2;
  const ComplexSymplectic prod_inv = prod.inverse();
  const ComplexSymplectic sinv = S.inverse();
  const ComplexSymplectic s2inv = S2.inverse();

  auto dist = [](const ExtendedPoint& a, const ExtendedPoint& b) {
    const double dz = (a.z.qp() - b.z.qp()).norm();
    const double da = (a.alpha.value() - b.alpha.value()).norm();
    return std::max(dz, da);
  };

  for (const ExtendedPoint& pt : samples) {
    FlowAuditRow row;
    row.z = pt.z;
    row.alpha = pt.alpha.value()(0, 0);
    const ExtendedPoint target = flow_map(prod, pt);
    const ExtendedPoint target_inv = flow_map(prod_inv, pt);
    row.residual.push_back(dist(target, flow_map(S, flow_map(S2, pt))));
    row.residual.push_back(dist(target, flow_map(S2, flow_map(S, pt))));
    row.residual.push_back(dist(target_inv, flow_map(sinv, flow_map(s2inv, pt))));
    row.residual.push_back(dist(target_inv, flow_map(s2inv, flow_map(sinv, pt))));
    rep.rows.push_back(std::move(row));
  }

  for (size_t c = 0; c < rep.conventions.size(); ++c) {
    bool ok = true;
    for (const auto& row : rep.rows) ok = ok && row.residual[c] <= rep.tol;
    if (ok) rep.matching.push_back(rep.conventions[c]);
  }
  return rep;
}

nlohmann::json FlowAuditReport::to_json() const {
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : this->rows) {
    nlohmann::json jr;
    jr["q"] = r.z.q(0);
    jr["p"] = r.z.p(0);
    jr["alpha"] = complex_to_json(r.alpha);
    jr["residuals"] = r.residual;
    jrows.push_back(jr);
  }
  return {{"conventions", conventions}, {"rows", jrows}, {"matching", matching},
          {"tol", tol}};
}

nlohmann::json complex_to_json(cplx v) {
  return nlohmann::json::array({v.real(), v.imag()});
}

cplx complex_from_json(const nlohmann::json& j) {
  return cplx(j.at(0).get<double>(), j.at(1).get<double>());
}

}  // namespace mkop
