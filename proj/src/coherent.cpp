#include "mkop/coherent.hpp"

#include <cmath>

namespace mkop {

nlohmann::json CoherentLabel::to_json() const {
  nlohmann::json j;
  j["q"] = std::vector<double>(z.q.data(), z.q.data() + z.q.size());
  j["p"] = std::vector<double>(z.p.data(), z.p.data() + z.p.size());
  j["alpha"] = alpha.to_json();
  return j;
}

CoherentLabel CoherentLabel::from_json(const nlohmann::json& j) {
  const auto qv = j.at("q").get<std::vector<double>>();
  const auto pv = j.at("p").get<std::vector<double>>();
  VectorXd q(qv.size()), p(pv.size());
  for (size_t i = 0; i < qv.size(); ++i) q(i) = qv[i];
  for (size_t i = 0; i < pv.size(); ++i) p(i) = pv[i];
  return CoherentLabel{PhasePoint(q, p), WidthParameter::from_json(j.at("alpha"))};
}

double coherent_prefactor(const WidthParameter& alpha, double hbar) {
  const int n = alpha.n();
  const MatrixXcd inv = alpha.inverse();
  const double det_im = inv.imag().determinant();
  return std::pow(kPi * hbar, -0.25 * n) * std::pow(std::abs(det_im), 0.25);
}

cplx coherent_eval(const CoherentLabel& label, const VectorXd& x, double hbar) {
  const MatrixXcd ainv = label.alpha.inverse();
  const VectorXd dq = x - label.z.q;
  const cplx quad = (dq.cast<cplx>().transpose() * ainv * dq.cast<cplx>())(0, 0);
  const cplx phase = -kI / (2.0 * hbar) * quad +
                     kI * label.z.p.dot(x) / hbar -
                     kI * label.z.p.dot(label.z.q) / (2.0 * hbar);
  return coherent_prefactor(label.alpha, hbar) * std::exp(phase);
}

WaveFunction coherent_state(const CoherentLabel& label, const GridSpec& grid) {
  grid.validate();
  if (label.z.n() != grid.dim || label.alpha.n() != grid.dim)
    throw std::invalid_argument("coherent_state: dimension mismatch");
  if (!label.alpha.admissible())
    throw std::invalid_argument("coherent_state: width not in the Siegel upper half space");

  const int N = grid.points_per_axis;
  const double hbar = grid.hbar;
  WaveFunction psi{grid, VectorXcd(grid.size())};

  if (grid.dim == 1) {
    const cplx ainv = 1.0 / label.alpha.scalar();
    const double q = label.z.q(0), p = label.z.p(0);
    const double pref = coherent_prefactor(label.alpha, hbar);
    const cplx pq_phase = std::exp(-kI * p * q / (2.0 * hbar));
    for (int k = 0; k < N; ++k) {
      const double x = grid.node(k);
      const cplx ph = -kI / (2.0 * hbar) * ainv * (x - q) * (x - q) +
                      kI * p * x / hbar;
      psi.samples(k) = pref * std::exp(ph) * pq_phase;
    }
    return psi;
  }

  VectorXd x(2);
  for (int i = 0; i < N; ++i) {
    x(0) = grid.node(i);
    for (int j = 0; j < N; ++j) {
      x(1) = grid.node(j);
      psi.samples(i * N + j) = coherent_eval(label, x, hbar);
    }
  }
  return psi;
}

cplx overlap_closed_form(const CoherentLabel& a, const CoherentLabel& b,
                         double hbar) {
  if (a.z.n() != 1 || b.z.n() != 1)
    throw std::invalid_argument("overlap_closed_form: n = 1 only");
  const cplx aa = a.alpha.scalar(), ab = b.alpha.scalar();
  const double qa = a.z.q(0), pa = a.z.p(0), qb = b.z.q(0), pb = b.z.p(0);

  // conj(psi_a) psi_b = Na Nb exp(-Gamma x^2 + s x + r); integrate exactly.
  const cplx inv_ca = 1.0 / std::conj(aa);  // conj flips alpha to the lower half
  const cplx inv_b = 1.0 / ab;
  const cplx gamma = kI / (2.0 * hbar) * (inv_b - inv_ca);
  if (std::abs(gamma) < 1e-14 || gamma.real() <= 0.0)
    throw DegenerateWidthError("overlap_closed_form: degenerate width combination");
  const cplx s = kI / hbar * (qb * inv_b - qa * inv_ca + cplx(pb - pa));
  const cplx r = kI / (2.0 * hbar) *
                 (qa * qa * inv_ca - qb * qb * inv_b + cplx(pa * qa - pb * qb));
  const cplx integral = std::sqrt(kPi / gamma) * std::exp(s * s / (4.0 * gamma) + r);
  return coherent_prefactor(a.alpha, hbar) * coherent_prefactor(b.alpha, hbar) *
         integral;
}

double lagrangian_residual(const CoherentLabel& label, cplx x, cplx xi) {
  const cplx alpha = label.alpha.scalar();
  const cplx target = label.z.q(0) + alpha * label.z.p(0);
  return std::abs(x + alpha * xi - target);
}

LagrangianAuditReport lagrangian_transport_check(const ComplexSymplectic& S,
                                                 const CoherentLabel& label,
                                                 int samples) {
  if (S.n() != 1) throw std::invalid_argument("lagrangian_transport_check: n = 1");
  const cplx alpha = label.alpha.scalar();
  const double q = label.z.q(0), p = label.z.p(0);

  struct Variant {
    std::string name;
    WidthParameter beta;
    PhasePoint w;
  };
  std::vector<Variant> variants;
  const ComplexSymplectic Sinv = S.inverse();
  const std::vector<std::pair<std::string, const ComplexSymplectic*>> choices = {
      {"beta=S.alpha, w=T_S z", &S}, {"beta=Sinv.alpha, w=T_Sinv z", &Sinv}};
  for (const auto& choice : choices) {
    try {
      variants.push_back(Variant{choice.first, moebius(*choice.second, label.alpha),
                                 transport_matrix(*choice.second, label.alpha)
                                     .apply(label.z)});
    } catch (const std::exception&) {
      // inadmissible variant: skip
    }
  }

  LagrangianAuditReport rep;
  double best = 1e300;
  for (const Variant& v : variants) {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      // parametrize the Lagrangian by xi: x = q + alpha p - alpha xi
      const cplx xi = cplx(-2.0 + 4.0 * k / std::max(1, samples - 1),
                           0.3 * std::sin(2.7 * k));
      const cplx x = q + alpha * p - alpha * xi;
      // push (x, xi) through S^{-1}
      const cplx xs = Sinv.a() * x + Sinv.b() * xi;
      const cplx xis = Sinv.c() * x + Sinv.d() * xi;
      const CoherentLabel moved{v.w, v.beta};
      worst = std::max(worst, lagrangian_residual(moved, xs, xis));
    }
    rep.rows.push_back({v.name, worst});
    if (worst < best) {
      best = worst;
      rep.best = v.name;
    }
  }
  return rep;
}

nlohmann::json LagrangianAuditReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"convention", r.convention}, {"max_residual", r.max_residual}});
  return {{"rows", rows_j}, {"best", best}};
}

}  // namespace mkop
