#include "mkop/quantize.hpp"

#include <cmath>

namespace mkop {

namespace {

constexpr double kOverlapFloor = 1e-12;

MatrixXcd state_matrix(const std::vector<CoherentLabel>& labels,
                       const GridSpec& grid) {
  MatrixXcd G(grid.size(), labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k)
    G.col(k) = coherent_state(labels[k], grid).samples;
  return G;
}

void threshold_relative(MatrixXcd& m, double rel) {
  const double floor = rel * m.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) < floor) m(i, j) = 0.0;
}

}  // namespace

PhaseSpaceMesh PhaseSpaceMesh::disc(double R, double max_step) {
  PhaseSpaceMesh mesh;
  const int half = static_cast<int>(std::ceil(R / max_step));
  const double step = R / half;
  mesh.cell = step * step;
  for (int i = -half; i < half; ++i)
    for (int j = -half; j < half; ++j) {
      const double q = (i + 0.5) * step;
      const double p = (j + 0.5) * step;
      if (q * q + p * p <= R * R) mesh.nodes.push_back(Vector2d(q, p));
    }
  return mesh;
}

OperatorMatrix toeplitz_quantize(const SymbolField& h, const WidthParameter& alpha,
                                 const GridSpec& grid, double R) {
  grid.validate();
  if (grid.dim != 1) throw std::invalid_argument("toeplitz_quantize: dim 1 only");
  if (R > 0.5 * grid.half_width)
    throw std::invalid_argument("toeplitz_quantize: R must satisfy R <= L/2");
  if (!alpha.admissible())
    throw std::invalid_argument("toeplitz_quantize: inadmissible width");

  const PhaseSpaceMesh mesh =
      PhaseSpaceMesh::disc(R, std::sqrt(grid.hbar) / 4.0);
  std::vector<CoherentLabel> labels;
  labels.reserve(mesh.nodes.size());
  VectorXcd weights(mesh.nodes.size());
  const double wcell = mesh.cell / (2.0 * kPi * grid.hbar);
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    const Vector2d& z = mesh.nodes[k];
    labels.push_back(CoherentLabel{PhasePoint::of(z(0), z(1)), alpha});
    weights(k) = h.eval_interp(z(0), z(1)) * wcell;
  }
  MatrixXcd G = state_matrix(labels, grid);
  MatrixXcd GW = G;
  for (Eigen::Index k = 0; k < weights.size(); ++k) GW.col(k) *= weights(k);
  return OperatorMatrix{grid, GW * G.adjoint()};
}

OperatorMatrix offdiag_quantize(const OffDiagSymbol& sym, const GridSpec& grid,
                                double R) {
  grid.validate();
  if (grid.dim != 1) throw std::invalid_argument("offdiag_quantize: dim 1 only");
  const PhaseSpaceMesh mesh =
      PhaseSpaceMesh::disc(R, std::sqrt(grid.hbar) / 4.0);
  const double wcell = mesh.cell / (2.0 * kPi * grid.hbar);
  const double flip = sym.sign_flip ? -1.0 : 1.0;

  std::vector<CoherentLabel> in_labels, out_labels;
  in_labels.reserve(mesh.nodes.size());
  out_labels.reserve(mesh.nodes.size());
  VectorXcd weights(mesh.nodes.size());
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    const Vector2d& z = mesh.nodes[k];
    const PhasePoint zin = PhasePoint::of(z(0), z(1));
    const PhasePoint zout = sym.map.apply(zin);
    in_labels.push_back(CoherentLabel{zin, sym.alpha_in});
    out_labels.push_back(CoherentLabel{zout, sym.alpha_out});
    // idempotency normalization <(I^flip) in | out>
    const CoherentLabel bra =
        sym.sign_flip
            ? CoherentLabel{PhasePoint::of(-z(0), -z(1)), sym.alpha_in}
            : in_labels.back();
    const cplx ov = overlap_closed_form(bra, out_labels.back(), grid.hbar);
    if (std::abs(ov) < kOverlapFloor)
      throw VanishingOverlapError(
          "offdiag_quantize: vanishing overlap at node (q=" +
          std::to_string(z(0)) + ", p=" + std::to_string(z(1)) + ")");
    weights(k) = sym.h.eval_interp(flip * z(0), flip * z(1)) * wcell / ov;
  }
  MatrixXcd Gout = state_matrix(out_labels, grid);
  for (Eigen::Index k = 0; k < weights.size(); ++k) Gout.col(k) *= weights(k);
  const MatrixXcd Gin = state_matrix(in_labels, grid);
  return OperatorMatrix{grid, Gout * Gin.adjoint()};
}

OperatorMatrix conjugate_oracle(const OperatorMatrix& H,
                                const ComplexSymplectic& S) {
  const GridSpec& g = H.grid;
  const MetaplecticKernel kS = kernel_build(S, g);
  const ComplexSymplectic Sinv = S.inverse();

  if (kS.chart == "a-chart" && kS.multiplier.size() > 0) {
    // U(S^-1) H U(S) = Fi D_inv (F H Fi) D F with the middle band-limited:
    // raw GEMM roundoff would be amplified by the growing diagonal
    const double dx = g.dx();
    const MatrixXcd Fhat =
        fourier_operator(g, FourierDirection::Forward).m * dx;
    const MatrixXcd Fihat =
        fourier_operator(g, FourierDirection::Inverse).m * dx;
    MatrixXcd mid = Fhat * (H.m * dx) * Fihat;
    threshold_relative(mid, 1e-14);
    const MetaplecticKernel kSi = kernel_build(Sinv, g);
    for (Eigen::Index i = 0; i < mid.rows(); ++i)
      for (Eigen::Index j = 0; j < mid.cols(); ++j)
        mid(i, j) *= kSi.multiplier(i) * kS.multiplier(j);
    return OperatorMatrix{g, (Fihat * mid * Fhat) / dx};
  }

  if (S.is_real()) {
    // unitary case: U^{-1} = U^*
    const double w = std::pow(g.dx(), g.dim);
    return OperatorMatrix{g, ((kS.op().m.adjoint() * H.m) * w) * kS.op().m * w};
  }

  const MetaplecticKernel kSi = kernel_build(Sinv, g);
  return operator_compose(kSi.op(), operator_compose(H, kS.op()));
}

namespace {

struct RepresentationVariant {
  std::string name;
  OffDiagSymbol symbol;
};

std::vector<RepresentationVariant> offdiag_representation_variants(const SymbolField& h,
                                               const WidthParameter& alpha,
                                               const ComplexSymplectic& S) {
  const ComplexSymplectic Sbar = S.conjugated();
  const ComplexSymplectic mix = S.inverse() * Sbar;
  const WidthParameter mu = moebius(Sbar, alpha);
  const WidthParameter alpha_out = moebius(mix, alpha);
  const SymbolField g = reparametrize(h, alpha, mu);

  std::vector<RepresentationVariant> variants;
  for (const bool audited : {true, false}) {
    TransportMatrix t_sym = audited ? kernel_center_map(Sbar, alpha)
                                    : transport_matrix(Sbar, alpha);
    TransportMatrix t_ket = audited ? kernel_center_map(mix, alpha)
                                    : transport_matrix(mix, alpha);
    // audited semantics: the symbol moves with the inverse of the measured
    // center map; printed semantics: literal push-forward by T_Sbar
    const TransportMatrix push = audited ? t_sym.inverse() : t_sym;
    for (const JacobianMode mode : {JacobianMode::With, JacobianMode::Without}) {
      OffDiagSymbol sym{pushforward(g, push, mode), t_ket, alpha, alpha_out,
                        false, {}};
      const std::string name =
          std::string(audited ? "audited" : "printed") + "+" +
          (mode == JacobianMode::With ? "jacobian" : "plain");
      variants.push_back({name, std::move(sym)});
    }
  }
  return variants;
}

// residual of (quantize(sym) - oracle) on a small coherent probe frame,
// without assembling the quantization
double probe_residual(const OffDiagSymbol& sym, const GridSpec& grid, double R,
                      const OperatorMatrix& oracle) {
  const PhaseSpaceMesh mesh =
      PhaseSpaceMesh::disc(R, std::sqrt(grid.hbar) / 4.0);
  const double wcell = mesh.cell / (2.0 * kPi * grid.hbar);
  const double flip = sym.sign_flip ? -1.0 : 1.0;
  std::vector<CoherentLabel> in_labels, out_labels;
  VectorXcd weights(mesh.nodes.size());
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    const Vector2d& z = mesh.nodes[k];
    const PhasePoint zin = PhasePoint::of(z(0), z(1));
    in_labels.push_back(CoherentLabel{zin, sym.alpha_in});
    out_labels.push_back(CoherentLabel{sym.map.apply(zin), sym.alpha_out});
    const CoherentLabel bra =
        sym.sign_flip
            ? CoherentLabel{PhasePoint::of(-z(0), -z(1)), sym.alpha_in}
            : in_labels.back();
    const cplx ov = overlap_closed_form(bra, out_labels.back(), grid.hbar);
    weights(k) = sym.h.eval_interp(flip * z(0), flip * z(1)) * wcell / ov;
  }
  const MatrixXcd Gin = state_matrix(in_labels, grid);
  const MatrixXcd Gout = state_matrix(out_labels, grid);

  double worst = 0.0;
  for (const auto& zp : {PhasePoint::of(0, 0), PhasePoint::of(1, 0),
                         PhasePoint::of(0, 1), PhasePoint::of(-1.5, 0.5),
                         PhasePoint::of(0.7, -1.2)}) {
    const VectorXcd phi =
        coherent_state(CoherentLabel{zp, sym.alpha_in}, grid).samples;
    const VectorXcd inner =
        (Gin.adjoint() * phi) * std::pow(grid.dx(), grid.dim);
    VectorXcd scaled = inner;
    for (Eigen::Index k = 0; k < scaled.size(); ++k) scaled(k) *= weights(k);
    const VectorXcd got = Gout * scaled;
    const VectorXcd want = (oracle.m * phi) * std::pow(grid.dx(), grid.dim);
    worst = std::max(worst, (got - want).norm() / std::max(want.norm(), 1e-30));
  }
  return worst;
}

}  // namespace

OffDiagRepresentation offdiag_representation(const SymbolField& h, const WidthParameter& alpha,
                              const ComplexSymplectic& S, const GridSpec& grid,
                              double R) {
  if (!admissible_triple(S, alpha))
    throw std::invalid_argument("offdiag_representation: (S, alpha) inadmissible");

  const OperatorMatrix H = toeplitz_quantize(h, alpha, grid, R);
  const OperatorMatrix oracle = conjugate_oracle(H, S);

  auto variants = offdiag_representation_variants(h, alpha, S);
  double best = 1e300;
  std::size_t best_idx = 0;
  std::vector<double> probe_residuals(variants.size());
  for (std::size_t i = 0; i < variants.size(); ++i) {
    probe_residuals[i] = probe_residual(variants[i].symbol, grid, R, oracle);
    if (probe_residuals[i] < best) {
      best = probe_residuals[i];
      best_idx = i;
    }
  }

  OffDiagRepresentation res;
  res.symbol = variants[best_idx].symbol;
  res.variant = variants[best_idx].name;
  res.op = offdiag_quantize(res.symbol, grid, R);
  res.residual = interior_rel_error(grid, res.op.m, oracle.m);

  nlohmann::json prov;
  prov["S"] = S.to_json();
  prov["variant"] = res.variant;
  prov["residual"] = res.residual;
  nlohmann::json probes = nlohmann::json::object();
  for (std::size_t i = 0; i < variants.size(); ++i)
    probes[variants[i].name] = probe_residuals[i];
  prov["variant_probe_residuals"] = probes;
  res.symbol.provenance = prov;

  if (res.residual > 0.05)
    throw RepresentationMismatch(
        "offdiag_representation: no variant reaches residual 0.05; best '" +
        res.variant + "' at " + std::to_string(res.residual) +
        "; probe residuals " + probes.dump());
  return res;
}

cplx normalization_D(const ComplexSymplectic& S, const WidthParameter& alpha,
                     const PhasePoint& z, double hbar) {
  const ComplexSymplectic mix = S.inverse() * S.conjugated();
  const WidthParameter beta = moebius(mix, alpha);
  const TransportMatrix T = transport_matrix(mix, alpha);
  const CoherentLabel out{T.apply(z), beta};
  // the det -1 extension evaluates the overlap against the parity image
  const PhasePoint zin = S.det_class() == -1
                             ? PhasePoint::from_qp((-z.qp()).eval())
                             : z;
  const CoherentLabel in{zin, alpha};
  const cplx ov = overlap_closed_form(out, in, hbar);
  if (std::abs(ov) < kOverlapFloor)
    throw VanishingOverlapError("normalization_D: vanishing overlap");
  return 1.0 / ov;
}

OffDiagSymbol noncanonical_symbol(const SymbolField& h, const WidthParameter& alpha,
                                  const ComplexSymplectic& S) {
  const ComplexSymplectic Sbar = S.conjugated();
  const ComplexSymplectic mix = S.inverse() * Sbar;
  const WidthParameter mu = moebius(Sbar, alpha);
  SymbolField g = reparametrize(h, alpha, mu);
  const TransportMatrix t_sbar = transport_matrix(Sbar, alpha);
  OffDiagSymbol sym{pushforward(g, t_sbar, JacobianMode::Without),
                    transport_matrix(mix, alpha), alpha, moebius(mix, alpha),
                    S.det_class() == -1,
                    {}};
  sym.provenance = {{"S", S.to_json()}, {"variant", "printed"}};
  return sym;
}

OperatorMatrix noncanonical_compose(const SymbolField& h,
                                    const WidthParameter& alpha,
                                    const ComplexSymplectic& S,
                                    const GridSpec& grid, double R) {
  if (S.det_class() == 1) return offdiag_representation(h, alpha, S, grid, R).op;
  return offdiag_quantize(noncanonical_symbol(h, alpha, S), grid, R);
}

OffDiagSymbol noncanonical_compose_symbol(const OffDiagSymbol& s,
                                          const ComplexSymplectic& S2) {
  // advance the ket chain by S2's data at the current output chart, and
  // transform the accumulated weight by S2's symbol-side map and parity flip
  const ComplexSymplectic S2bar = S2.conjugated();
  const ComplexSymplectic mix = S2.inverse() * S2bar;
  const WidthParameter a1 = s.alpha_out;
  const TransportMatrix t_mix = transport_matrix(mix, a1);
  const TransportMatrix t_sbar = transport_matrix(S2bar, a1);
  const bool flip2 = (S2.det_class() == -1);

  OffDiagSymbol out = s;
  out.map = TransportMatrix{t_mix.m * s.map.m};
  out.alpha_out = moebius(mix, a1);
  // new weight: [T_{S2bar} # old]((-1)^{flip2} z); widths beyond the exact
  // chain relabeling are a higher-order effect at this contract
  // the increment's own parity flag is consumed by the flip bookkeeping
  // below; the accumulated weight only moves with T_{S2bar}^{-1}
  TransportMatrix arg_map = t_sbar.inverse();
  const SymbolField moved = s.h;
  // represent the transformed weight by composing the evaluation map
  if (moved.is_polynomial()) {
    out.h = pushforward(moved, TransportMatrix{arg_map.m.inverse()},
                        JacobianMode::Without);
  } else {
    MatrixXcd v(moved.qnodes.size(), moved.pnodes.size());
    for (int i = 0; i < moved.qnodes.size(); ++i)
      for (int j = 0; j < moved.pnodes.size(); ++j) {
        const double q = arg_map.m(0, 0) * moved.qnodes(i) +
                         arg_map.m(0, 1) * moved.pnodes(j);
        const double p = arg_map.m(1, 0) * moved.qnodes(i) +
                         arg_map.m(1, 1) * moved.pnodes(j);
        v(i, j) = moved.eval_interp(q, p);
      }
    out.h = SymbolField::grid(moved.qnodes, moved.pnodes, std::move(v),
                              moved.hbar);
  }
  out.sign_flip = s.sign_flip != flip2;
  return out;
}

OffDiagSymbol offdiag_symbol_compose(const OffDiagSymbol& s1,
                                     const OffDiagSymbol& s2) {
  if ((s1.alpha_in.value() - s2.alpha_out.value()).norm() > 1e-12)
    throw std::invalid_argument(
        "offdiag_symbol_compose: chart mismatch (s1 input vs s2 output)");
  OffDiagSymbol out = s2;
  out.map = TransportMatrix{s1.map.m * s2.map.m};
  out.alpha_out = s1.alpha_out;
  // h = s2.h . (s1.h o s2.map) at leading order
  if (s2.h.is_polynomial() && s1.h.is_polynomial()) {
    const SymbolField moved =
        pushforward(s1.h, TransportMatrix{s2.map.m.inverse()},
                    JacobianMode::Without);
    // polynomial product
    const int deg = s2.h.degree() + moved.degree();
    if (deg > SymbolField::kMaxDegree)
      throw std::invalid_argument("offdiag_symbol_compose: degree cap exceeded");
    MatrixXcd c = MatrixXcd::Zero(deg + 1, deg + 1);
    for (int a = 0; a < s2.h.coeff.rows(); ++a)
      for (int b = 0; b < s2.h.coeff.cols(); ++b)
        for (int a2 = 0; a2 < moved.coeff.rows(); ++a2)
          for (int b2 = 0; b2 < moved.coeff.cols(); ++b2)
            c(a + a2, b + b2) += s2.h.coeff(a, b) * moved.coeff(a2, b2);
    out.h = SymbolField::polynomial(std::move(c), s2.h.hbar);
  } else if (!s2.h.is_polynomial()) {
    MatrixXcd v = s2.h.values;
    for (int i = 0; i < s2.h.qnodes.size(); ++i)
      for (int j = 0; j < s2.h.pnodes.size(); ++j) {
        const double q = s2.map.m(0, 0) * s2.h.qnodes(i) +
                         s2.map.m(0, 1) * s2.h.pnodes(j);
        const double p = s2.map.m(1, 0) * s2.h.qnodes(i) +
                         s2.map.m(1, 1) * s2.h.pnodes(j);
        v(i, j) *= s1.h.eval_interp(q, p);
      }
    out.h = SymbolField::grid(s2.h.qnodes, s2.h.pnodes, std::move(v), s2.h.hbar);
  } else {
    throw std::invalid_argument(
        "offdiag_symbol_compose: mixed representations not supported");
  }
  return out;
}

double phase_space_rel_error(const OperatorMatrix& A, const OperatorMatrix& B,
                             const WidthParameter& alpha, double window_R) {
  if (!(A.grid == B.grid))
    throw std::invalid_argument("phase_space_rel_error: grid mismatch");
  const GridSpec& g = A.grid;
  const PhaseSpaceMesh mesh =
      PhaseSpaceMesh::disc(window_R, std::sqrt(g.hbar) / 2.0);
  std::vector<CoherentLabel> labels;
  labels.reserve(mesh.nodes.size());
  for (const auto& z : mesh.nodes)
    labels.push_back(CoherentLabel{PhasePoint::of(z(0), z(1)), alpha});
  const MatrixXcd G = state_matrix(labels, g);
  const double w2 = std::pow(g.dx(), 2 * g.dim);
  const MatrixXcd EA = (G.adjoint() * A.m * G) * w2;
  const MatrixXcd EB = (G.adjoint() * B.m * G) * w2;
  return (EA - EB).norm() / EB.norm();
}

nlohmann::json OffDiagSymbol::to_json() const {
  nlohmann::json j;
  j["h"] = h.is_polynomial() ? h.to_json()
                             : nlohmann::json{{"representation", "grid"},
                                              {"hbar", h.hbar}};
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < map.m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < map.m.cols(); ++k) row.push_back(map.m(i, k));
    rows.push_back(row);
  }
  j["map"] = rows;
  j["alpha_in"] = alpha_in.to_json();
  j["alpha_out"] = alpha_out.to_json();
  j["sign_flip"] = sign_flip;
  j["provenance"] = provenance;
  return j;
}

}  // namespace mkop
