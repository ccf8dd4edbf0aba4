#include "mkop/metaplectic.hpp"

#include <cmath>

namespace mkop {

namespace {

double box_exponent_peak(cplx coef_xx, cplx coef_xy, cplx coef_yy, double L) {
  // peak of Re(coef_xx x^2 + coef_xy x y + coef_yy y^2) over [-L, L]^2;
  // a real quadratic form attains its box maximum on the corner/edge lattice
  double peak = -1e300;
  const int K = 33;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      const double x = -L + 2.0 * L * i / (K - 1);
      const double y = -L + 2.0 * L * j / (K - 1);
      peak = std::max(peak, (coef_xx * x * x + coef_xy * x * y + coef_yy * y * y)
                                .real());
    }
  return peak;
}

VectorXcd shear_multiplier(const ComplexSymplectic& S, const GridSpec& grid) {
  // q-shear [[1, b], [0, 1]] acts on the Fourier side as e^{i b xi^2/(2 hbar)}
  const int N = grid.points_per_axis;
  const double hbar = grid.hbar;
  VectorXcd m(grid.size());
  if (grid.dim == 1) {
    const cplx b = S.b();
    for (int k = 0; k < N; ++k) {
      const double xi = grid.freq_node(k);
      m(k) = std::exp(kI * b * xi * xi / (2.0 * hbar));
    }
  } else {
    const MatrixXcd B = S.B();
    for (int k1 = 0; k1 < N; ++k1)
      for (int k2 = 0; k2 < N; ++k2) {
        Eigen::Vector2cd xi(grid.freq_node(k1), grid.freq_node(k2));
        const cplx quad = (xi.transpose() * B * xi)(0, 0);
        m(k1 * N + k2) = std::exp(kI * quad / (2.0 * hbar));
      }
  }
  return m;
}

double shear_multiplier_peak(const ComplexSymplectic& S, const GridSpec& grid) {
  const double ximax = std::abs(grid.freq_node(0));
  if (grid.dim == 1) return -S.b().imag() * ximax * ximax / (2.0 * grid.hbar);
  const MatrixXd imB = S.B().imag();
  return imB.cwiseAbs().sum() * ximax * ximax / (2.0 * grid.hbar);
}

void check_chirp_nyquist(cplx gamma, double span, double step,
                         const char* where) {
  // e^{gamma u^2}: oscillation gradient 2 |Im gamma| |u|; one grid step must
  // advance the phase by less than pi
  if (2.0 * std::abs(gamma.imag()) * span * step >= kPi)
    throw KernelBuildError(std::string(where) +
                           ": grid underresolved for this quadratic phase");
}

void band_limit_around_peak(VectorXcd& v, int dim, int N) {
  const double floor = 1e-13 * v.cwiseAbs().maxCoeff();
  if (dim == 1) {
    int peak = 0;
    double best = 0.0;
    for (int k = 0; k < N; ++k)
      if (std::abs(v(k)) > best) {
        best = std::abs(v(k));
        peak = k;
      }
    int lo = peak, hi = peak;
    while (lo > 0 && std::abs(v(lo - 1)) >= floor) --lo;
    while (hi < N - 1 && std::abs(v(hi + 1)) >= floor) ++hi;
    for (int k = 0; k < lo; ++k) v(k) = 0.0;
    for (int k = hi + 1; k < N; ++k) v(k) = 0.0;
    return;
  }
  // dim 2: bounding box of the above-floor region containing the peak
  int ipk = 0, jpk = 0;
  double best = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (std::abs(v(i * N + j)) > best) {
        best = std::abs(v(i * N + j));
        ipk = i;
        jpk = j;
      }
  auto row_has = [&](int i, int jlo, int jhi) {
    for (int j = jlo; j <= jhi; ++j)
      if (std::abs(v(i * N + j)) >= floor) return true;
    return false;
  };
  auto col_has = [&](int j, int ilo, int ihi) {
    for (int i = ilo; i <= ihi; ++i)
      if (std::abs(v(i * N + j)) >= floor) return true;
    return false;
  };
  int ilo = ipk, ihi = ipk, jlo = jpk, jhi = jpk;
  bool grew = true;
  while (grew) {
    grew = false;
    if (ilo > 0 && row_has(ilo - 1, jlo, jhi)) { --ilo; grew = true; }
    if (ihi < N - 1 && row_has(ihi + 1, jlo, jhi)) { ++ihi; grew = true; }
    if (jlo > 0 && col_has(jlo - 1, ilo, ihi)) { --jlo; grew = true; }
    if (jhi < N - 1 && col_has(jhi + 1, ilo, ihi)) { ++jhi; grew = true; }
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i < ilo || i > ihi || j < jlo || j > jhi) v(i * N + j) = 0.0;
}

bool is_pure_q_shear(const ComplexSymplectic& S) {
  const int n = S.n();
  const double scale = std::max(1.0, S.matrix().norm());
  return S.C().norm() <= 1e-13 * scale &&
         (S.A() - MatrixXcd::Identity(n, n)).norm() <= 1e-13 * scale &&
         (S.D() - MatrixXcd::Identity(n, n)).norm() <= 1e-13 * scale;
}

OperatorMatrix build_delta_chart(const ComplexSymplectic& S, const GridSpec& grid) {
  const cplx d = S.d(), c = S.c();
  if (std::abs(d.imag()) > 1e-10 * std::max(1.0, std::abs(d)))
    throw KernelBuildError(
        "delta-limit chart needs a real scaling; a complex diagonal is not a "
        "grid map");
  const double dr = d.real();
  if (std::abs(dr) < 1e-12)
    throw KernelBuildError("both charts singular (b = 0 and d = 0)");

  // chirp from the b -> 0 limit of the dense chart: e^{-i c d x^2/(2 hbar)}
  const cplx chirp_coef = -kI * c * cplx(dr, 0.0) / (2.0 * grid.hbar);
  const double L = grid.half_width;
  if ((chirp_coef * L * L).real() > kKernelExpCap)
    throw KernelBuildError("delta-limit chirp grows past the double range");

  const int N = grid.points_per_axis;
  const double dx = grid.dx();
  const cplx pref = std::sqrt(cplx(dr, 0.0));
  MatrixXcd m = MatrixXcd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    const double x = grid.node(i);
    const cplx chirp = pref * std::exp(chirp_coef * x * x) / dx;
    const double y = dr * x;
    const double jf = (y + grid.half_width) / dx - 0.5;
    const int j0 = static_cast<int>(std::lround(jf));
    if (j0 >= 0 && j0 < N && std::abs(grid.node(j0) - y) < 1e-9 * dx) {
      m(i, j0) = chirp;
    } else {
      // band-limited row: sinc interpolation of the off-lattice sample
      for (int j = 0; j < N; ++j) {
        const double u = kPi * (y - grid.node(j)) / dx;
        const double sinc = std::abs(u) < 1e-12 ? 1.0 : std::sin(u) / u;
        m(i, j) = chirp * sinc;
      }
    }
  }
  return OperatorMatrix{grid, std::move(m)};
}

OperatorMatrix build_b_chart_1d(const ComplexSymplectic& S, const GridSpec& grid) {
  const cplx a = S.a(), b = S.b(), d = S.d();
  const double hbar = grid.hbar, L = grid.half_width;
  const cplx f = -kI / (2.0 * b * hbar);
  if (box_exponent_peak(f * d, -2.0 * f, f * a, L) > kKernelExpCap)
    throw KernelBuildError("kernel grows past the double range on this grid");
  // oscillatory content only; for real S the x^2 guard is |d/b| L dx / hbar
  check_chirp_nyquist(f * d, L, grid.dx(), "b-chart (x side)");
  check_chirp_nyquist(f * a, L, grid.dx(), "b-chart (y side)");
  if (std::abs((2.0 * f).imag()) * L * grid.dx() >= kPi)
    throw KernelBuildError("b-chart: cross term underresolved");

  const int N = grid.points_per_axis;
  const cplx pref = 1.0 / std::sqrt(2.0 * kPi * hbar * b);
  MatrixXcd m(N, N);
  for (int i = 0; i < N; ++i) {
    const double x = grid.node(i);
    for (int j = 0; j < N; ++j) {
      const double y = grid.node(j);
      m(i, j) = pref * std::exp(f * (d * x * x - 2.0 * x * y + a * y * y));
    }
  }
  return OperatorMatrix{grid, std::move(m)};
}

OperatorMatrix build_b_chart_2d(const ComplexSymplectic& S, const GridSpec& grid) {
  const MatrixXcd B = S.B();
  Eigen::FullPivLU<MatrixXcd> lu(B);
  if (!lu.isInvertible()) throw KernelBuildError("n = 2: det B = 0");
  const MatrixXcd Binv = lu.inverse();
  const MatrixXcd DBi = S.D() * Binv;
  const MatrixXcd BiA = Binv * S.A();
  const double hbar = grid.hbar;
  const cplx detB = B.determinant();

  const double L = grid.half_width;
  const double growth =
      (DBi.imag().cwiseAbs().sum() + 2.0 * Binv.imag().cwiseAbs().sum() +
       BiA.imag().cwiseAbs().sum()) *
      L * L / (2.0 * hbar);
  if (growth > kKernelExpCap)
    throw KernelBuildError("n = 2 kernel grows past the double range");

  const int N = grid.points_per_axis;
  const std::size_t M = grid.size();
  const cplx pref = 1.0 / (2.0 * kPi * hbar * std::sqrt(detB));
  MatrixXcd m(M, M);
  for (int i1 = 0; i1 < N; ++i1)
    for (int i2 = 0; i2 < N; ++i2) {
      Eigen::Vector2cd x(grid.node(i1), grid.node(i2));
      const cplx xDBx = (x.transpose() * DBi * x)(0, 0);
      const Eigen::RowVector2cd xBi = x.transpose() * Binv;
      for (int j1 = 0; j1 < N; ++j1)
        for (int j2 = 0; j2 < N; ++j2) {
          Eigen::Vector2cd y(grid.node(j1), grid.node(j2));
          const cplx quad =
              xDBx - 2.0 * (xBi * y)(0, 0) + (y.transpose() * BiA * y)(0, 0);
          m(i1 * N + i2, j1 * N + j2) = pref * std::exp(-kI * quad / (2.0 * hbar));
        }
    }
  return OperatorMatrix{grid, std::move(m)};
}

}  // namespace

WaveFunction MetaplecticKernel::apply(const WaveFunction& psi) const {
  if (!(psi.grid == grid))
    throw std::invalid_argument("MetaplecticKernel::apply: grid mismatch");
  if (chart == "a-chart" && multiplier.size() > 0) {
    WaveFunction hat = fourier_transform(psi, FourierDirection::Forward);
    // A growing multiplier may only act on resolved spectral content:
    // transform roundoff (sporadic samples up to ~1e-13 of the peak) would
    // otherwise be amplified past everything else. Keep the contiguous
    // above-floor band around the spectral peak; isolated noise outside it is
    // zeroed.
    if (multiplier.cwiseAbs().maxCoeff() > 1.0)
      band_limit_around_peak(hat.samples, grid.dim, grid.points_per_axis);
    hat.samples.array() *= multiplier.array();
    WaveFunction out = fourier_transform(hat, FourierDirection::Inverse);
    out.grid = grid;
    return out;
  }
  return operator_apply(op(), psi);
}

const OperatorMatrix& MetaplecticKernel::op() const {
  if (dense) return *dense;
  if (assembled_) return *assembled_;
  if (grid.dim != 1)
    throw KernelBuildError("dense assembly of a matrix-free n = 2 kernel");
  // Fi . diag(multiplier) . F with one composition weight
  const OperatorMatrix F = fourier_operator(grid, FourierDirection::Forward);
  const OperatorMatrix Fi = fourier_operator(grid, FourierDirection::Inverse);
  MatrixXcd mid = F.m;
  for (int k = 0; k < grid.points_per_axis; ++k) mid.row(k) *= multiplier(k);
  assembled_ = std::make_shared<OperatorMatrix>(
      OperatorMatrix{grid, (Fi.m * mid) * grid.dx()});
  return *assembled_;
}

MetaplecticKernel kernel_build(const ComplexSymplectic& S, const GridSpec& grid) {
  grid.validate();
  if (S.n() != grid.dim)
    throw std::invalid_argument("kernel_build: dimension mismatch");

  if (grid.dim == 1 && std::abs(S.b()) <= 1e-8) {
    MetaplecticKernel k(S, grid, "delta-limit");
    k.dense = std::make_shared<OperatorMatrix>(build_delta_chart(S, grid));
    return k;
  }

  // Diagonal-multiplier charts are evaluated pointwise and do not alias; no
  // Nyquist condition applies to them until they enter a dense composition.
  if (is_pure_q_shear(S)) {
    if (shear_multiplier_peak(S, grid) > kKernelExpCap)
      throw KernelBuildError("shear multiplier grows past the double range");
    MetaplecticKernel k(S, grid, "a-chart");
    k.multiplier = shear_multiplier(S, grid);
    return k;
  }

  if (grid.dim == 2) {
    MetaplecticKernel k(S, grid, "b-chart");
    k.dense = std::make_shared<OperatorMatrix>(build_b_chart_2d(S, grid));
    return k;
  }

  try {
    MetaplecticKernel k(S, grid, "b-chart");
    k.dense = std::make_shared<OperatorMatrix>(build_b_chart_1d(S, grid));
    return k;
  } catch (const KernelBuildError&) {
    // position-side Gaussian grows; fall back to the three-shear split
    // S = [[1,(a-1)/c],[0,1]] [[1,0],[c,1]] [[1,(d-1)/c],[0,1]] (det +1, c != 0)
    if (S.det_class() != 1 || std::abs(S.c()) < 1e-13) throw;
    const cplx c = S.c();
    const cplx b1 = (S.a() - 1.0) / c, b2 = (S.d() - 1.0) / c;
    // dense composition of the factors does quadrature; every factor chirp
    // must be resolved
    const double ximax = std::abs(grid.freq_node(0));
    check_chirp_nyquist(kI * b1 / (2.0 * grid.hbar), ximax, grid.dxi(),
                        "three-shear split (left factor)");
    check_chirp_nyquist(kI * b2 / (2.0 * grid.hbar), ximax, grid.dxi(),
                        "three-shear split (right factor)");
    check_chirp_nyquist(-kI * c / (2.0 * grid.hbar), grid.half_width, grid.dx(),
                        "three-shear split (chirp factor)");
    const ComplexSymplectic Q1 = ComplexSymplectic::from_abcd(1.0, b1, 0.0, 1.0);
    const ComplexSymplectic P = ComplexSymplectic::from_abcd(1.0, 0.0, c, 1.0);
    const ComplexSymplectic Q2 = ComplexSymplectic::from_abcd(1.0, b2, 0.0, 1.0);
    const MetaplecticKernel k1 = kernel_build(Q1, grid);
    const MetaplecticKernel k2 = kernel_build(P, grid);
    const MetaplecticKernel k3 = kernel_build(Q2, grid);
    MetaplecticKernel k(S, grid, "a-chart");
    k.dense = std::make_shared<OperatorMatrix>(
        operator_compose(k1.op(), operator_compose(k2.op(), k3.op())));
    return k;
  }
}

PropagatedPrediction closed_form_propagate(const ComplexSymplectic& S,
                                           const CoherentLabel& label,
                                           double hbar) {
  const WidthParameter beta = moebius(S, label.alpha);
  if (beta.imag_min_eig() <= 0.0)
    throw DegenerateWidthError(
        "closed_form_propagate: S.alpha leaves the half-space");
  const TransportMatrix T = transport_matrix(S, label.alpha);
  const PhasePoint w = T.apply(label.z);

  cplx gtilde;
  if (S.n() == 1) {
    const cplx alpha = label.alpha.scalar();
    const cplx amp = S.a() + S.b() / alpha;
    const double ratio = (1.0 / beta.scalar()).imag() / (1.0 / alpha).imag();
    gtilde = std::pow(amp, -0.5) * std::pow(std::abs(ratio), 0.25);
  } else {
    const MatrixXcd amp = S.A() + S.B() * label.alpha.inverse();
    const double ratio = beta.inverse().imag().determinant() /
                         label.alpha.inverse().imag().determinant();
    gtilde = std::pow(amp.determinant(), -0.5) * std::pow(std::abs(ratio), 0.25);
  }

  // phase e^{i S(z) ^ w / (2 hbar)} with the wedge extended bilinearly
  const VectorXcd zs = S.apply(label.z.qp());
  const int n = S.n();
  cplx wedge = 0.0;
  for (int i = 0; i < n; ++i)
    wedge += zs(n + i) * w.q(i) - zs(i) * w.p(i);
  const cplx scalar = gtilde * std::exp(kI * wedge / (2.0 * hbar));
  return PropagatedPrediction{CoherentLabel{w, beta}, scalar};
}

cplx audited_propagation_phase(const ComplexSymplectic& S,
                               const WidthParameter& alpha, const PhasePoint& z,
                               double hbar) {
  const VectorXcd zs = S.lambda_twist().apply(z.qp());
  const PhasePoint w = kernel_center_map(S, alpha).apply(z);
  const int n = S.n();
  cplx wedge = 0.0;
  for (int i = 0; i < n; ++i)
    wedge += zs(n + i) * w.q(i) - zs(i) * w.p(i);
  return std::exp(kI * wedge / (2.0 * hbar));
}

ComplexSymplectic case_free_evolution(double t) {
  return ComplexSymplectic::from_abcd(1.0, cplx(0.0, -t), 0.0, 1.0);
}

ComplexSymplectic case_gaussian_multiplier(double t) {
  return ComplexSymplectic::from_abcd(1.0, 0.0, cplx(0.0, -t), 1.0);
}

ComplexSymplectic case_complex_oscillator(double t) {
  return ComplexSymplectic::from_abcd(std::cosh(t), cplx(0.0, std::sinh(t)),
                                      cplx(0.0, -std::sinh(t)), std::cosh(t));
}

ComplexSymplectic case_rotation(double theta) {
  return ComplexSymplectic::from_abcd(std::cos(theta), std::sin(theta),
                                      -std::sin(theta), std::cos(theta));
}

ComplexSymplectic case_shear(double s) {
  return ComplexSymplectic::from_abcd(1.0, s, 0.0, 1.0);
}

std::vector<AuditCase> standard_audit_cases() {
  const WidthParameter iw(cplx(0, 1));
  const std::vector<PhasePoint> zs{PhasePoint::of(0, 0), PhasePoint::of(1, 1),
                                   PhasePoint::of(-0.8, 0.6)};
  std::vector<AuditCase> cases;
  for (double t : {0.1, 0.25})
    cases.push_back({"free evolution t=" + std::to_string(t),
                     case_free_evolution(t), iw, zs});
  for (double t : {0.1, 0.25})
    cases.push_back({"gaussian multiplier t=" + std::to_string(t),
                     case_gaussian_multiplier(t), iw, zs});
  cases.push_back({"complexified oscillator t=0.2", case_complex_oscillator(0.2),
                   iw, zs});
  return cases;
}

namespace {

struct FamilyHypothesis {
  std::string name;
  WidthParameter beta;
  MatrixXcd source;  // matrix feeding the center relation
};

std::vector<FamilyHypothesis> build_families(const ComplexSymplectic& M,
                                             const WidthParameter& alpha) {
  const ComplexSymplectic Minv = M.inverse();
  std::vector<FamilyHypothesis> fams;
  const WidthParameter bS = moebius(M, alpha);
  const WidthParameter bSi = moebius(Minv, alpha);
  fams.push_back({"moebius(S), transport(S)", bS, M.matrix()});
  fams.push_back({"moebius(S), transport(S^-1)", bS, Minv.matrix()});
  fams.push_back({"moebius(S^-1), transport(S)", bSi, M.matrix()});
  fams.push_back({"moebius(S^-1), transport(S^-1)", bSi, Minv.matrix()});
  return fams;
}

PhasePoint hypothesis_center(const FamilyHypothesis& f, const PhasePoint& z) {
  const VectorXcd w = f.source * z.qp().cast<cplx>();
  const int n = z.n();
  const VectorXcd u = w.head(n) + f.beta.value() * w.tail(n);
  return real_center(f.beta, u);
}

}  // namespace

ConventionReport convention_audit(const std::vector<AuditCase>& cases,
                                  const GridSpec& grid) {
  ConventionReport rep;
  std::map<std::string, double> family_worst;

  for (const AuditCase& cs : cases) {
    AuditCaseResult res;
    res.name = cs.name;

    ComplexSymplectic fed = cs.S;
    std::optional<MetaplecticKernel> kernel;
    try {
      kernel.emplace(kernel_build(cs.S, grid));
    } catch (const KernelBuildError&) {
      fed = cs.S.inverse();
      kernel.emplace(kernel_build(fed, grid));
      res.fed_inverse = true;
    }

    const auto fams = build_families(fed, cs.alpha);
    std::vector<FamilyFit> fits(fams.size());
    for (size_t fi = 0; fi < fams.size(); ++fi) fits[fi].family = fams[fi].name;

    for (const PhasePoint& z : cs.zs) {
      const CoherentLabel in{z, cs.alpha};
      const WaveFunction out = kernel->apply(coherent_state(in, grid));
      const GaussianFit fit = gaussian_fit(out);
      res.fit_residual = std::max(res.fit_residual, fit.residual);
      if (z.qp().norm() == 0.0) {
        res.fitted_beta = fit.beta.scalar();
        res.fitted_lambda = fit.lambda;
        try {
          const auto pred = closed_form_propagate(fed, in, grid.hbar);
          res.lambda_ratio = fit.lambda / pred.scalar;
        } catch (const std::exception&) {
          res.lambda_ratio = 0.0;
        }
      } else {
        res.fitted_w = fit.z;
      }
      for (size_t fi = 0; fi < fams.size(); ++fi) {
        fits[fi].beta_err = std::max(
            fits[fi].beta_err, (fit.beta.value() - fams[fi].beta.value()).norm());
        fits[fi].w_err = std::max(
            fits[fi].w_err, (fit.z.qp() - hypothesis_center(fams[fi], z).qp()).norm());
      }
    }

    double best = 1e300;
    for (const auto& f : fits) {
      if (f.worst() < best) {
        best = f.worst();
        res.best_family = f.family;
      }
      auto it = family_worst.find(f.family);
      if (it == family_worst.end())
        family_worst[f.family] = f.worst();
      else
        it->second = std::max(it->second, f.worst());
    }
    res.families = fits;
    rep.cases.push_back(std::move(res));
  }

  // a family wins when it matches every case; require uniqueness
  int winners = 0;
  for (const auto& [name, worst] : family_worst) {
    if (worst <= 1e-6) {
      ++winners;
      rep.winning_family = name;
      rep.winner_worst_error = worst;
    }
  }
  rep.unique_winner = (winners == 1);
  if (winners != 1 && !family_worst.empty()) {
    double best = 1e300;
    for (const auto& [name, worst] : family_worst)
      if (worst < best) {
        best = worst;
        rep.winning_family = name;
        rep.winner_worst_error = worst;
      }
  }
  return rep;
}

std::vector<MetaArrangementRow> meta_relation_audit(const ComplexSymplectic& S,
                                                    const GridSpec& grid) {
  if (!S.is_real())
    throw std::invalid_argument("meta_relation_audit: real S only (uses U^*)");
  const MetaplecticKernel k = kernel_build(S, grid);
  const MatrixXcd& U = k.op().m;
  const double w = std::pow(grid.dx(), grid.dim);
  const MatrixXcd Udag = U.adjoint();
  const MatrixXcd X = position_operator(grid).m;
  const MatrixXcd P = momentum_operator(grid).m;

  // the relation is measured on an interior-localized probe frame; boundary
  // columns of an oscillatory kernel carry no meaning entrywise
  std::vector<VectorXcd> probes;
  for (const auto& z : {PhasePoint::of(0, 0), PhasePoint::of(1.5, 0),
                        PhasePoint::of(0, 1.5), PhasePoint::of(-1, 1),
                        PhasePoint::of(2, -2), PhasePoint::of(-1.5, -0.5)})
    probes.push_back(
        coherent_state(CoherentLabel{z, WidthParameter(cplx(0, 1))}, grid).samples);

  auto matvec = [&](const MatrixXcd& M, const VectorXcd& v) {
    return VectorXcd((M * v) * w);
  };
  auto frame_residual = [&](const MatrixXcd& left, const MatrixXcd& right,
                            const MatrixXcd& V) {
    double worst = 0.0;
    for (const auto& psi : probes) {
      const VectorXcd got = matvec(left, matvec(X, matvec(right, psi)));
      const VectorXcd gotP = matvec(left, matvec(P, matvec(right, psi)));
      const VectorXcd wantX =
          V(0, 0) * matvec(X, psi) + V(0, 1) * matvec(P, psi);
      const VectorXcd wantP =
          V(1, 0) * matvec(X, psi) + V(1, 1) * matvec(P, psi);
      const double scale = std::max(wantX.norm() + wantP.norm(), 1e-30);
      worst = std::max(worst,
                       ((got - wantX).norm() + (gotP - wantP).norm()) / scale);
    }
    return worst;
  };

  const std::vector<std::pair<std::string, MatrixXcd>> versions = {
      {"S", S.matrix()},
      {"S^-1", S.inverse().matrix()},
      {"LSL", S.lambda_twist().matrix()},
      {"LS^-1L", S.lambda_twist().inverse().matrix()}};

  std::vector<MetaArrangementRow> rows;
  for (const auto& [vname, V] : versions) {
    rows.push_back({"U* Z U = (" + vname + ") Z", frame_residual(Udag, U, V)});
    rows.push_back({"U Z U* = (" + vname + ") Z", frame_residual(U, Udag, V)});
  }
  return rows;
}

ComposeCheckReport kernel_compose_check(const ComplexSymplectic& S,
                                        const ComplexSymplectic& S2,
                                        const GridSpec& grid,
                                        const std::vector<CoherentLabel>& probes) {
  const MetaplecticKernel k1 = kernel_build(S, grid);
  const MetaplecticKernel k2 = kernel_build(S2, grid);
  const MetaplecticKernel k12 = kernel_build(S * S2, grid);
  ComposeCheckReport rep;
  for (const CoherentLabel& probe : probes) {
    const WaveFunction psi = coherent_state(probe, grid);
    const WaveFunction lhs = k1.apply(k2.apply(psi));
    const WaveFunction rhs = k12.apply(psi);
    const cplx c = inner_product(rhs, lhs) / inner_product(rhs, rhs);
    WaveFunction diff{grid, lhs.samples - c * rhs.samples};
    const double res = diff.norm() / (std::abs(c) * rhs.norm());
    rep.rows.push_back({probe, c, res});
    rep.worst = std::max(rep.worst, res);
  }
  return rep;
}

nlohmann::json ConventionReport::to_json() const {
  nlohmann::json jcases = nlohmann::json::array();
  for (const auto& c : cases) {
    nlohmann::json families = nlohmann::json::array();
    for (const auto& f : c.families)
      families.push_back(
          {{"family", f.family}, {"beta_err", f.beta_err}, {"w_err", f.w_err}});
    jcases.push_back(
        {{"name", c.name},
         {"fed_inverse", c.fed_inverse},
         {"fit_residual", c.fit_residual},
         {"fitted",
          {{"beta", complex_to_json(c.fitted_beta)},
           {"w",
            {c.fitted_w.q.size() ? c.fitted_w.q(0) : 0.0,
             c.fitted_w.p.size() ? c.fitted_w.p(0) : 0.0}},
           {"lambda", complex_to_json(c.fitted_lambda)}}},
         {"lambda_ratio", complex_to_json(c.lambda_ratio)},
         {"family_residuals", families},
         {"best_family", c.best_family}});
  }
  nlohmann::json jmeta = nlohmann::json::array();
  for (const auto& r : meta_rows)
    jmeta.push_back({{"arrangement", r.arrangement}, {"residual", r.residual}});
  return {{"cases", jcases},
          {"winning_family", winning_family},
          {"unique_winner", unique_winner},
          {"winner_worst_error", winner_worst_error},
          {"meta_rows", jmeta},
          {"meta_arrangement", meta_arrangement}};
}

}  // namespace mkop
