#include <cmath>
#include <vector>

#include "mkop/coherent.hpp"
#include "mkop/grid.hpp"

namespace mkop {

namespace {

constexpr double kSupportFraction = 1e-6;
constexpr int kMinSupport = 32;

VectorXcd model_samples(const GridSpec& grid, const CoherentLabel& label,
                        cplx lambda) {
  return coherent_state(label, grid).samples * lambda;
}

double rel_residual(const WaveFunction& psi, const CoherentLabel& label,
                    cplx lambda) {
  const VectorXcd diff = psi.samples - model_samples(psi.grid, label, lambda);
  return diff.norm() / psi.samples.norm();
}

// weighted least squares of y against the given monomial design rows
VectorXcd solve_ls(const MatrixXcd& design, const VectorXcd& y,
                   const VectorXd& w) {
  MatrixXcd A = design;
  VectorXcd b = y;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    A.row(i) *= w(i);
    b(i) *= w(i);
  }
  return A.colPivHouseholderQr().solve(b);
}

struct Params1d {
  cplx beta;
  double q, p;
  cplx lambda;
};

Params1d labels_from_quadratic(cplx c0, cplx c1, cplx c2, double hbar) {
  // log psi = c0 + c1 x + c2 x^2 with c2 = -i/(2 hbar beta),
  // c1 = (i/hbar)(q/beta + p), c0 = log lambda + log N - i p q/(2 hbar)
  Params1d out;
  out.beta = -kI / (2.0 * hbar * c2);
  if (!(out.beta.imag() > 0.0))
    throw FitError("fit failed: fitted width is not in the upper half-plane");
  const cplx mu = 1.0 / out.beta;
  const cplx w = -kI * hbar * c1;  // = q mu + p
  out.q = w.imag() / mu.imag();
  out.p = w.real() - out.q * mu.real();
  const double pref = coherent_prefactor(WidthParameter(out.beta), hbar);
  out.lambda = std::exp(c0 + kI * out.p * out.q / (2.0 * hbar)) / pref;
  return out;
}

GaussianFit fit_1d(const WaveFunction& psi) {
  const GridSpec& g = psi.grid;
  const int N = g.points_per_axis;
  const double hbar = g.hbar;

  int peak = 0;
  double amax = 0.0;
  for (int k = 0; k < N; ++k)
    if (std::abs(psi.samples(k)) > amax) {
      amax = std::abs(psi.samples(k));
      peak = k;
    }
  if (amax == 0.0) throw FitError("fit failed: zero input");
  const double thresh = kSupportFraction * amax;

  int lo = peak, hi = peak;
  while (lo > 0 && std::abs(psi.samples(lo - 1)) > thresh) --lo;
  while (hi < N - 1 && std::abs(psi.samples(hi + 1)) > thresh) ++hi;
  const int count = hi - lo + 1;
  if (count < kMinSupport) throw FitError("insufficient support");

  // unwrapped complex log along the support, walking out from the peak
  VectorXcd logv(count);
  VectorXd weight(count);
  logv(peak - lo) = std::log(psi.samples(peak));
  for (int k = peak + 1; k <= hi; ++k) {
    const double dphi = std::arg(psi.samples(k) / psi.samples(k - 1));
    logv(k - lo) = cplx(std::log(std::abs(psi.samples(k))),
                        logv(k - 1 - lo).imag() + dphi);
  }
  for (int k = peak - 1; k >= lo; --k) {
    const double dphi = std::arg(psi.samples(k) / psi.samples(k + 1));
    logv(k - lo) = cplx(std::log(std::abs(psi.samples(k))),
                        logv(k + 1 - lo).imag() + dphi);
  }
  for (int k = lo; k <= hi; ++k) weight(k - lo) = std::abs(psi.samples(k));

  MatrixXcd design(count, 3);
  for (int k = lo; k <= hi; ++k) {
    const double x = g.node(k);
    design(k - lo, 0) = 1.0;
    design(k - lo, 1) = x;
    design(k - lo, 2) = x * x;
  }
  const VectorXcd c = solve_ls(design, logv, weight);
  Params1d par = labels_from_quadratic(c(0), c(1), c(2), hbar);

  // one Gauss-Newton polish on (Re beta, Im beta, q, p, Re lambda, Im lambda)
  auto pack = [&](const Params1d& pp) {
    VectorXd th(6);
    th << pp.beta.real(), pp.beta.imag(), pp.q, pp.p, pp.lambda.real(),
        pp.lambda.imag();
    return th;
  };
  auto unpack = [&](const VectorXd& th) {
    return Params1d{cplx(th(0), th(1)), th(2), th(3), cplx(th(4), th(5))};
  };
  auto resid_vec = [&](const VectorXd& th) -> VectorXcd {
    const Params1d pp = unpack(th);
    if (!(pp.beta.imag() > 0.0)) throw FitError("fit failed: GN left half-plane");
    const CoherentLabel lb{PhasePoint::of(pp.q, pp.p), WidthParameter(pp.beta)};
    return psi.samples - model_samples(g, lb, pp.lambda);
  };

  VectorXd theta = pack(par);
  const double res0 = rel_residual(
      psi, CoherentLabel{PhasePoint::of(par.q, par.p), WidthParameter(par.beta)},
      par.lambda);
  try {
    const VectorXcd r0 = resid_vec(theta);
    MatrixXcd J(r0.size(), 6);
    for (int c2 = 0; c2 < 6; ++c2) {
      VectorXd tp = theta, tm = theta;
      const double h = 1e-6 * std::max(1.0, std::abs(theta(c2)));
      tp(c2) += h;
      tm(c2) -= h;
      J.col(c2) = (resid_vec(tp) - resid_vec(tm)) / (2.0 * h);
    }
    // real normal equations on stacked [Re; Im]
    MatrixXd Jr(2 * r0.size(), 6);
    VectorXd rr(2 * r0.size());
    Jr << J.real(), J.imag();
    rr << r0.real(), r0.imag();
    const VectorXd step = Jr.colPivHouseholderQr().solve(rr);
    VectorXd theta2 = theta - step;
    const Params1d par2 = unpack(theta2);
    if (par2.beta.imag() > 0.0) {
      const double res2 = rel_residual(
          psi,
          CoherentLabel{PhasePoint::of(par2.q, par2.p), WidthParameter(par2.beta)},
          par2.lambda);
      if (res2 < res0) {
        par = par2;
      }
    }
  } catch (const FitError&) {
    // keep the regression estimate
  }

  const CoherentLabel lb{PhasePoint::of(par.q, par.p), WidthParameter(par.beta)};
  GaussianFit fit{WidthParameter(par.beta), lb.z, par.lambda,
                  rel_residual(psi, lb, par.lambda)};
  if (!std::isfinite(fit.residual)) throw FitError("fit failed: non-finite residual");
  return fit;
}

struct Params2d {
  Matrix2cd ainv;  // = beta^{-1}, symmetric
  Vector2d q, p;
  cplx lambda;
};

VectorXd pack2(const Params2d& pp) {
  VectorXd th(12);
  th << pp.ainv(0, 0).real(), pp.ainv(0, 0).imag(), pp.ainv(1, 1).real(),
      pp.ainv(1, 1).imag(), pp.ainv(0, 1).real(), pp.ainv(0, 1).imag(), pp.q(0),
      pp.q(1), pp.p(0), pp.p(1), pp.lambda.real(), pp.lambda.imag();
  return th;
}

Params2d unpack2(const VectorXd& th) {
  Params2d pp;
  pp.ainv(0, 0) = cplx(th(0), th(1));
  pp.ainv(1, 1) = cplx(th(2), th(3));
  pp.ainv(0, 1) = pp.ainv(1, 0) = cplx(th(4), th(5));
  pp.q << th(6), th(7);
  pp.p << th(8), th(9);
  pp.lambda = cplx(th(10), th(11));
  return pp;
}

CoherentLabel label2(const Params2d& pp) {
  return CoherentLabel{PhasePoint(pp.q, pp.p),
                       WidthParameter(MatrixXcd(pp.ainv.inverse()))};
}

GaussianFit fit_2d(const WaveFunction& psi) {
  const GridSpec& g = psi.grid;
  const int N = g.points_per_axis;
  const double hbar = g.hbar;

  double amax = 0.0;
  for (Eigen::Index k = 0; k < psi.samples.size(); ++k)
    amax = std::max(amax, std::abs(psi.samples(k)));
  if (amax == 0.0) throw FitError("fit failed: zero input");
  const double thresh = kSupportFraction * amax;

  // support bounding box
  int ilo = N, ihi = -1, jlo = N, jhi = -1;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (std::abs(psi.samples(i * N + j)) > thresh) {
        ilo = std::min(ilo, i);
        ihi = std::max(ihi, i);
        jlo = std::min(jlo, j);
        jhi = std::max(jhi, j);
      }
  if (ihi < 0) throw FitError("insufficient support");

  int ipk = 0, jpk = 0;
  double best = -1.0;
  for (int i = ilo; i <= ihi; ++i)
    for (int j = jlo; j <= jhi; ++j)
      if (std::abs(psi.samples(i * N + j)) > best) {
        best = std::abs(psi.samples(i * N + j));
        ipk = i;
        jpk = j;
      }

  // unwrap phases along the peak row, then along columns
  MatrixXd phase(ihi - ilo + 1, jhi - jlo + 1);
  auto val = [&](int i, int j) { return psi.samples(i * N + j); };
  phase(ipk - ilo, jpk - jlo) = std::arg(val(ipk, jpk));
  for (int j = jpk + 1; j <= jhi; ++j)
    phase(ipk - ilo, j - jlo) =
        phase(ipk - ilo, j - 1 - jlo) + std::arg(val(ipk, j) / val(ipk, j - 1));
  for (int j = jpk - 1; j >= jlo; --j)
    phase(ipk - ilo, j - jlo) =
        phase(ipk - ilo, j + 1 - jlo) + std::arg(val(ipk, j) / val(ipk, j + 1));
  for (int j = jlo; j <= jhi; ++j) {
    for (int i = ipk + 1; i <= ihi; ++i)
      phase(i - ilo, j - jlo) =
          phase(i - 1 - ilo, j - jlo) + std::arg(val(i, j) / val(i - 1, j));
    for (int i = ipk - 1; i >= ilo; --i)
      phase(i - ilo, j - jlo) =
          phase(i + 1 - ilo, j - jlo) + std::arg(val(i, j) / val(i + 1, j));
  }

  std::vector<int> rows;
  std::vector<cplx> logs;
  std::vector<double> weights;
  std::vector<Vector2d> pts;
  for (int i = ilo; i <= ihi; ++i)
    for (int j = jlo; j <= jhi; ++j) {
      const cplx v = val(i, j);
      if (std::abs(v) <= thresh) continue;
      logs.push_back(cplx(std::log(std::abs(v)), phase(i - ilo, j - jlo)));
      weights.push_back(std::abs(v));
      pts.push_back(Vector2d(g.node(i), g.node(j)));
    }
  if (static_cast<int>(logs.size()) < kMinSupport)
    throw FitError("insufficient support");

  const int M = static_cast<int>(logs.size());
  MatrixXcd design(M, 6);
  VectorXcd y(M);
  VectorXd w(M);
  for (int k = 0; k < M; ++k) {
    const double x0 = pts[k](0), x1 = pts[k](1);
    design.row(k) << 1.0, x0, x1, x0 * x0, x1 * x1, x0 * x1;
    y(k) = logs[k];
    w(k) = weights[k];
  }
  const VectorXcd c = solve_ls(design, y, w);

  // quadratic form Q = -(i/2hbar) beta^{-1}
  Matrix2cd Q;
  Q << c(3), 0.5 * c(5), 0.5 * c(5), c(4);
  Params2d par;
  par.ainv = 2.0 * kI * hbar * Q;
  Eigen::Vector2cd c1(c(1), c(2));
  const Eigen::Vector2cd v = -kI * hbar * c1;  // = ainv q + p
  Eigen::Matrix2d imA = par.ainv.imag();
  par.q = imA.inverse() * v.imag();
  par.p = v.real() - par.ainv.real() * par.q;
  {
    const WidthParameter beta{MatrixXcd(par.ainv.inverse())};
    if (beta.imag_min_eig() <= 0.0)
      throw FitError("fit failed: fitted width not in the Siegel half-space");
    const double pref = coherent_prefactor(beta, hbar);
    par.lambda =
        std::exp(c(0) + kI * par.p.dot(par.q) / (2.0 * hbar)) / pref;
  }

  auto resid_of = [&](const Params2d& pp) {
    return rel_residual(psi, label2(pp), pp.lambda);
  };
  double res0 = resid_of(par);

  // one Gauss-Newton step
  try {
    auto resid_vec = [&](const VectorXd& th) -> VectorXcd {
      const Params2d pp = unpack2(th);
      return psi.samples - model_samples(g, label2(pp), pp.lambda);
    };
    VectorXd theta = pack2(par);
    const VectorXcd r0 = resid_vec(theta);
    MatrixXcd J(r0.size(), 12);
    for (int k = 0; k < 12; ++k) {
      VectorXd tp = theta, tm = theta;
      const double h = 1e-6 * std::max(1.0, std::abs(theta(k)));
      tp(k) += h;
      tm(k) -= h;
      J.col(k) = (resid_vec(tp) - resid_vec(tm)) / (2.0 * h);
    }
    MatrixXd Jr(2 * r0.size(), 12);
    VectorXd rr(2 * r0.size());
    Jr << J.real(), J.imag();
    rr << r0.real(), r0.imag();
    const VectorXd step = Jr.colPivHouseholderQr().solve(rr);
    const Params2d par2 = unpack2(VectorXd(pack2(par) - step));
    const WidthParameter beta2{MatrixXcd(par2.ainv.inverse())};
    if (beta2.imag_min_eig() > 0.0 && resid_of(par2) < res0) par = par2;
  } catch (const std::exception&) {
    // keep the regression estimate
  }

  const CoherentLabel lb = label2(par);
  return GaussianFit{lb.alpha, lb.z, par.lambda, resid_of(par)};
}

}  // namespace

GaussianFit gaussian_fit(const WaveFunction& psi) {
  psi.validate();
  if (psi.samples.norm() == 0.0) throw FitError("fit failed: zero norm");
  return psi.grid.dim == 1 ? fit_1d(psi) : fit_2d(psi);
}

}  // namespace mkop
