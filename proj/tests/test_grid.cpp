#include <doctest.h>

#include <random>

#include "mkop/coherent.hpp"
#include "mkop/grid.hpp"

using namespace mkop;

namespace {
const GridSpec kSmall{1, 12.0, 256, 0.5};
}

TEST_CASE("grid spec validation") {
  CHECK_THROWS(GridSpec{1, 10.0, 100, 0.5}.validate());  // not a power of two
  CHECK_THROWS(GridSpec{1, -1.0, 256, 0.5}.validate());
  CHECK_NOTHROW(GridSpec::default_1d().validate());
  CHECK_NOTHROW(GridSpec::default_2d().validate());
}

TEST_CASE("midpoint grid is symmetric about zero") {
  const VectorXd x = kSmall.nodes();
  const int N = kSmall.points_per_axis;
  for (int k = 0; k < N; ++k)
    CHECK(x(k) == doctest::Approx(-x(N - 1 - k)).epsilon(1e-15));
}

TEST_CASE("inner product: hermitian symmetry and gaussian overlaps") {
  const auto psi0 = coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), kSmall);
  const auto psi1 = coherent_state(CoherentLabel::of(1, 0, cplx(0, 1)), kSmall);
  CHECK(std::abs(inner_product(psi0, psi1) -
                 std::conj(inner_product(psi1, psi0))) < 1e-14);

  // <psi^i_0 | psi^i_{(1,0)}> = e^{-1/(4 hbar)}
  CHECK(std::abs(inner_product(psi0, psi1) - std::exp(-0.5)) < 1e-10);

  // <psi^i_0 | psi^{2i}_0> = 2^{3/4}/sqrt(3)
  const auto psi2 = coherent_state(CoherentLabel::of(0, 0, cplx(0, 2)), kSmall);
  CHECK(std::abs(inner_product(psi0, psi2) - std::pow(2.0, 0.75) / std::sqrt(3.0)) <
        1e-10);
}

TEST_CASE("parity is an exact involution and relabels coherent states") {
  const auto psi = coherent_state(CoherentLabel::of(0.7, -1.3, cplx(0.2, 0.8)),
                                  kSmall);
  const auto twice = parity_apply(parity_apply(psi));
  CHECK((twice.samples - psi.samples).norm() == 0.0);

  const auto flipped = coherent_state(
      CoherentLabel::of(-0.7, 1.3, cplx(0.2, 0.8)), kSmall);
  CHECK((parity_apply(psi).samples - flipped.samples).cwiseAbs().maxCoeff() < 1e-12);

  const auto even = coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), kSmall);
  CHECK((parity_apply(even).samples - even.samples).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fourier transform: unitarity, inverse, gaussian image, F^2 = parity") {
  const auto psi = coherent_state(CoherentLabel::of(0.5, 1.0, cplx(-0.1, 1.2)),
                                  kSmall);
  const auto hat = fourier_transform(psi, FourierDirection::Forward);
  CHECK(std::abs(hat.norm() - psi.norm()) < 1e-10);

  const auto back = fourier_transform(hat, FourierDirection::Inverse);
  CHECK((back.samples - psi.samples).cwiseAbs().maxCoeff() < 1e-10);

  // hbar-transform of the alpha = i ground state is the same function,
  // sampled on the conjugate lattice
  const auto g = coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), kSmall);
  const auto ghat = fourier_transform(g, FourierDirection::Forward);
  const auto gconj =
      coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), kSmall.conjugate_grid());
  CHECK((ghat.samples - gconj.samples).cwiseAbs().maxCoeff() < 1e-9);

  // double transform equals parity up to a global phase
  const auto twice = fourier_transform(hat, FourierDirection::Forward);
  const auto par = parity_apply(psi);
  cplx phase = 0.0;
  double nrm = 0.0;
  for (int k = 0; k < kSmall.points_per_axis; ++k) {
    phase += std::conj(par.samples(k)) * twice.samples(k);
    nrm += std::norm(par.samples(k));
  }
  phase /= nrm;
  CHECK(std::abs(std::abs(phase) - 1.0) < 1e-9);
  CHECK((twice.samples - phase * par.samples).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fourier transform against direct summation at N = 64") {
  const GridSpec tiny{1, 8.0, 64, 1.0};
  WaveFunction psi{tiny, VectorXcd(64)};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 64; ++k) psi.samples(k) = cplx(u(rng), u(rng));
  const auto hat = fourier_transform(psi, FourierDirection::Forward);
  for (int k = 0; k < 64; k += 7) {
    cplx direct = 0.0;
    for (int j = 0; j < 64; ++j)
      direct += psi.samples(j) *
                std::polar(1.0, -tiny.node(j) * tiny.freq_node(k) / tiny.hbar);
    direct *= tiny.dx() / std::sqrt(2.0 * kPi * tiny.hbar);
    CHECK(std::abs(hat.samples(k) - direct) < 1e-12);
  }
}

TEST_CASE("operator apply: identity, multiplication, fourier kernel") {
  const auto psi = coherent_state(CoherentLabel::of(0.3, 0.4, cplx(0, 1)), kSmall);

  const auto id = identity_operator(kSmall);
  CHECK((operator_apply(id, psi).samples - psi.samples).cwiseAbs().maxCoeff() <
        1e-12);

  const auto x_op = position_operator(kSmall);
  const auto xpsi = operator_apply(x_op, psi);
  for (int k = 0; k < kSmall.points_per_axis; k += 37)
    CHECK(std::abs(xpsi.samples(k) - kSmall.node(k) * psi.samples(k)) < 1e-12);

  const auto F = fourier_operator(kSmall, FourierDirection::Forward);
  const auto viaop = operator_apply(F, psi);
  const auto viafft = fourier_transform(psi, FourierDirection::Forward);
  CHECK((viaop.samples - viafft.samples).cwiseAbs().maxCoeff() < 1e-8);

  const auto Fi = fourier_operator(kSmall, FourierDirection::Inverse);
  const auto composed = operator_compose(Fi, F);
  CHECK((composed.m - identity_operator(kSmall).m).cwiseAbs().maxCoeff() <
        1e-8 / kSmall.dx());
}

TEST_CASE("momentum operator acts as hbar/i d/dx on a smooth packet") {
  const auto P = momentum_operator(kSmall);
  const CoherentLabel lb = CoherentLabel::of(0.0, 0.8, cplx(0, 1));
  const auto psi = coherent_state(lb, kSmall);
  const auto ppsi = operator_apply(P, psi);
  // analytic derivative of the coherent state
  const cplx ainv = 1.0 / lb.alpha.scalar();
  for (int k = 60; k < 200; k += 17) {
    const double x = kSmall.node(k);
    const cplx dlog = -kI / kSmall.hbar * ainv * (x - 0.0) + kI * 0.8 / kSmall.hbar;
    const cplx expect = -kI * kSmall.hbar * dlog * psi.samples(k);
    CHECK(std::abs(ppsi.samples(k) - expect) < 1e-6);
  }
}

TEST_CASE("operator apply is linear") {
  const auto a = coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), kSmall);
  const auto b = coherent_state(CoherentLabel::of(1, -1, cplx(0.3, 1.4)), kSmall);
  const auto P = momentum_operator(kSmall);
  WaveFunction mix{kSmall, cplx(0.3, 0.1) * a.samples + cplx(-1.2, 0.7) * b.samples};
  const auto lhs = operator_apply(P, mix);
  const VectorXcd rhs = cplx(0.3, 0.1) * operator_apply(P, a).samples +
                        cplx(-1.2, 0.7) * operator_apply(P, b).samples;
  CHECK((lhs.samples - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian fit recovers exact labels") {
  const CoherentLabel lb = CoherentLabel::of(1.0, 2.0, cplx(0, 1));
  auto psi = coherent_state(lb, GridSpec::default_1d());
  const auto fit = gaussian_fit(psi);
  CHECK(std::abs(fit.beta.scalar() - cplx(0, 1)) < 1e-10);
  CHECK(std::abs(fit.z.q(0) - 1.0) < 1e-10);
  CHECK(std::abs(fit.z.p(0) - 2.0) < 1e-10);
  CHECK(std::abs(fit.lambda - 1.0) < 1e-9);
  CHECK(fit.residual < 1e-10);
}

TEST_CASE("gaussian fit recovers scale and a complex width") {
  const CoherentLabel lb = CoherentLabel::of(0.0, 1.0, cplx(1, 1));
  auto psi = coherent_state(lb, GridSpec::default_1d());
  psi.samples *= 2.0;
  const auto fit = gaussian_fit(psi);
  CHECK(std::abs(fit.beta.scalar() - cplx(1, 1)) < 1e-8);
  CHECK(std::abs(fit.z.q(0)) < 1e-8);
  CHECK(std::abs(fit.z.p(0) - 1.0) < 1e-8);
  CHECK(std::abs(fit.lambda - 2.0) < 1e-8);
}

TEST_CASE("gaussian fit flags unusable input") {
  WaveFunction psi{kSmall, VectorXcd::Zero(kSmall.size())};
  psi.samples(128) = 1.0;  // single spike: support too small
  CHECK_THROWS_AS(gaussian_fit(psi), FitError);
}

TEST_CASE("2d gaussian fit recovers a matrix width") {
  const GridSpec g2 = GridSpec::default_2d();
  MatrixXcd alpha(2, 2);
  alpha << cplx(0.2, 1.1), cplx(0.1, 0.2), cplx(0.1, 0.2), cplx(-0.1, 0.9);
  VectorXd q(2), p(2);
  q << 0.5, -0.3;
  p << 0.4, 0.2;
  const CoherentLabel lb{PhasePoint(q, p), WidthParameter(alpha)};
  const auto psi = coherent_state(lb, g2);
  const auto fit = gaussian_fit(psi);
  CHECK((fit.beta.value() - alpha).norm() < 1e-7);
  CHECK((fit.z.q - q).norm() < 1e-8);
  CHECK((fit.z.p - p).norm() < 1e-8);
  CHECK(fit.residual < 1e-9);
}

TEST_CASE("grid mismatch is rejected") {
  const GridSpec a{1, 12.0, 256, 0.5};
  const GridSpec b{1, 12.0, 512, 0.5};
  const auto pa = coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), a);
  const auto pb = coherent_state(CoherentLabel::of(0, 0, cplx(0, 1)), b);
  CHECK_THROWS(inner_product(pa, pb));
  CHECK_THROWS(operator_apply(identity_operator(a), pb));
}
