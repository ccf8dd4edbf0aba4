#include "mkop/table.hpp"

#include <cmath>
#include <cstdio>

#include "mkop/metaplectic.hpp"
#include "mkop/quantize.hpp"

namespace mkop {

namespace {

std::string fmt_cplx(cplx v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", v.real(), v.imag());
  return buf;
}

std::string fmt_mat(const MatrixXcd& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[[%s, %s], [%s, %s]]", fmt_cplx(m(0, 0)).c_str(),
                fmt_cplx(m(0, 1)).c_str(), fmt_cplx(m(1, 0)).c_str(),
                fmt_cplx(m(1, 1)).c_str());
  return buf;
}

std::string fmt_mat_real(const MatrixXd& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "[[%.6g, %.6g], [%.6g, %.6g]]", m(0, 0), m(0, 1),
                m(1, 0), m(1, 1));
  return buf;
}

std::string fmt_real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct PrintedRow {
  std::string name;
  ComplexSymplectic S;
  MatrixXcd mix;        // printed S^{-1} S^c
  cplx moebius_i;       // printed S^{-1} S^c . i
  MatrixXd T_mix;       // printed _iT_{S^{-1} S^c}
  MatrixXd T_bar;       // printed _iT_{S^c}
  std::optional<double> D_mag;  // |printed D_i(1, 1)|
};

MatrixXcd m2(cplx a, cplx b, cplx c, cplx d) {
  MatrixXcd m(2, 2);
  m << a, b, c, d;
  return m;
}

MatrixXd m2r(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

std::vector<PrintedRow> printed_rows(const std::string& name, double t,
                                     double hbar) {
  const cplx I(0, 1);
  std::vector<PrintedRow> rows;
  if (name == "annb1") {
    rows.push_back(
        {"free ev.", case_free_evolution(t), m2(1, 2.0 * t * I, 0, 1),
         I * (1 + 2 * t), m2r(1, 0, 0, (1 + 4 * t) / (1 + 2 * t)),
         m2r(1, 0, 0, (1 + 2 * t) / (1 + t)),
         std::exp(t * std::pow(1 + 3 * t, 2) / std::pow(1 + 2 * t, 2) / hbar)});
    rows.push_back(
        {"x by e^{-tx^2}", case_gaussian_multiplier(t), m2(1, 0, 2.0 * t * I, 1),
         I / (1 - 2 * t), m2r((1 - 4 * t) / (1 - 2 * t), 0, 0, 1),
         m2r((1 - 2 * t) / (1 - t), 0, 0, 1),
         std::exp(t * std::pow(1 + 3 * t, 2) / std::pow(1 + 2 * t, 2) / hbar)});
    rows.push_back({"dilation",
                    ComplexSymplectic::from_abcd(std::polar(1.0, t), 0, 0,
                                                 std::polar(1.0, -t)),
                    m2(std::polar(1.0, -2 * t), 0, 0, std::polar(1.0, 2 * t)),
                    std::polar(1.0, -4 * t) * I,
                    m2r((1 - 4 * t) / (1 - 2 * t), 0, 0, 1),
                    m2r((1 - 2 * t) / (1 - t), 0, 0, 1), 1.0});
    rows.push_back(
        {"oscillator", case_complex_oscillator(t),
         m2(std::cosh(2 * t), I * std::sinh(2 * t), -I * std::sinh(2 * t),
            std::cosh(2 * t)),
         I, m2r(std::exp(-2 * t), 0, 0, std::exp(2 * t)),
         m2r(std::exp(-t), 0, 0, std::exp(t)),
         std::exp(std::sinh(2 * t) * 2.0 / hbar)});
    rows.push_back({"antidiagonal",
                    ComplexSymplectic::from_abcd(0, I, I, 0, +1),
                    m2(-1, 0, 0, -1), I, m2r(-1, 0, 0, -1), m2r(-1, 0, 0, 1),
                    1.0});
  } else if (name == "annb2") {
    rows.push_back({"its opposite",
                    ComplexSymplectic::from_abcd(0, I, -I, 0, -1),
                    m2(1, 0, 0, 1), I, m2r(1, 0, 0, 1), m2r(-1, 0, 0, -1),
                    std::nullopt});
    rows.push_back({"anticanonical example",
                    ComplexSymplectic::from_abcd(0, -I, I, 0, -1),
                    m2(-1, 0, 0, -1), I, m2r(-1, 0, 0, -1), m2r(1, 0, 0, 1),
                    std::nullopt});
  } else {
    throw std::invalid_argument("reproduce_table: unknown table " + name);
  }
  return rows;
}

}  // namespace

bool TableRowReport::all_match() const {
  for (const auto& c : cells)
    if (!c.match) return false;
  return true;
}

std::vector<TableRowReport> reproduce_table(const std::string& name, double t,
                                            double hbar) {
  const double tol = 1e-9;
  const WidthParameter iw(cplx(0, 1));
  std::vector<TableRowReport> out;
  for (const PrintedRow& row : printed_rows(name, t, hbar)) {
    TableRowReport rep;
    rep.row = row.name;

    const ComplexSymplectic mix = row.S.inverse() * row.S.conjugated();
    rep.cells.push_back({"S^-1 Sbar", fmt_mat(mix.matrix()), fmt_mat(row.mix),
                         (mix.matrix() - row.mix).norm() <= tol});

    const cplx beta = moebius(mix, iw).scalar();
    rep.cells.push_back({"S^-1 Sbar . i", fmt_cplx(beta), fmt_cplx(row.moebius_i),
                         std::abs(beta - row.moebius_i) <= tol});

    const TransportMatrix Tm = transport_matrix(mix, iw);
    rep.cells.push_back({"T_{S^-1 Sbar}", fmt_mat_real(Tm.m),
                         fmt_mat_real(row.T_mix), (Tm.m - row.T_mix).norm() <= tol});

    const TransportMatrix Tb = transport_matrix(row.S.conjugated(), iw);
    rep.cells.push_back({"T_{Sbar}", fmt_mat_real(Tb.m), fmt_mat_real(row.T_bar),
                         (Tb.m - row.T_bar).norm() <= tol});

    if (row.D_mag) {
      const cplx D = normalization_D(row.S, iw, PhasePoint::of(1, 1), hbar);
      rep.cells.push_back({"|D_i(1,1)|", fmt_real(std::abs(D)),
                           fmt_real(*row.D_mag),
                           std::abs(std::abs(D) - *row.D_mag) <=
                               1e-9 * std::max(1.0, *row.D_mag)});
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::string table_markdown(const std::vector<TableRowReport>& rows) {
  std::string md =
      "| row | column | computed | printed | verdict |\n"
      "|---|---|---|---|---|\n";
  for (const auto& r : rows)
    for (const auto& c : r.cells) {
      md += "| " + r.row + " | " + c.column + " | " + c.computed + " | " +
            c.printed + " | " + (c.match ? "MATCH" : "MISMATCH") + " |\n";
    }
  return md;
}

}  // namespace mkop
