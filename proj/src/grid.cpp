#include "mkop/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "mkop/fft.hpp"

namespace mkop {

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
  if (half_width <= 0.0) throw std::invalid_argument("GridSpec: L > 0 required");
  if (hbar <= 0.0) throw std::invalid_argument("GridSpec: hbar > 0 required");
  if (points_per_axis < 16 || (points_per_axis & (points_per_axis - 1)) != 0)
    throw std::invalid_argument("GridSpec: N must be a power of two >= 16");
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(points_per_axis);
  return s;
}

VectorXd GridSpec::nodes() const {
  VectorXd x(points_per_axis);
  for (int k = 0; k < points_per_axis; ++k) x(k) = node(k);
  return x;
}

VectorXd GridSpec::freq_nodes() const {
  VectorXd xi(points_per_axis);
  for (int k = 0; k < points_per_axis; ++k) xi(k) = freq_node(k);
  return xi;
}

double WaveFunction::norm() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) s += std::norm(samples(i));
  return std::sqrt(s * std::pow(grid.dx(), grid.dim));
}

void WaveFunction::validate() const {
  grid.validate();
  if (static_cast<std::size_t>(samples.size()) != grid.size())
    throw std::invalid_argument("WaveFunction: sample count does not match grid");
  if (!samples.allFinite())
    throw std::invalid_argument("WaveFunction: non-finite samples");
}

cplx inner_product(const WaveFunction& bra, const WaveFunction& ket) {
  if (!(bra.grid == ket.grid))
    throw std::invalid_argument("inner_product: grid mismatch");
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < bra.samples.size(); ++i)
    s += std::conj(bra.samples(i)) * ket.samples(i);
  return s * std::pow(bra.grid.dx(), bra.grid.dim);
}

WaveFunction parity_apply(const WaveFunction& psi) {
  const int N = psi.grid.points_per_axis;
  WaveFunction out{psi.grid, VectorXcd(psi.samples.size())};
  if (psi.grid.dim == 1) {
    for (int k = 0; k < N; ++k) out.samples(k) = psi.samples(N - 1 - k);
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        out.samples(i * N + j) = psi.samples((N - 1 - i) * N + (N - 1 - j));
  }
  return out;
}

namespace {

// hbar-scaled transform along one axis, midpoint lattices on both sides:
//   out(xi_k) = (dx / sqrt(2 pi hbar)) sum_j in(x_j) e^{-i x_j xi_k / hbar}
// with x_j = (j + s) dx and xi_k = (k + s) dxi, s = (1-N)/2,
// dx dxi = 2 pi hbar / N. Twiddle factors absorb the offset s.
void axis_transform(cplx* data, int N, bool forward, double scale) {
  const double s = 0.5 * (1.0 - N);
  const double w = 2.0 * kPi / N;
  const double sgn = forward ? -1.0 : 1.0;
  for (int j = 0; j < N; ++j)
    data[j] *= std::polar(1.0, sgn * w * j * s);
  fft_inplace(data, N, forward);
  for (int k = 0; k < N; ++k)
    data[k] *= scale * std::polar(1.0, sgn * w * s * (k + s));
}

}  // namespace

WaveFunction fourier_transform(const WaveFunction& psi, FourierDirection dir) {
  const GridSpec& g = psi.grid;
  const int N = g.points_per_axis;
  const bool fwd = (dir == FourierDirection::Forward);
  // integrate over the input lattice; the result lives on the conjugate grid
  const double scale = g.dx() / std::sqrt(2.0 * kPi * g.hbar);

  WaveFunction out{g.conjugate_grid(), psi.samples};
  if (g.dim == 1) {
    axis_transform(out.samples.data(), N, fwd, scale);
    return out;
  }
  std::vector<cplx> buf(N);
  // axis 0 (stride N)
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) buf[i] = out.samples(i * N + j);
    axis_transform(buf.data(), N, fwd, scale);
    for (int i = 0; i < N; ++i) out.samples(i * N + j) = buf[i];
  }
  // axis 1 (contiguous)
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) buf[j] = out.samples(i * N + j);
    axis_transform(buf.data(), N, fwd, scale);
    for (int j = 0; j < N; ++j) out.samples(i * N + j) = buf[j];
  }
  return out;
}

WaveFunction operator_apply(const OperatorMatrix& M, const WaveFunction& psi) {
  if (!(M.grid == psi.grid))
    throw std::invalid_argument("operator_apply: grid mismatch");
  WaveFunction out{psi.grid,
                   (M.m * psi.samples) * std::pow(psi.grid.dx(), psi.grid.dim)};
  return out;
}

OperatorMatrix operator_compose(const OperatorMatrix& M1, const OperatorMatrix& M2) {
  if (!(M1.grid == M2.grid))
    throw std::invalid_argument("operator_compose: grid mismatch");
  return OperatorMatrix{M1.grid,
                        (M1.m * M2.m) * std::pow(M1.grid.dx(), M1.grid.dim)};
}

OperatorMatrix identity_operator(const GridSpec& grid) {
  const double w = std::pow(grid.dx(), -grid.dim);
  return OperatorMatrix{grid, MatrixXcd::Identity(grid.size(), grid.size()) * w};
}

OperatorMatrix position_operator(const GridSpec& grid, int axis) {
  const int N = grid.points_per_axis;
  const double w = std::pow(grid.dx(), -grid.dim);
  MatrixXcd m = MatrixXcd::Zero(grid.size(), grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const int idx = (grid.dim == 1) ? static_cast<int>(k)
                    : (axis == 0 ? static_cast<int>(k) / N
                                 : static_cast<int>(k) % N);
    m(k, k) = grid.node(idx) * w;
  }
  return OperatorMatrix{grid, std::move(m)};
}

OperatorMatrix momentum_operator(const GridSpec& grid, int axis) {
  if (grid.dim != 1)
    throw std::invalid_argument("momentum_operator: dim 1 only");
  (void)axis;
  const OperatorMatrix F = fourier_operator(grid, FourierDirection::Forward);
  const OperatorMatrix Fi = fourier_operator(grid, FourierDirection::Inverse);
  MatrixXcd mid = F.m;
  for (int k = 0; k < grid.points_per_axis; ++k)
    mid.row(k) *= grid.freq_node(k);  // multiplication by xi on the xi-lattice
  return OperatorMatrix{grid, (Fi.m * mid) * grid.dx()};
}

OperatorMatrix fourier_operator(const GridSpec& grid, FourierDirection dir) {
  if (grid.dim != 1)
    throw std::invalid_argument("fourier_operator: dim 1 only");
  const int N = grid.points_per_axis;
  const double hbar = grid.hbar;
  MatrixXcd m(N, N);
  const double pref = 1.0 / std::sqrt(2.0 * kPi * hbar);
  if (dir == FourierDirection::Forward) {
    // rows on the xi-lattice, columns on the x-lattice; operator_apply's dx
    // weight is the forward quadrature weight
    for (int k = 0; k < N; ++k)
      for (int j = 0; j < N; ++j)
        m(k, j) = pref * std::polar(1.0, -grid.node(j) * grid.freq_node(k) / hbar);
  } else {
    // inverse integrates over xi (weight dxi); fold dxi/dx into the entries so
    // the uniform dx weight of operator_apply still applies
    const double row_scale = grid.dxi() / grid.dx();
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        m(j, k) = pref * row_scale *
                  std::polar(1.0, grid.node(j) * grid.freq_node(k) / hbar);
  }
  return OperatorMatrix{grid, std::move(m)};
}

MatrixXcd interior_truncate(const GridSpec& grid, const MatrixXcd& m,
                            double margin) {
  if (margin < 0.0) margin = 4.0 * std::sqrt(grid.hbar);
  const double cut = grid.half_width - margin;
  const int N = grid.points_per_axis;
  MatrixXcd out = m;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    bool outside = false;
    if (grid.dim == 1) {
      outside = std::abs(grid.node(static_cast<int>(k))) > cut;
    } else {
      const int i = static_cast<int>(k) / N, j = static_cast<int>(k) % N;
      outside = std::abs(grid.node(i)) > cut || std::abs(grid.node(j)) > cut;
    }
    if (outside) {
      out.row(k).setZero();
      out.col(k).setZero();
    }
  }
  return out;
}

double interior_rel_error(const GridSpec& grid, const MatrixXcd& got,
                          const MatrixXcd& want, double margin) {
  const MatrixXcd a = interior_truncate(grid, got, margin);
  const MatrixXcd b = interior_truncate(grid, want, margin);
  const double scale = b.norm();
  if (scale == 0.0) return a.norm();
  return (a - b).norm() / scale;
}

void write_wavefunction_csv(const WaveFunction& psi, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  const int N = psi.grid.points_per_axis;
  char line[160];
  if (psi.grid.dim == 1) {
    f << "x,re,im\n";
    for (int k = 0; k < N; ++k) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", psi.grid.node(k),
                    psi.samples(k).real(), psi.samples(k).imag());
      f << line;
    }
  } else {
    f << "x,y,re,im\n";
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const cplx v = psi.samples(i * N + j);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n",
                      psi.grid.node(i), psi.grid.node(j), v.real(), v.imag());
        f << line;
      }
  }
}

WaveFunction read_wavefunction_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(f, header);
  const int cols = header == "x,re,im" ? 3 : header == "x,y,re,im" ? 4 : 0;
  if (cols == 0) throw std::runtime_error("unrecognized wavefunction csv header");
  std::vector<double> xs;
  std::vector<cplx> vals;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    double a, b, c, d;
    if (cols == 3) {
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
        throw std::runtime_error("bad csv line: " + line);
      xs.push_back(a);
      vals.emplace_back(b, c);
    } else {
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &c, &d) != 4)
        throw std::runtime_error("bad csv line: " + line);
      vals.emplace_back(c, d);
    }
  }
  const std::size_t count = vals.size();
  GridSpec g;
  if (cols == 3) {
    g.dim = 1;
    g.points_per_axis = static_cast<int>(count);
    // midpoint grid: x_0 = -L + dx/2, dx from consecutive nodes
    const double dx = xs.at(1) - xs.at(0);
    g.half_width = -(xs.at(0) - 0.5 * dx);
    g.hbar = 0.5;  // hbar is not stored in the csv; callers override
  } else {
    g.dim = 2;
    g.points_per_axis = static_cast<int>(std::lround(std::sqrt(double(count))));
    g.half_width = 0.0;
    g.hbar = 1.0;
  }
  WaveFunction psi{g, VectorXcd(count)};
  for (std::size_t i = 0; i < count; ++i) psi.samples(i) = vals[i];
  return psi;
}

void write_operator_binary(const OperatorMatrix& op, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write("MKOP", 4);
  const uint32_t n = static_cast<uint32_t>(op.grid.dim);
  const uint32_t N = static_cast<uint32_t>(op.grid.points_per_axis);
  const double L = op.grid.half_width, hbar = op.grid.hbar;
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(&N), 4);
  f.write(reinterpret_cast<const char*>(&L), 8);
  f.write(reinterpret_cast<const char*>(&hbar), 8);
  const Eigen::Index dimsz = op.m.rows();
  for (Eigen::Index i = 0; i < dimsz; ++i)
    for (Eigen::Index j = 0; j < dimsz; ++j) {
      const double re = op.m(i, j).real(), im = op.m(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), 8);
      f.write(reinterpret_cast<const char*>(&im), 8);
    }
}

OperatorMatrix read_operator_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (std::memcmp(magic, "MKOP", 4) != 0)
    throw std::runtime_error("bad magic in " + path);
  uint32_t n = 0, N = 0;
  double L = 0, hbar = 0;
  f.read(reinterpret_cast<char*>(&n), 4);
  f.read(reinterpret_cast<char*>(&N), 4);
  f.read(reinterpret_cast<char*>(&L), 8);
  f.read(reinterpret_cast<char*>(&hbar), 8);
  GridSpec g{static_cast<int>(n), L, static_cast<int>(N), hbar};
  g.validate();
  const std::size_t dimsz = g.size();
  OperatorMatrix op{g, MatrixXcd(dimsz, dimsz)};
  for (std::size_t i = 0; i < dimsz; ++i)
    for (std::size_t j = 0; j < dimsz; ++j) {
      double re, im;
      f.read(reinterpret_cast<char*>(&re), 8);
      f.read(reinterpret_cast<char*>(&im), 8);
      op.m(i, j) = cplx(re, im);
    }
  if (!f) throw std::runtime_error("truncated operator file " + path);
  return op;
}

}  // namespace mkop
