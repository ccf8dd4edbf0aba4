#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mkop/symplectic.hpp"
#include "mkop/types.hpp"

namespace mkop {

/// Uniform midpoint grid on [-L, L]^dim: x_k = -L + (k + 1/2) 2L/N. Symmetric
/// about 0 so parity is an exact sample permutation; no node at the boundary.
struct GridSpec {
  int dim = 1;
  double half_width = 20.0;
  int points_per_axis = 2048;
  double hbar = 0.5;

  static GridSpec default_1d() { return GridSpec{1, 20.0, 2048, 0.5}; }
  static GridSpec default_2d() { return GridSpec{2, 8.0, 64, 1.0}; }

  void validate() const;
  std::size_t size() const;
  double dx() const { return 2.0 * half_width / points_per_axis; }
  /// Spacing of the hbar-scaled frequency lattice, 2 pi hbar / (2L).
  double dxi() const { return kPi * hbar / half_width; }
  double node(int k) const {
    return -half_width + (k + 0.5) * dx();
  }
  /// Frequency nodes are midpoint-placed as well, so the transform of a grid
  /// function lives on conjugate_grid() and parity stays an exact permutation.
  double freq_node(int k) const {
    return (k + 0.5 - 0.5 * points_per_axis) * dxi();
  }
  /// Grid whose spatial lattice is this grid's frequency lattice; an
  /// involution.
  GridSpec conjugate_grid() const {
    return GridSpec{dim, 0.5 * points_per_axis * dxi(), points_per_axis, hbar};
  }
  VectorXd nodes() const;
  VectorXd freq_nodes() const;

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && half_width == o.half_width &&
           points_per_axis == o.points_per_axis && hbar == o.hbar;
  }
};

/// Complex samples on a GridSpec, row-major over axes for dim = 2
/// (index = ix * N + iy).
struct WaveFunction {
  GridSpec grid;
  VectorXcd samples;

  double norm() const;
  void validate() const;
};

/// Dense kernel-value matrix: entries are K(x_i, x_j); operator_apply supplies
/// the quadrature weight dx^dim.
struct OperatorMatrix {
  GridSpec grid;
  MatrixXcd m;
};

enum class FourierDirection { Forward, Inverse };

cplx inner_product(const WaveFunction& bra, const WaveFunction& ket);
WaveFunction parity_apply(const WaveFunction& psi);
WaveFunction fourier_transform(const WaveFunction& psi, FourierDirection dir);
WaveFunction operator_apply(const OperatorMatrix& M, const WaveFunction& psi);

/// Matrix of the operator composition M1 M2 (kernel values; one quadrature
/// weight per composition).
OperatorMatrix operator_compose(const OperatorMatrix& M1, const OperatorMatrix& M2);
OperatorMatrix identity_operator(const GridSpec& grid);
OperatorMatrix position_operator(const GridSpec& grid, int axis = 0);
OperatorMatrix momentum_operator(const GridSpec& grid, int axis = 0);
/// Dense matrix of the hbar-scaled Fourier transform on the grid (dim = 1).
OperatorMatrix fourier_operator(const GridSpec& grid, FourierDirection dir);

/// Zero all rows/columns whose grid node has |x| > L - margin (defaults to
/// the 4 sqrt(hbar) band used for interior-truncated operator comparisons).
MatrixXcd interior_truncate(const GridSpec& grid, const MatrixXcd& m,
                            double margin = -1.0);
double interior_rel_error(const GridSpec& grid, const MatrixXcd& got,
                          const MatrixXcd& want, double margin = -1.0);

struct GaussianFit {
  WidthParameter beta;
  PhasePoint z;
  cplx lambda;
  double residual = 0.0;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fit psi to lambda psi^beta_z. Log-space linear regression on the region
/// |psi| > 1e-6 max|psi| (a log of a Gaussian is a quadratic), then one
/// Gauss-Newton polish; residual is ||psi - model|| / ||psi||.
GaussianFit gaussian_fit(const WaveFunction& psi);

void write_wavefunction_csv(const WaveFunction& psi, const std::string& path);
WaveFunction read_wavefunction_csv(const std::string& path);
void write_operator_binary(const OperatorMatrix& op, const std::string& path);
OperatorMatrix read_operator_binary(const std::string& path);

}  // namespace mkop
