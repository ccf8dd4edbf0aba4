#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkop/metaplectic.hpp"
#include "mkop/symbols.hpp"

namespace mkop {

/// Midpoint square mesh covering the disc |z| <= R with steps <= max_step.
struct PhaseSpaceMesh {
  std::vector<Vector2d> nodes;
  double cell = 0.0;

  static PhaseSpaceMesh disc(double R, double max_step);
};

/// H = sum_k h(z_k) |psi^alpha_{z_k}><psi^alpha_{z_k}| cell/(2 pi hbar) over
/// the disc |z| <= R, mesh steps <= sqrt(hbar)/4.
OperatorMatrix toeplitz_quantize(const SymbolField& h, const WidthParameter& alpha,
                                 const GridSpec& grid, double R);

/// The finite data of an off-diagonal symbol: a phase-space weight, the real
/// linear ket/bra center correspondence, the two width charts, and the parity
/// marker of the det -1 extension.
struct OffDiagSymbol {
  SymbolField h;
  TransportMatrix map;
  WidthParameter alpha_in;
  WidthParameter alpha_out;
  bool sign_flip = false;
  nlohmann::json provenance;

  nlohmann::json to_json() const;
};

struct VanishingOverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// sum_k h((-1)^flip z_k) |psi^out_{T z_k}><psi^in_{z_k}| / ov_k cell/(2 pi hbar)
/// with ov_k the overlap that makes each normalized dyad idempotent (parity
/// inserted on the bra side when sign_flip is set).
OperatorMatrix offdiag_quantize(const OffDiagSymbol& sym, const GridSpec& grid,
                                double R);

/// Ground truth U(S)^{-1} H U(S) assembled from kernel matrices. Pure shears
/// go through the Fourier-side sandwich with the intermediate band-limited,
/// so the growing direction stays meaningful in doubles.
OperatorMatrix conjugate_oracle(const OperatorMatrix& H, const ComplexSymplectic& S);

struct OffDiagRepresentation {
  OffDiagSymbol symbol;
  OperatorMatrix op;
  double residual = 0.0;     // interior relative Frobenius vs the oracle
  std::string variant;       // winning convention/jacobian combination
};

struct RepresentationMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Off-diagonal Toeplitz representation of U(S)^{-1} T_alpha[h] U(S):
/// reparametrize alpha -> Sbar.alpha, transport the symbol, quantize with the
/// mixed chart (S^{-1}Sbar widths/centers). Both audited and printed
/// transport semantics and both Jacobian modes are tried; the variant closest
/// to conjugate_oracle wins.
OffDiagRepresentation offdiag_representation(const SymbolField& h, const WidthParameter& alpha,
                              const ComplexSymplectic& S, const GridSpec& grid,
                              double R);

/// D_alpha(z) = <psi^{S^-1 Sbar.alpha}_{T z} | psi^alpha_z>^{-1} with the
/// printed transport semantics (the section-3 table object).
cplx normalization_D(const ComplexSymplectic& S, const WidthParameter& alpha,
                     const PhasePoint& z, double hbar);

/// The composition operator for det +-1: det +1 is offdiag_representation; det -1
/// carries the parity-twisted normalization and the symbol argument flip.
OperatorMatrix noncanonical_compose(const SymbolField& h,
                                    const WidthParameter& alpha,
                                    const ComplexSymplectic& S,
                                    const GridSpec& grid, double R);

/// The det -1 off-diagonal symbol data without quantizing (printed transport
/// semantics; validated by the worked det -1 example).
OffDiagSymbol noncanonical_symbol(const SymbolField& h, const WidthParameter& alpha,
                                  const ComplexSymplectic& S);

/// Apply the composition operator of S2 to an existing off-diagonal symbol
/// (the substitution rule: advance the ket chain by S2's data, transform the
/// accumulated weight by S2's symbol-side map and parity flip). Leading order
/// in hbar.
OffDiagSymbol noncanonical_compose_symbol(const OffDiagSymbol& s,
                                          const ComplexSymplectic& S2);

/// Frobenius distance of two operators compressed to the coherent frame of
/// the phase-space window |z| <= window_R (the natural interior truncation
/// for disc-quantized operators: the sharp disc edge leaves slowly decaying
/// position-space ringing that coherent compression suppresses).
double phase_space_rel_error(const OperatorMatrix& A, const OperatorMatrix& B,
                             const WidthParameter& alpha, double window_R);

/// Groupoid composition at leading order: the symbol of Op(s1) Op(s2) given
/// s1.alpha_in == s2.alpha_out; h = s2.h . (s1.h o s2.map), map = s1.map o
/// s2.map.
OffDiagSymbol offdiag_symbol_compose(const OffDiagSymbol& s1,
                                     const OffDiagSymbol& s2);

}  // namespace mkop
