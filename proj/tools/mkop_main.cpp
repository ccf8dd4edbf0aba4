// Command-line surface: verification suites, worked-table reproduction,
// propagation runs, quantization, Wigner dumps, audits, flow checks.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "mkop/quantize.hpp"
#include "mkop/suites.hpp"
#include "mkop/table.hpp"

#ifdef EIGEN_USE_BLAS
extern "C" void openblas_set_num_threads(int);
#endif

namespace {

using namespace mkop;

struct GridFlags {
  int dim = 1;
  int N = 0;
  double L = 0.0;
  double hbar = 0.0;

  GridSpec resolve() const {
    GridSpec g = (dim == 2) ? GridSpec::default_2d() : GridSpec::default_1d();
    if (N > 0) g.points_per_axis = N;
    if (L > 0) g.half_width = L;
    if (hbar > 0) g.hbar = hbar;
    g.validate();
    return g;
  }
};

void add_grid_flags(CLI::App* cmd, GridFlags& gf) {
  cmd->add_option("--n", gf.dim, "spatial dimension (1 or 2)");
  cmd->add_option("--grid-N", gf.N, "points per axis (power of two)");
  cmd->add_option("--grid-L", gf.L, "grid half-width");
  cmd->add_option("--hbar", gf.hbar, "Planck scale");
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  f >> j;
  return j;
}

void emit(const RunReport& rep, bool as_json, const std::string& out) {
  if (as_json) {
    const std::string payload = rep.to_json().dump(2) + "\n";
    if (out.empty()) {
      std::cout << payload;
    } else {
      std::ofstream f(out);
      f << payload;
    }
  } else {
    rep.print_text(std::cout);
  }
}

cplx parse_complex(const std::string& s) {
  double re = 0, im = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf", &re, &im) != 2)
    throw std::runtime_error("expected complex as 're,im': " + s);
  return cplx(re, im);
}

int cmd_verify(const std::string& suite, bool as_json, const std::string& out) {
  const RunReport rep = run_suite(suite);
  emit(rep, as_json, out);
  return rep.all_passed() ? 0 : 1;
}

int cmd_table(const std::string& name, double t, double hbar, bool as_json,
              const std::string& out) {
  const auto rows = reproduce_table(name, t, hbar);
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& c : r.cells)
        cells.push_back({{"column", c.column},
                         {"computed", c.computed},
                         {"printed", c.printed},
                         {"match", c.match}});
      j.push_back({{"row", r.row}, {"cells", cells}});
    }
    std::cout << j.dump(2) << "\n";
  } else {
    const std::string md = table_markdown(rows);
    if (out.empty()) {
      std::cout << md;
    } else {
      std::ofstream f(out);
      f << md;
    }
  }
  return 0;
}

int cmd_propagate(const std::string& s_file, const std::string& alpha_str,
                  double q, double p, const GridFlags& gf,
                  const std::string& out_prefix) {
  const GridSpec grid = gf.resolve();
  const ComplexSymplectic S = ComplexSymplectic::from_json(load_json(s_file));
  const CoherentLabel label{PhasePoint::of(q, p),
                            WidthParameter(parse_complex(alpha_str))};

  const MetaplecticKernel kernel = kernel_build(S, grid);
  const WaveFunction out = kernel.apply(coherent_state(label, grid));
  write_wavefunction_csv(out, out_prefix + "_state.csv");

  const GaussianFit fit = gaussian_fit(out);
  nlohmann::json j;
  j["chart"] = kernel.chart;
  j["fitted"] = {{"beta", complex_to_json(fit.beta.scalar())},
                 {"q", fit.z.q(0)},
                 {"p", fit.z.p(0)},
                 {"lambda", complex_to_json(fit.lambda)},
                 {"residual", fit.residual}};
  try {
    const auto pred = closed_form_propagate(S, label, grid.hbar);
    j["printed_prediction"] = {
        {"beta", complex_to_json(pred.label.alpha.scalar())},
        {"q", pred.label.z.q(0)},
        {"p", pred.label.z.p(0)},
        {"scalar", complex_to_json(pred.scalar)}};
    j["fitted_over_predicted_scalar"] =
        complex_to_json(fit.lambda / pred.scalar);
  } catch (const std::exception& e) {
    j["printed_prediction"] = e.what();
  }
  // which convention family the fitted labels land on
  const auto audit = convention_audit(
      {{"propagate", S, label.alpha, {label.z}}}, grid);
  j["best_family"] = audit.cases.at(0).best_family;
  std::ofstream f(out_prefix + "_fit.json");
  f << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_quantize(const std::string& symbol_file, const std::string& alpha_str,
                 double radius, const GridFlags& gf, const std::string& out) {
  const GridSpec grid = gf.resolve();
  const SymbolField h = SymbolField::from_json(load_json(symbol_file));
  const WidthParameter alpha(parse_complex(alpha_str));
  const OperatorMatrix H = toeplitz_quantize(h, alpha, grid, radius);
  write_operator_binary(H, out);
  // identity sanity expectations, printed for the record
  for (double w : {0.0, 1.0}) {
    const auto psi = coherent_state(CoherentLabel{PhasePoint::of(w, 0), alpha},
                                    grid);
    const cplx e = inner_product(psi, operator_apply(H, psi));
    std::cout << "<psi_(" << w << ",0)| H psi> = " << e.real() << (e.imag() < 0 ? " - " : " + ")
              << std::abs(e.imag()) << "i\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_wigner(const std::string& op_file, const std::string& out) {
  const OperatorMatrix H = read_operator_binary(op_file);
  const SymbolField sigma = wigner_numeric(H);
  sigma.write_csv(out);
  std::cout << "trace via symbol: " << symbol_trace(sigma).real() << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int cmd_audit(const GridFlags& gf, bool as_json, const std::string& out) {
  GridFlags flags = gf;
  if (flags.N == 0) flags.N = 1024;
  const GridSpec grid = flags.resolve();
  ConventionReport rep = convention_audit(standard_audit_cases(), grid);
  const GridSpec small{1, 12.0, 256, grid.hbar};
  for (const auto& S : {case_rotation(0.9), case_shear(0.8)})
    for (const auto& row : meta_relation_audit(S, small))
      rep.meta_rows.push_back(row);
  double best = 1e300;
  for (const auto& row : rep.meta_rows)
    if (row.residual < best) {
      best = row.residual;
      rep.meta_arrangement = row.arrangement;
    }
  if (as_json) {
    const std::string payload = rep.to_json().dump(2) + "\n";
    if (out.empty())
      std::cout << payload;
    else
      std::ofstream(out) << payload;
  } else {
    std::cout << "winning family: " << rep.winning_family
              << (rep.unique_winner ? " (unique)" : " (NOT unique)") << "\n";
    for (const auto& c : rep.cases)
      std::cout << "  " << c.name << ": fit residual " << c.fit_residual
                << ", best family " << c.best_family << "\n";
    std::cout << "Heisenberg arrangement: " << rep.meta_arrangement
              << " (residual " << best << ")\n";
  }
  return 0;
}

int cmd_flow(const std::string& s_file, const std::string& s2_file,
             bool as_json) {
  const ComplexSymplectic S = ComplexSymplectic::from_json(load_json(s_file));
  const ComplexSymplectic S2 = ComplexSymplectic::from_json(load_json(s2_file));
  std::vector<ExtendedPoint> samples{
      {PhasePoint::of(1, 1), WidthParameter(cplx(0, 1))},
      {PhasePoint::of(-0.5, 0.8), WidthParameter(cplx(0.2, 1.3))},
      {PhasePoint::of(2, -1), WidthParameter(cplx(0, 0.7))}};
  const auto rep = flow_composition_audit(S, S2, samples);
  if (as_json) {
    std::cout << rep.to_json().dump(2) << "\n";
  } else {
    for (size_t c = 0; c < rep.conventions.size(); ++c) {
      double worst = 0.0;
      for (const auto& row : rep.rows) worst = std::max(worst, row.residual[c]);
      std::cout << rep.conventions[c] << ": worst residual " << worst << "\n";
    }
    std::cout << (rep.matching.empty() ? "no convention matches"
                                       : "matching: " + rep.matching.front())
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherent-state, metaplectic-kernel and Toeplitz workbench"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "worker thread cap");

  std::string suite = "all", out, table_name = "annb1", s_file, s2_file,
              symbol_file, op_file, alpha_str = "0,1", out_prefix = "run";
  double t = 0.25, hbar = 0.5, qv = 0.0, pv = 0.0, radius = 8.0;
  bool as_json = false;
  GridFlags gf;

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", suite, "core|metaplectic|weyl|offdiag|ndim|all");
  verify->add_flag("--json", as_json, "emit JSON");
  verify->add_option("--out", out, "write the report to a file");

  auto* table = app.add_subcommand("table", "reproduce a worked-example table");
  table->add_option("--name", table_name, "annb1|annb2")->required();
  table->add_option("--t", t, "row parameter");
  table->add_option("--hbar", hbar, "Planck scale");
  table->add_flag("--json", as_json, "emit JSON");
  table->add_option("--out", out, "write markdown to a file");

  auto* prop = app.add_subcommand("propagate", "apply a kernel to a coherent state");
  prop->add_option("--s-file", s_file, "matrix JSON")->required();
  prop->add_option("--alpha", alpha_str, "width as re,im");
  prop->add_option("--q", qv, "center q");
  prop->add_option("--p", pv, "center p");
  prop->add_option("--out-prefix", out_prefix, "output file prefix");
  add_grid_flags(prop, gf);

  auto* quant = app.add_subcommand("quantize", "Toeplitz-quantize a symbol");
  quant->add_option("--symbol-file", symbol_file, "polynomial symbol JSON")
      ->required();
  quant->add_option("--alpha", alpha_str, "width as re,im");
  quant->add_option("--radius", radius, "phase-space disc radius");
  quant->add_option("--out", out, "operator output file")->required();
  add_grid_flags(quant, gf);

  auto* wig = app.add_subcommand("wigner", "Weyl symbol of a stored operator");
  wig->add_option("--operator-file", op_file, "MKOP binary")->required();
  wig->add_option("--out", out, "symbol CSV output")->required();

  auto* audit = app.add_subcommand("audit", "convention audit report");
  audit->add_flag("--json", as_json, "emit JSON");
  audit->add_option("--out", out, "write the report to a file");
  add_grid_flags(audit, gf);

  auto* flow = app.add_subcommand("flow", "extended phase-space flow audit");
  flow->add_option("--s-file", s_file, "matrix JSON")->required();
  flow->add_option("--s2-file", s2_file, "second matrix JSON")->required();
  flow->add_flag("--json", as_json, "emit JSON");

  CLI11_PARSE(app, argc, argv);

#ifdef EIGEN_USE_BLAS
  openblas_set_num_threads(threads);
#endif
  Eigen::setNbThreads(threads);

  try {
    if (verify->parsed()) return cmd_verify(suite, as_json, out);
    if (table->parsed()) return cmd_table(table_name, t, hbar, as_json, out);
    if (prop->parsed())
      return cmd_propagate(s_file, alpha_str, qv, pv, gf, out_prefix);
    if (quant->parsed())
      return cmd_quantize(symbol_file, alpha_str, radius, gf, out);
    if (wig->parsed()) return cmd_wigner(op_file, out);
    if (audit->parsed()) return cmd_audit(gf, as_json, out);
    if (flow->parsed()) return cmd_flow(s_file, s2_file, as_json);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
