#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mkop/symplectic.hpp"

namespace mkop {

/// One column comparison: the value computed from S against the reference
/// table's printed formula evaluated at the same t.
struct TableCell {
  std::string column;
  std::string computed;
  std::string printed;
  bool match = false;
};

struct TableRowReport {
  std::string row;
  std::vector<TableCell> cells;
  bool all_match() const;
};

/// Reproduce the worked-example tables ("annb1": five canonical rows,
/// "annb2": the two det -1 rows) at parameter t: columns S^{-1}Sbar,
/// S^{-1}Sbar . i, both transports at alpha = i, and |D_i(1,1)| where the
/// source prints one. Every printed value appears next to the computed one
/// with a MATCH/MISMATCH flag; nothing is adopted silently.
std::vector<TableRowReport> reproduce_table(const std::string& name, double t,
                                            double hbar);

std::string table_markdown(const std::vector<TableRowReport>& rows);

}  // namespace mkop
