#pragma once

#include <string>
#include <vector>

#include "mkop/report.hpp"

namespace mkop {

/// Run the numbered acceptance checks (1..15); empty = all.
RunReport run_acceptance_criteria(std::vector<int> which = {});

/// Named groups for the verify command: core, metaplectic, weyl, offdiag,
/// ndim, all.
RunReport run_suite(const std::string& suite);

std::vector<std::string> suite_names();

}  // namespace mkop
