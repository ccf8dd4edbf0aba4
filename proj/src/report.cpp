#include "mkop/report.hpp"

#include <cstdio>

namespace mkop {

CheckRecord CheckRecord::gate(std::string name, double residual, double tolerance,
                              std::string note) {
  CheckRecord r;
  r.name = std::move(name);
  r.residual = residual;
  r.tolerance = tolerance;
  r.passed = residual <= tolerance;
  r.note = std::move(note);
  return r;
}

CheckRecord CheckRecord::info(std::string name, double residual, std::string note) {
  CheckRecord r;
  r.name = std::move(name);
  r.residual = residual;
  r.informational = true;
  r.note = std::move(note);
  return r;
}

bool RunReport::all_passed() const {
  for (const auto& r : records)
    if (!r.informational && !r.passed) return false;
  return true;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json c{{"name", r.name},
                     {"residual", r.residual},
                     {"status", r.informational ? "informational"
                                : r.passed     ? "pass"
                                               : "fail"}};
    if (!r.informational) c["tolerance"] = r.tolerance;
    if (!r.note.empty()) c["note"] = r.note;
    checks.push_back(c);
  }
  return {{"command", command},
          {"environment", environment},
          {"checks", checks},
          {"duration_seconds", duration_seconds},
          {"all_passed", all_passed()}};
}

void RunReport::print_text(std::ostream& os) const {
  char line[512];
  for (const auto& r : records) {
    const char* status = r.informational ? "INFO" : r.passed ? "PASS" : "FAIL";
    if (r.informational)
      std::snprintf(line, sizeof line, "[%s] %-58s residual=%.3e%s%s\n", status,
                    r.name.c_str(), r.residual, r.note.empty() ? "" : "  ",
                    r.note.c_str());
    else
      std::snprintf(line, sizeof line,
                    "[%s] %-58s residual=%.3e tol=%.1e (%.1fs)%s%s\n", status,
                    r.name.c_str(), r.residual, r.tolerance, r.seconds,
                    r.note.empty() ? "" : "  ", r.note.c_str());
    os << line;
  }
  os << (all_passed() ? "all checks passed" : "FAILURES present") << " ("
     << duration_seconds << " s total)\n";
}

}  // namespace mkop
