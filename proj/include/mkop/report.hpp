#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace mkop {

struct CheckRecord {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool informational = false;  // audits report, they do not gate
  bool passed = true;
  std::string note;
  double seconds = 0.0;

  static CheckRecord gate(std::string name, double residual, double tolerance,
                          std::string note = "");
  static CheckRecord info(std::string name, double residual, std::string note = "");
};

struct RunReport {
  std::string command;
  nlohmann::json environment;
  std::vector<CheckRecord> records;
  double duration_seconds = 0.0;

  bool all_passed() const;
  nlohmann::json to_json() const;
  void print_text(std::ostream& os) const;
};

}  // namespace mkop
