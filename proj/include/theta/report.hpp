#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "theta/padic.hpp"

namespace theta {

struct MatchReport {
  std::string identity;
  nlohmann::json params = nlohmann::json::object();
  Complex lhs{0.0, 0.0};
  Complex rhs{0.0, 0.0};
  double abs_err = 0.0;
  double rel_err = 0.0;
  Complex ratio{0.0, 0.0};
  nlohmann::json moduli = nlohmann::json::object();
  bool pass = false;
  bool blocking = true;  // a failing non-blocking report is recorded but does not fail the suite
  std::string note;
};

/// Fills the error fields; passes when abs_err <= tol * max(1, |lhs|, |rhs|).
MatchReport compare(std::string identity, nlohmann::json params, Complex lhs, Complex rhs, double tol);

nlohmann::json to_json(const MatchReport& r);

struct SuiteResult {
  std::string suite;
  std::vector<MatchReport> reports;
  nlohmann::json config = nlohmann::json::object();
  std::string version;

  std::size_t passed() const;
  std::size_t failed() const;  // blocking failures only
  bool ok() const { return failed() == 0; }
};

nlohmann::json to_json(const SuiteResult& s);

bool all_pass(const std::vector<MatchReport>& reports);

}  // namespace theta
