#pragma once

// Command line front end: hilbert, transform and verify.

#include <string>
#include <vector>

#include <json.hpp>

#include "theta/report.hpp"
#include "theta/theta_match.hpp"

namespace theta::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  long p = 3;
  int precision = 12;
  Rational a = 1;
  Rational b = 1;
  Rational kappa = 1;
  Rational epsilon = 1;
  long d = 0;
  long M = 1;          // level of the test functions
  long N = 1;
  long n_gauss = 8;
  long window = 6;     // largest v(r) tried before giving up on phi0
  long fl_bound = 4;
  match::Tolerances tolerances;
  std::uint64_t seed = 1;
  int battery = 10;

  nlohmann::json to_json() const;
};

/// Missing keys keep their defaults; THETA_PRECISION overrides precision.
RunConfig load_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

/// Suites: fl, borel, bigcell, equivariance, parity, gauss, square_class, weil, all.
SuiteResult run_suite(const RunConfig& cfg, const std::string& suite);

nlohmann::json hilbert_table(const Rational& a, const Rational& b, const std::vector<std::string>& places);
nlohmann::json transform(const RunConfig& cfg, const schwartz::SchwartzFn& phi);

int run(int argc, char** argv);

}  // namespace theta::cli
