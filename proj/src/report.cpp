#include "theta/report.hpp"

#include <cmath>

namespace theta {

MatchReport compare(std::string identity, nlohmann::json params, Complex lhs, Complex rhs, double tol) {
  MatchReport r;
  r.identity = std::move(identity);
  r.params = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  r.rel_err = scale > 0.0 ? r.abs_err / scale : 0.0;
  r.ratio = std::abs(rhs) > 0.0 ? lhs / rhs : Complex(0.0, 0.0);
  r.pass = r.abs_err <= tol * std::max(1.0, scale);
  return r;
}

namespace {

nlohmann::json cjson(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

nlohmann::json to_json(const MatchReport& r) {
  nlohmann::json j;
  j["identity"] = r.identity;
  j["params"] = r.params;
  j["lhs"] = cjson(r.lhs);
  j["rhs"] = cjson(r.rhs);
  j["abs_err"] = r.abs_err;
  j["rel_err"] = r.rel_err;
  j["ratio"] = cjson(r.ratio);
  j["moduli"] = r.moduli;
  j["pass"] = r.pass;
  if (!r.blocking) j["blocking"] = false;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

std::size_t SuiteResult::passed() const {
  std::size_t n = 0;
  for (const auto& r : reports) n += r.pass ? 1 : 0;
  return n;
}

std::size_t SuiteResult::failed() const {
  std::size_t n = 0;
  for (const auto& r : reports) n += (!r.pass && r.blocking) ? 1 : 0;
  return n;
}

nlohmann::json to_json(const SuiteResult& s) {
  nlohmann::json j;
  j["suite"] = s.suite;
  j["version"] = s.version;
  j["config"] = s.config;
  j["summary"] = {{"total", s.reports.size()}, {"passed", s.passed()}, {"failed", s.failed()}};
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : s.reports) arr.push_back(to_json(r));
  j["reports"] = arr;
  return j;
}

bool all_pass(const std::vector<MatchReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass && r.blocking) return false;
  return true;
}

}  // namespace theta
