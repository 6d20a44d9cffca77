#include "theta/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

namespace theta::cli {

using schwartz::Letter;
using schwartz::MetaplecticWord;

namespace {

Rational rational_field(const nlohmann::json& j) {
  if (j.is_string()) return padic::parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw DomainError("expected an integer or a rational string, got " + j.dump());
}

std::vector<MetaplecticWord> parse_words(const std::vector<std::string>& texts) {
  std::vector<MetaplecticWord> out;
  for (const auto& t : texts) out.push_back(MetaplecticWord::parse(t));
  return out;
}

void append(SuiteResult& r, std::vector<MatchReport> more) {
  for (auto& m : more) r.reports.push_back(std::move(m));
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

// Every report carries the truncation parameters it ran under.
void finish(SuiteResult& r, const RunConfig& cfg) {
  for (auto& m : r.reports) {
    m.moduli["M"] = cfg.M;
    m.moduli["n_gauss"] = cfg.n_gauss;
    if (!m.moduli.contains("window")) m.moduli["window"] = {-4, cfg.window};
  }
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  return {{"p", p},
          {"precision", precision},
          {"a", a.get_str()},
          {"b", b.get_str()},
          {"kappa", kappa.get_str()},
          {"epsilon", epsilon.get_str()},
          {"d", d},
          {"N", N},
          {"M", M},
          {"n_gauss", n_gauss},
          {"window", window},
          {"fl_bound", fl_bound},
          {"tolerances", {{"standard", tolerances.standard}, {"bigcell", tolerances.bigcell}}},
          {"seed", seed},
          {"battery", battery}};
}

RunConfig load_config(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("p")) c.p = j.at("p").get<long>();
  if (j.contains("precision")) c.precision = j.at("precision").get<int>();
  if (j.contains("a")) c.a = rational_field(j.at("a"));
  if (j.contains("b")) c.b = rational_field(j.at("b"));
  if (j.contains("kappa")) c.kappa = rational_field(j.at("kappa"));
  if (j.contains("epsilon")) c.epsilon = rational_field(j.at("epsilon"));
  if (j.contains("d")) c.d = j.at("d").get<long>();
  if (j.contains("N")) c.N = j.at("N").get<long>();
  if (j.contains("M")) c.M = j.at("M").get<long>();
  if (j.contains("phi_levels")) {
    c.N = j.at("phi_levels").at(0).get<long>();
    c.M = j.at("phi_levels").at(1).get<long>();
  }
  if (j.contains("n_gauss")) c.n_gauss = j.at("n_gauss").get<long>();
  if (j.contains("window")) c.window = j.at("window").get<long>();
  if (j.contains("fl_bound")) c.fl_bound = j.at("fl_bound").get<long>();
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (t.contains("standard")) c.tolerances.standard = t.at("standard").get<double>();
    if (t.contains("bigcell")) c.tolerances.bigcell = t.at("bigcell").get<double>();
  }
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("battery")) c.battery = j.at("battery").get<int>();
  if (const char* env = std::getenv("THETA_PRECISION")) c.precision = std::atoi(env);
  if (!padic::is_prime(c.p) || c.p == 2) throw DomainError("p must be an odd prime");
  if (c.precision < 4) throw DomainError("precision must be at least 4");
  return c;
}

RunConfig load_config_file(const std::string& path) { return load_config(read_json(path)); }

SuiteResult run_suite(const RunConfig& cfg, const std::string& suite) {
  static const std::vector<std::string> known{"fl",     "borel", "bigcell",      "equivariance", "parity",
                                              "gauss",  "square_class", "weil", "all"};
  if (std::find(known.begin(), known.end(), suite) == known.end()) throw DomainError("unknown suite " + suite);
  SuiteResult r;
  r.suite = suite;
  r.config = cfg.to_json();
  r.version = kVersion;
  const bool all = suite == "all";
  const padic::LocalField field(cfg.p, cfg.precision);
  const long p = cfg.p;
  const Rational up = Rational(padic::nonresidue(p));

  if (all || suite == "fl") {
    append(r, match::verify_fundamental_lemma(p, cfg.kappa, cfg.fl_bound));
    // The volume identity lives on the trivial-chi orbit of the same split algebra.
    Rational k0 = 1;
    if (!padic::QuadraticCharacter(field, k0).is_trivial()) k0 = Rational(padic::nonresidue(p));
    append(r, match::verify_volume_scaling(p, k0, 2));
  }
  if (all || suite == "gauss") append(r, match::verify_gauss(p, cfg.n_gauss));
  if (all || suite == "weil") {
    append(r, match::verify_product_formula(cfg.seed, 100));
    append(r, match::verify_weil_index(p));
  }
  const bool needs_ctx = all || suite == "borel" || suite == "bigcell" || suite == "equivariance" ||
                         suite == "parity" || suite == "square_class" || suite == "weil";
  if (!needs_ctx) {
    finish(r, cfg);
    return r;
  }

  const match::MatchingContext ctx(field, cfg.a, cfg.b, cfg.kappa, cfg.epsilon, cfg.d);
  r.config["context"] = ctx.describe();
  const auto battery = match::random_battery(p, cfg.N, cfg.M, cfg.seed, cfg.battery);
  if (all || suite == "weil") append(r, match::verify_involution(ctx, 0, 1, cfg.tolerances));
  if (all || suite == "borel") {
    std::vector<Rational> as{Rational(1), up, Rational(p), Rational(1, p), up * p};
    std::vector<Rational> bs{Rational(1, p * p), Rational(1, p), Rational(1), Rational(p), up / p};
    append(r, match::verify_borel(ctx, battery, as, bs, cfg.tolerances));
  }
  if (all || suite == "equivariance") {
    const std::string inv_p = "1/" + std::to_string(p);
    const auto words = parse_words({"n(" + inv_p + ")", "n(1)", "m(" + up.get_str() + ")", "m(" + std::to_string(p) + ")",
                                    "n(" + inv_p + ") m(" + up.get_str() + ")", "eps"});
    append(r, match::verify_equivariance(ctx, battery, words, cfg.tolerances));
  }
  if (all || suite == "parity") append(r, match::verify_parity(ctx, battery));
  if (all || suite == "bigcell") {
    const std::string inv_p = "1/" + std::to_string(p);
    const auto words = parse_words({"w", "w n(1)", "n(1) w", "w n(" + inv_p + ")", "m(" + up.get_str() + ") w",
                                    "w m(" + std::to_string(p) + ")"});
    append(r, match::verify_bigcell(ctx, battery, words, cfg.tolerances));
  }
  if (all || suite == "square_class") {
    const std::string inv_p = "1/" + std::to_string(p);
    const auto words = parse_words({"", "n(1)", "n(" + inv_p + ")", "m(" + up.get_str() + ")",
                                    "m(" + std::to_string(p) + ")", "w", "w n(" + inv_p + ")", "n(" + inv_p + ") w"});
    if (!ctx.chi().is_trivial()) append(r, match::verify_square_class(ctx, words, cfg.seed, cfg.tolerances));
  }
  finish(r, cfg);
  return r;
}

nlohmann::json hilbert_table(const Rational& a, const Rational& b, const std::vector<std::string>& places) {
  nlohmann::json out;
  out["a"] = a.get_str();
  out["b"] = b.get_str();
  nlohmann::json sym = nlohmann::json::object();
  int prod = 1;
  for (const auto& name : places) {
    padic::Place v;
    if (name == "inf" || name == "infinity") {
      v = padic::Place::infinity();
    } else {
      const long q = std::stol(name);
      if (!padic::is_prime(q)) throw DomainError("not a prime: " + name);
      v = padic::Place::prime(q);
    }
    const int s = padic::hilbert_symbol(a, b, v);
    sym[name] = s;
    prod *= s;
  }
  out["symbols"] = sym;
  out["product"] = prod;
  return out;
}

namespace {

// Primes dividing 2ab together with infinity: the places where the symbol can be -1.
std::vector<std::string> bad_places(const Rational& a, const Rational& b) {
  BigInt n = 2;
  for (const Rational* q : {&a, &b}) n *= q->get_num() * q->get_den();
  n = abs(n);
  std::vector<std::string> out;
  for (long q = 2; n > 1; ++q) {
    if (n % q != 0) continue;
    out.push_back(std::to_string(q));
    while (n % q == 0) n /= q;
  }
  out.push_back("inf");
  return out;
}

}  // namespace

nlohmann::json transform(const RunConfig& cfg, const schwartz::SchwartzFn& phi) {
  const padic::LocalField field(cfg.p, cfg.precision);
  const match::MatchingContext ctx(field, cfg.a, cfg.b, cfg.kappa, cfg.epsilon, cfg.d);
  const auto P = match::transform_phi0<Complex>(ctx, phi, cfg.window);
  nlohmann::json out;
  out["context"] = ctx.describe();
  out["mode"] = P.mode;
  out["n_lo"] = P.n_lo;
  out["n_star"] = P.n_star;
  out["near_zero"] = {P.near_zero.real(), P.near_zero.imag()};
  out["phi0"] = schwartz::to_json(P.fn);
  out["version"] = kVersion;
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"theta: local theta correspondence checks over Q_p"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto* hil = app.add_subcommand("hilbert", "Hilbert symbols (a,b)_v");
  std::string ha, hb, hplaces;
  hil->add_option("-a", ha, "first argument")->required();
  hil->add_option("-b", hb, "second argument")->required();
  hil->add_option("--places", hplaces, "comma separated primes and inf; default: all places where it may be -1");

  auto* tr = app.add_subcommand("transform", "compute phi0 from phi");
  std::string tconf, tphi, tout;
  tr->add_option("--config", tconf)->required()->check(CLI::ExistingFile);
  tr->add_option("--phi", tphi)->required()->check(CLI::ExistingFile);
  tr->add_option("-o,--output", tout, "output file, '-' for stdout");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  std::string vconf, vsuite = "all", vout;
  std::optional<std::uint64_t> vseed;
  ver->add_option("--config", vconf)->required()->check(CLI::ExistingFile);
  ver->add_option("--suite", vsuite)
      ->check(CLI::IsMember({"fl", "borel", "bigcell", "equivariance", "parity", "gauss", "square_class", "weil",
                             "all"}));
  ver->add_option("--seed", vseed);
  ver->add_option("-o,--output", vout, "output file, '-' for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*hil) {
      const Rational a = padic::parse_rational(ha), b = padic::parse_rational(hb);
      if (a == 0 || b == 0) throw DomainError("Hilbert symbol needs nonzero arguments");
      std::vector<std::string> places;
      if (hplaces.empty()) {
        places = bad_places(a, b);
      } else {
        std::stringstream ss(hplaces);
        for (std::string item; std::getline(ss, item, ',');) places.push_back(item);
      }
      std::cout << hilbert_table(a, b, places).dump(2) << "\n";
      return 0;
    }
    if (*tr) {
      const RunConfig cfg = load_config_file(tconf);
      const auto phi = schwartz::schwartz_from_json(read_json(tphi));
      const auto out = transform(cfg, phi);
      std::cout << "mode: " << out["mode"].get<std::string>() << "\n";
      if (!tout.empty()) write_json(tout, out);
      return 0;
    }
    if (*ver) {
      RunConfig cfg = load_config_file(vconf);
      if (vseed) cfg.seed = *vseed;
      const SuiteResult res = run_suite(cfg, vsuite);
      write_json(vout.empty() ? "-" : vout, to_json(res));
      std::cerr << vsuite << ": " << res.passed() << "/" << res.reports.size() << " passed, " << res.failed()
                << " blocking failures\n";
      return res.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace theta::cli
