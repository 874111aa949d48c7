#include "devtree/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "devtree/errors.hpp"
#include "json.hpp"

namespace devtree {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  fail(ErrorKind::Parse, where + ": " + what);
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
}

void expect_keys(const json& j, const std::vector<std::string>& allowed,
                 const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      parse_fail(where, "unknown key '" + it.key() + "'");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(where, "value must be finite");
  return v;
}

int resolve_trait(const TraitCatalog& cat, const std::string& id,
                  const std::string& where) {
  const int idx = cat.find_trait(id);
  if (idx < 0) parse_fail(where, "unknown trait id '" + id + "'");
  return idx;
}

// Band positions for the kernel sugar: traits ranked by net growth b - d
// ascending, declaration order breaking ties.
std::vector<int> growth_ranks(const std::vector<TraitParams>& traits) {
  std::vector<int> idx(traits.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return traits[static_cast<std::size_t>(a)].b -
               traits[static_cast<std::size_t>(a)].d <
           traits[static_cast<std::size_t>(b)].b -
               traits[static_cast<std::size_t>(b)].d;
  });
  std::vector<int> rank(traits.size());
  for (std::size_t p = 0; p < idx.size(); ++p)
    rank[static_cast<std::size_t>(idx[p])] = static_cast<int>(p);
  return rank;
}

std::vector<double> parse_kernel(const json& j, const TraitCatalog& cat,
                                 const std::vector<int>& ranks,
                                 const std::string& where) {
  expect_object(j, where);
  expect_keys(j, {"uniform_band", "uniform_adjacent", "entries"}, where);
  if (j.size() != 1)
    parse_fail(where, "give exactly one of uniform_band, uniform_adjacent, entries");
  const std::size_t n = cat.size();
  std::vector<double> k(n * n, 0.0);

  if (j.contains("uniform_band")) {
    const double v = get_number(j["uniform_band"], where + ".uniform_band");
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (std::abs(ranks[x] - ranks[y]) <= 1) k[x * n + y] = v;
    return k;
  }
  if (j.contains("uniform_adjacent")) {
    const double v =
        get_number(j["uniform_adjacent"], where + ".uniform_adjacent");
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (std::abs(ranks[x] - ranks[y]) == 1) k[x * n + y] = v;
    return k;
  }
  const json& entries = j["entries"];
  if (!entries.is_array()) parse_fail(where + ".entries", "expected an array");
  for (const json& e : entries) {
    if (!e.is_array() || e.size() != 3)
      parse_fail(where + ".entries", "each entry is [from, to, value]");
    if (!e[0].is_string() || !e[1].is_string())
      parse_fail(where + ".entries", "trait ids must be strings");
    const int x = resolve_trait(cat, e[0].get<std::string>(), where + ".entries");
    const int y = resolve_trait(cat, e[1].get<std::string>(), where + ".entries");
    k[static_cast<std::size_t>(x) * n + static_cast<std::size_t>(y)] =
        get_number(e[2], where + ".entries");
  }
  return k;
}

MutantPolicy parse_policy(const json& j, const TraitCatalog& cat) {
  MutantPolicy pol;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "fitter_than_all") pol.kind = MutantPolicyKind::FitterThanAll;
    else if (s == "next_in_catalog") pol.kind = MutantPolicyKind::NextInCatalog;
    else parse_fail("mutant_policy", "unknown policy '" + s + "'");
    return pol;
  }
  expect_object(j, "mutant_policy");
  expect_keys(j, {"sequence"}, "mutant_policy");
  if (!j.contains("sequence") || !j["sequence"].is_array())
    parse_fail("mutant_policy", "expected {\"sequence\": [trait ids]}");
  pol.kind = MutantPolicyKind::ExplicitSequence;
  for (const json& e : j["sequence"]) {
    if (!e.is_string()) parse_fail("mutant_policy.sequence", "ids must be strings");
    pol.sequence.push_back(
        resolve_trait(cat, e.get<std::string>(), "mutant_policy.sequence"));
  }
  return pol;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

json kernel_entries_json(const TraitCatalog& cat, const std::vector<double>& k) {
  json entries = json::array();
  const std::size_t n = cat.size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (k[x * n + y] != 0.0)
        entries.push_back(json::array(
            {cat.traits[x].id, cat.traits[y].id, k[x * n + y]}));
  return json{{"entries", std::move(entries)}};
}

} // namespace

std::string scenario_digest(const std::string& canonical_text) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_text)));
  return buf;
}

std::string canonical_scenario_text(const Scenario& s) {
  json j;
  j["name"] = s.name;
  json traits = json::array();
  for (const auto& t : s.catalog.traits)
    traits.push_back(json{{"id", t.id}, {"b", t.b}, {"d", t.d}, {"mu", t.mu}});
  j["traits"] = std::move(traits);

  json kernels;
  kernels["alpha0"] = kernel_entries_json(s.catalog, s.catalog.alpha0);
  kernels["migration"] = kernel_entries_json(s.catalog, s.catalog.migration);
  if (!s.catalog.tss_weight.empty())
    kernels["tss_weight"] = kernel_entries_json(s.catalog, s.catalog.tss_weight);
  j["kernels"] = std::move(kernels);

  switch (s.catalog.mutant_policy.kind) {
    case MutantPolicyKind::FitterThanAll:
      j["mutant_policy"] = "fitter_than_all";
      break;
    case MutantPolicyKind::NextInCatalog:
      j["mutant_policy"] = "next_in_catalog";
      break;
    case MutantPolicyKind::ExplicitSequence: {
      json seq = json::array();
      for (int x : s.catalog.mutant_policy.sequence)
        seq.push_back(s.catalog.traits[static_cast<std::size_t>(x)].id);
      j["mutant_policy"] = json{{"sequence", std::move(seq)}};
      break;
    }
  }

  j["regime"] = json{
      {"K", s.regime.K}, {"epsilon", s.regime.epsilon}, {"sigma", s.regime.sigma}};

  json initial = json::object();
  for (std::size_t i = 0; i < s.initial.size(); ++i)
    if (s.initial[i] != 0.0) initial[s.catalog.traits[i].id] = s.initial[i];
  j["initial"] = std::move(initial);

  if (s.discovered_explicit) {
    json disc = json::array();
    for (int x : s.discovered)
      disc.push_back(s.catalog.traits[static_cast<std::size_t>(x)].id);
    j["discovered"] = std::move(disc);
  }

  j["horizon"] = s.horizon;
  if (!s.grid.times.empty())
    j["grid"] = json{{"times", s.grid.times}};
  else
    j["grid"] = json{{"points", s.grid.points}};
  j["seed"] = s.seed;
  j["replicates"] = s.replicates;
  return j.dump();
}

Scenario parse_scenario_text(const std::string& text,
                             const std::string& fallback_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Report line/column instead of the library's byte offset.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') { ++line; col = 1; } else ++col;
    }
    fail(ErrorKind::Parse, "line " + std::to_string(line) + ", column " +
                               std::to_string(col) + ": " + e.what());
  }
  expect_object(j, "scenario");
  expect_keys(j,
              {"name", "traits", "kernels", "mutant_policy", "regime",
               "initial", "discovered", "horizon", "grid", "seed", "replicates"},
              "scenario");

  Scenario s;
  s.name = j.contains("name") ? j["name"].get<std::string>() : fallback_name;
  if (s.name.empty()) parse_fail("name", "scenario needs a name");

  if (!j.contains("traits") || !j["traits"].is_array() || j["traits"].empty())
    parse_fail("traits", "expected a non-empty array");
  for (const json& t : j["traits"]) {
    expect_object(t, "traits");
    expect_keys(t, {"id", "b", "d", "mu"}, "traits");
    if (!t.contains("id") || !t["id"].is_string())
      parse_fail("traits", "each trait needs a string id");
    TraitParams p;
    p.id = t["id"].get<std::string>();
    if (s.catalog.find_trait(p.id) >= 0)
      parse_fail("traits", "duplicate trait id '" + p.id + "'");
    if (t.contains("b")) p.b = get_number(t["b"], "traits." + p.id + ".b");
    if (t.contains("d")) p.d = get_number(t["d"], "traits." + p.id + ".d");
    if (t.contains("mu")) p.mu = get_number(t["mu"], "traits." + p.id + ".mu");
    s.catalog.traits.push_back(std::move(p));
  }
  const std::size_t n = s.catalog.size();
  const auto ranks = growth_ranks(s.catalog.traits);

  if (!j.contains("kernels")) parse_fail("kernels", "missing");
  expect_object(j["kernels"], "kernels");
  expect_keys(j["kernels"], {"alpha0", "migration", "tss_weight"}, "kernels");
  if (!j["kernels"].contains("alpha0"))
    parse_fail("kernels", "alpha0 is required");
  s.catalog.alpha0 =
      parse_kernel(j["kernels"]["alpha0"], s.catalog, ranks, "kernels.alpha0");
  if (j["kernels"].contains("migration"))
    s.catalog.migration = parse_kernel(j["kernels"]["migration"], s.catalog,
                                       ranks, "kernels.migration");
  else
    s.catalog.migration.assign(n * n, 0.0);
  if (j["kernels"].contains("tss_weight"))
    s.catalog.tss_weight = parse_kernel(j["kernels"]["tss_weight"], s.catalog,
                                        ranks, "kernels.tss_weight");

  if (j.contains("mutant_policy"))
    s.catalog.mutant_policy = parse_policy(j["mutant_policy"], s.catalog);

  if (!j.contains("regime")) parse_fail("regime", "missing");
  const json& r = j["regime"];
  expect_object(r, "regime");
  expect_keys(r, {"K", "epsilon", "epsilon_exponent", "sigma", "sigma_exponent"},
              "regime");
  if (!r.contains("K")) parse_fail("regime", "K is required");
  s.regime.K = get_number(r["K"], "regime.K");
  if (!(s.regime.K > 0.0)) parse_fail("regime.K", "must be positive");
  if (r.contains("epsilon") && r.contains("epsilon_exponent"))
    parse_fail("regime", "give epsilon or epsilon_exponent, not both");
  if (r.contains("sigma") && r.contains("sigma_exponent"))
    parse_fail("regime", "give sigma or sigma_exponent, not both");
  s.regime.epsilon = r.contains("epsilon")
                         ? get_number(r["epsilon"], "regime.epsilon")
                         : (r.contains("epsilon_exponent")
                                ? std::pow(s.regime.K,
                                           -get_number(r["epsilon_exponent"],
                                                       "regime.epsilon_exponent"))
                                : 0.0);
  s.regime.sigma = r.contains("sigma")
                       ? get_number(r["sigma"], "regime.sigma")
                       : (r.contains("sigma_exponent")
                              ? std::pow(s.regime.K,
                                         -get_number(r["sigma_exponent"],
                                                     "regime.sigma_exponent"))
                              : 0.0);
  if (s.regime.epsilon < 0.0 || s.regime.sigma < 0.0)
    parse_fail("regime", "epsilon and sigma must be nonnegative");

  if (!j.contains("initial")) parse_fail("initial", "missing");
  expect_object(j["initial"], "initial");
  s.initial.assign(n, 0.0);
  for (auto it = j["initial"].begin(); it != j["initial"].end(); ++it) {
    const int x = resolve_trait(s.catalog, it.key(), "initial");
    const double v = get_number(it.value(), "initial." + it.key());
    if (v < 0.0) parse_fail("initial." + it.key(), "density must be nonnegative");
    s.initial[static_cast<std::size_t>(x)] = v;
  }

  if (j.contains("discovered")) {
    if (!j["discovered"].is_array())
      parse_fail("discovered", "expected an array of trait ids");
    s.discovered_explicit = true;
    for (const json& e : j["discovered"]) {
      if (!e.is_string()) parse_fail("discovered", "ids must be strings");
      s.discovered.push_back(
          resolve_trait(s.catalog, e.get<std::string>(), "discovered"));
    }
    std::sort(s.discovered.begin(), s.discovered.end());
    s.discovered.erase(std::unique(s.discovered.begin(), s.discovered.end()),
                       s.discovered.end());
  }

  if (!j.contains("horizon")) parse_fail("horizon", "missing");
  s.horizon = get_number(j["horizon"], "horizon");
  if (!(s.horizon > 0.0)) parse_fail("horizon", "must be positive");

  if (j.contains("grid")) {
    const json& g = j["grid"];
    expect_object(g, "grid");
    expect_keys(g, {"points", "times"}, "grid");
    if (g.contains("points") == g.contains("times"))
      parse_fail("grid", "give exactly one of points, times");
    if (g.contains("points")) {
      if (!g["points"].is_number_unsigned() || g["points"].get<std::uint64_t>() < 2)
        parse_fail("grid.points", "expected an integer >= 2");
      s.grid.points = g["points"].get<std::size_t>();
    } else {
      if (!g["times"].is_array()) parse_fail("grid.times", "expected an array");
      for (const json& e : g["times"])
        s.grid.times.push_back(get_number(e, "grid.times"));
    }
  }

  if (!j.contains("seed")) parse_fail("seed", "missing");
  if (!j["seed"].is_number_unsigned())
    parse_fail("seed", "expected a nonnegative integer");
  s.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("replicates")) {
    if (!j["replicates"].is_number_unsigned() ||
        j["replicates"].get<std::uint64_t>() < 1)
      parse_fail("replicates", "expected an integer >= 1");
    s.replicates = j["replicates"].get<std::size_t>();
  }

  s.canonical = canonical_scenario_text(s);
  s.digest = scenario_digest(s.canonical);
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (const auto slash = name.find_last_of("/\\"); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos)
    name = name.substr(0, dot);
  return parse_scenario_text(buf.str(), name);
}

} // namespace devtree
