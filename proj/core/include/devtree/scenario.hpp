#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "devtree/model.hpp"
#include "devtree/stochastic.hpp"

namespace devtree {

inline constexpr const char* kToolVersion = "0.1.0";

// A fully resolved run description: catalog, regime, initial configuration,
// horizon, sample grid, seed and replicate count. Parsed from JSON; unknown
// keys are rejected. The digest is an FNV-1a 64 hash of the canonical
// serialization, so equivalent spellings (e.g. epsilon given directly or as
// a K-exponent) share a digest.
struct Scenario {
  std::string name;
  TraitCatalog catalog;
  ScalingRegime regime;
  Configuration initial;       // by catalog index
  std::vector<int> discovered; // empty = default rule at simulation time
  bool discovered_explicit = false;
  double horizon = 1.0;
  GridSpec grid;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  std::string digest;    // "fnv1a64:<16 hex digits>"
  std::string canonical; // canonical JSON text
};

Scenario parse_scenario_text(const std::string& text,
                             const std::string& fallback_name);
Scenario parse_scenario_file(const std::string& path);

// Canonical serialization: sorted keys, resolved values, no whitespace.
// Parsing it back yields the same canonical text and digest.
std::string canonical_scenario_text(const Scenario& s);
std::string scenario_digest(const std::string& canonical_text);

} // namespace devtree
