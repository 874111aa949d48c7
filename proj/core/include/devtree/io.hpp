#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "devtree/jump.hpp"
#include "devtree/model.hpp"
#include "devtree/stochastic.hpp"

namespace devtree {

// Atomic file write: content goes to a temp file in the target directory,
// then renames over the destination.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// CSV serializations. Densities and times use 17 significant digits so a
// re-read is bit-exact; '.' decimal separator, no locale.
std::string trajectory_csv(const Trajectory& traj, const TraitCatalog& cat);
std::string ensemble_csv(const EnsembleStats& stats, const TraitCatalog& cat);
std::string events_csv(const std::vector<EventRecord>& events,
                       const TraitCatalog& cat);
std::string tss_csv(const TssPath& path, const TraitCatalog& cat);
std::string tst_json(const TstPath& path, const TraitCatalog& cat);
std::string ode_csv(const std::vector<double>& times,
                    const std::vector<Configuration>& states,
                    const std::vector<std::string>& columns);

// Generic numeric table reader for the CSVs above (time + value columns).
struct NumericTable {
  std::vector<std::string> columns; // includes the leading "time"
  std::vector<double> times;
  std::vector<std::vector<double>> rows; // values per time, minus the time col
};

NumericTable read_numeric_csv(const std::string& path);

struct RunSummary {
  std::string scenario_name;
  std::string digest;
  std::string tool_version = "0.1.0";
  int stream_version = 1;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  bool has_event_counts = false;
  std::array<std::uint64_t, kEventKinds> event_counts{};
  std::vector<std::string> warnings;
};

std::string run_summary_json(const RunSummary& summary);

} // namespace devtree
