#include "devtree/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "devtree/errors.hpp"
#include "json.hpp"

namespace devtree {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& trait_id(const TraitCatalog& cat, int idx) {
  return cat.traits[static_cast<std::size_t>(idx)].id;
}

} // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path())
    fs::create_directories(target.parent_path(), ec); // best effort
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) fail(ErrorKind::Io, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorKind::Io, "cannot rename into '" + path + "': " + ec.message());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trajectory_csv(const Trajectory& traj, const TraitCatalog& cat) {
  std::string out = "time";
  for (const auto& t : cat.traits) out += "," + t.id;
  out += "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += num(traj.times[i]);
    for (double v : traj.states[i]) out += "," + num(v);
    out += "\n";
  }
  return out;
}

std::string ensemble_csv(const EnsembleStats& stats, const TraitCatalog& cat) {
  std::string out = "time";
  for (const auto& t : cat.traits)
    out += ",mean_" + t.id + ",var_" + t.id + ",p5_" + t.id + ",p95_" + t.id;
  out += "\n";
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    out += num(stats.times[i]);
    for (std::size_t l = 0; l < cat.size(); ++l) {
      out += "," + num(stats.mean[i][l]) + "," + num(stats.variance[i][l]) +
             "," + num(stats.p5[i][l]) + "," + num(stats.p95[i][l]);
    }
    out += "\n";
  }
  return out;
}

std::string events_csv(const std::vector<EventRecord>& events,
                       const TraitCatalog& cat) {
  std::string out = "time,kind,from,to\n";
  for (const auto& e : events) {
    out += num(e.time);
    out += ",";
    out += event_kind_name(e.kind);
    out += "," + trait_id(cat, e.from) + "," + trait_id(cat, e.to) + "\n";
  }
  return out;
}

std::string tss_csv(const TssPath& path, const TraitCatalog& cat) {
  std::string out = "time,trait,mass\n";
  for (const auto& seg : path.segments)
    out += num(seg.time) + "," + trait_id(cat, seg.trait) + "," +
           num(seg.mass) + "\n";
  return out;
}

std::string ode_csv(const std::vector<double>& times,
                    const std::vector<Configuration>& states,
                    const std::vector<std::string>& columns) {
  std::string out = "time";
  for (const auto& c : columns) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += num(times[i]);
    for (double v : states[i]) out += "," + num(v);
    out += "\n";
  }
  return out;
}

std::string tst_json(const TstPath& path, const TraitCatalog& cat) {
  nlohmann::json j;
  j["exhausted"] = path.exhausted;
  j["end_time"] = path.end_time;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : path.steps) {
    nlohmann::json step;
    step["time"] = s.time;
    step["source"] =
        s.source < 0 ? nlohmann::json() : nlohmann::json(trait_id(cat, s.source));
    step["mutant"] =
        s.mutant < 0 ? nlohmann::json() : nlohmann::json(trait_id(cat, s.mutant));
    nlohmann::json traits = nlohmann::json::array();
    nlohmann::json present = nlohmann::json::array();
    nlohmann::json masses = nlohmann::json::array();
    for (std::size_t i = 0; i < s.config.traits.size(); ++i) {
      traits.push_back(trait_id(cat, s.config.traits[i]));
      present.push_back(s.config.present[i] ? 1 : 0);
      masses.push_back(s.config.masses[i]);
    }
    step["traits"] = std::move(traits);
    step["present"] = std::move(present);
    step["masses"] = std::move(masses);
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j.dump(2) + "\n";
}

NumericTable read_numeric_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  NumericTable table;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::Parse, "'" + path + "': empty file");
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  }
  if (table.columns.empty() || table.columns[0] != "time")
    fail(ErrorKind::Parse, "'" + path + "': first column must be 'time'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        fail(ErrorKind::Parse, "'" + path + "' line " + std::to_string(lineno) +
                                   ": bad number '" + cell + "'");
      values.push_back(v);
    }
    if (values.size() != table.columns.size())
      fail(ErrorKind::Parse, "'" + path + "' line " + std::to_string(lineno) +
                                 ": expected " +
                                 std::to_string(table.columns.size()) +
                                 " cells, got " + std::to_string(values.size()));
    table.times.push_back(values[0]);
    values.erase(values.begin());
    table.rows.push_back(std::move(values));
  }
  return table;
}

std::string run_summary_json(const RunSummary& summary) {
  nlohmann::json j;
  j["scenario"] = summary.scenario_name;
  j["digest"] = summary.digest;
  j["tool_version"] = summary.tool_version;
  j["stream_version"] = summary.stream_version;
  j["outputs"] = summary.outputs;
  j["wall_clock_seconds"] = summary.wall_clock_seconds;
  if (summary.has_event_counts) {
    nlohmann::json counts;
    for (std::size_t k = 0; k < kEventKinds; ++k)
      counts[event_kind_name(static_cast<EventKind>(k))] =
          summary.event_counts[k];
    j["event_counts"] = std::move(counts);
  }
  j["warnings"] = summary.warnings;
  return j.dump(2) + "\n";
}

} // namespace devtree
