#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "devtree/io.hpp"
#include "devtree/jump.hpp"
#include "devtree/stochastic.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace devtree;

TEST_CASE("trajectory csv round-trips bit-exactly through the numeric reader") {
  const auto cat = testutil::ladder({3.0, 6.0});
  Trajectory traj;
  traj.times = {0.0, 1.0 / 3.0, 0.1 + 0.2, 7.0};
  traj.states = {{0.5, 0.0},
                 {1.0 / 7.0, 2.0 / 3.0},
                 {1e-17, 123456.789012345678},
                 {std::nextafter(3.0, 4.0), 6.0}};

  const std::string csv = trajectory_csv(traj, cat);
  const auto dir = testutil::scratch_dir("io_traj");
  const auto path = dir + "/traj.csv";
  write_text_atomic(path, csv);

  const NumericTable table = read_numeric_csv(path);
  CHECK(table.columns == std::vector<std::string>{"time", "x0", "x1"});
  REQUIRE(table.times.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(table.times[i] == traj.times[i]);
    REQUIRE(table.rows[i].size() == 2);
    CHECK(table.rows[i][0] == traj.states[i][0]);
    CHECK(table.rows[i][1] == traj.states[i][1]);
  }
}

TEST_CASE("ensemble csv exposes one stats block per trait") {
  const auto cat = testutil::ladder({3.0, 6.0});
  EnsembleStats stats;
  stats.times = {0.0, 2.0};
  stats.mean = {{0.5, 0.25}, {3.0, 0.0}};
  stats.variance = {{0.0, 0.0}, {0.125, 0.0}};
  stats.p5 = {{0.5, 0.25}, {2.5, 0.0}};
  stats.p95 = {{0.5, 0.25}, {3.5, 0.0}};
  stats.replicates = 10;

  const std::string csv = ensemble_csv(stats, cat);
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "time,mean_x0,var_x0,p5_x0,p95_x0,mean_x1,var_x1,p5_x1,p95_x1");

  const auto dir = testutil::scratch_dir("io_ens");
  write_text_atomic(dir + "/e.csv", csv);
  const auto table = read_numeric_csv(dir + "/e.csv");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1][0] == 3.0);   // mean_x0
  CHECK(table.rows[1][1] == 0.125); // var_x0
  CHECK(table.rows[1][3] == 3.5);   // p95_x0
}

TEST_CASE("event csv writes one symbolic row per event") {
  const auto cat = testutil::ladder({3.0, 6.0});
  std::vector<EventRecord> events;
  events.push_back({0.5, EventKind::ClonalBirth, 0, 0});
  events.push_back({1.25, EventKind::Migration, 0, 1});
  events.push_back({2.0, EventKind::Mutation, 1, 0});

  CHECK(events_csv(events, cat) ==
        "time,kind,from,to\n"
        "0.5,clonal_birth,x0,x0\n"
        "1.25,migration,x0,x1\n"
        "2,mutation,x1,x0\n");
}

TEST_CASE("substitution path csv lists resident segments") {
  const auto cat = testutil::ladder({3.0, 6.0});
  TssPath path;
  path.segments = {{0.0, 0, 3.0}, {0.75, 1, 6.0}};
  path.absorbed = true;
  path.end_time = 10.0;

  CHECK(tss_csv(path, cat) ==
        "time,trait,mass\n"
        "0,x0,3\n"
        "0.75,x1,6\n");
}

TEST_CASE("tree path json round-trips through a json parser") {
  const auto cat = testutil::ladder({3.0, 6.0});
  TstPath path;
  TstStep s0;
  s0.time = 0.0;
  s0.config.traits = {0};
  s0.config.present = {true};
  s0.config.masses = {3.0};
  TstStep s1;
  s1.time = 1.5;
  s1.source = 0;
  s1.mutant = 1;
  s1.config.traits = {0, 1};
  s1.config.present = {false, true};
  s1.config.masses = {0.0, 6.0};
  s1.config.generation = 1;
  path.steps = {s0, s1};
  path.exhausted = true;
  path.end_time = 1.5;

  const auto j = nlohmann::json::parse(tst_json(path, cat));
  CHECK(j["exhausted"] == true);
  CHECK(j["end_time"] == 1.5);
  REQUIRE(j["steps"].size() == 2);
  CHECK(j["steps"][0]["source"].is_null());
  CHECK(j["steps"][0]["mutant"].is_null());
  CHECK(j["steps"][1]["source"] == "x0");
  CHECK(j["steps"][1]["mutant"] == "x1");
  CHECK(j["steps"][1]["traits"] == nlohmann::json::array({"x0", "x1"}));
  CHECK(j["steps"][1]["present"] == nlohmann::json::array({0, 1}));
  CHECK(j["steps"][1]["masses"][1] == 6.0);
}

TEST_CASE("ode csv takes explicit column names") {
  const std::string csv =
      ode_csv({0.0, 1.0}, {{0.5, 0.25}, {1.5, 0.75}}, {"x0", "x1"});
  const auto dir = testutil::scratch_dir("io_ode");
  write_text_atomic(dir + "/o.csv", csv);
  const auto table = read_numeric_csv(dir + "/o.csv");
  CHECK(table.columns == std::vector<std::string>{"time", "x0", "x1"});
  CHECK(table.rows[1] == std::vector<double>{1.5, 0.75});
}

TEST_CASE("the numeric reader rejects malformed tables") {
  const auto dir = testutil::scratch_dir("io_bad");

  write_text_atomic(dir + "/h.csv", "t,x0\n0,1\n");
  CHECK(testutil::thrown_kind([&] { read_numeric_csv(dir + "/h.csv"); }) ==
        ErrorKind::Parse);

  write_text_atomic(dir + "/c.csv", "time,x0\n0,abc\n");
  CHECK(testutil::thrown_kind([&] { read_numeric_csv(dir + "/c.csv"); }) ==
        ErrorKind::Parse);

  write_text_atomic(dir + "/n.csv", "time,x0\n0,1,2\n");
  CHECK(testutil::thrown_kind([&] { read_numeric_csv(dir + "/n.csv"); }) ==
        ErrorKind::Parse);

  write_text_atomic(dir + "/e.csv", "");
  CHECK(testutil::thrown_kind([&] { read_numeric_csv(dir + "/e.csv"); }) ==
        ErrorKind::Parse);

  CHECK(testutil::thrown_kind([&] { read_numeric_csv(dir + "/missing.csv"); }) ==
        ErrorKind::Io);
}

TEST_CASE("atomic writes replace content and leave no temp files behind") {
  const auto dir = testutil::scratch_dir("io_atomic");
  const auto path = dir + "/nested/deeper/out.txt";

  write_text_atomic(path, "first");
  CHECK(read_text_file(path) == "first");
  write_text_atomic(path, "second");
  CHECK(read_text_file(path) == "second");

  bool leftovers = false;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.path().extension() == ".tmp") leftovers = true;
  CHECK_FALSE(leftovers);

  // A file where a directory is needed makes the write fail cleanly.
  write_text_atomic(dir + "/blocker", "x");
  CHECK(testutil::thrown_kind([&] {
          write_text_atomic(dir + "/blocker/child.txt", "y");
        }) == ErrorKind::Io);
}

TEST_CASE("run summaries serialize their provenance fields") {
  RunSummary sum;
  sum.scenario_name = "fixture";
  sum.digest = "fnv1a64:0123456789abcdef";
  sum.outputs = {"fixture_traj.csv"};
  sum.wall_clock_seconds = 0.25;
  sum.warnings = {"something borderline"};

  const auto plain = nlohmann::json::parse(run_summary_json(sum));
  CHECK(plain["scenario"] == "fixture");
  CHECK(plain["digest"] == "fnv1a64:0123456789abcdef");
  CHECK(plain["tool_version"] == "0.1.0");
  CHECK(plain["stream_version"] == 1);
  CHECK(plain["outputs"] == nlohmann::json::array({"fixture_traj.csv"}));
  CHECK(plain["warnings"][0] == "something borderline");
  CHECK_FALSE(plain.contains("event_counts"));

  sum.has_event_counts = true;
  sum.event_counts = {10, 2, 3, 4, 1};
  const auto counted = nlohmann::json::parse(run_summary_json(sum));
  CHECK(counted["event_counts"]["clonal_birth"] == 10);
  CHECK(counted["event_counts"]["mutation"] == 1);
}
