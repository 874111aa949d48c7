#include "devtree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "devtree/errors.hpp"

namespace devtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_ratio(double lhs, double rhs) {
  if (!std::isfinite(lhs)) return kInf; // an infinite side is never "small"
  if (rhs > 0.0) return lhs / rhs;
  if (lhs == 0.0 && rhs == 0.0) return kInf; // 0 << 0 is false
  return lhs > 0.0 ? kInf : 0.0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

bool ScalingReport::passed() const {
  for (const auto& c : checks)
    if (!c.informational && !c.pass) return false;
  return true;
}

std::string ScalingReport::to_text() const {
  std::string out = "scaling checks (margin " + fmt(margin) + "):\n";
  for (const auto& c : checks) {
    out += "  [";
    out += c.informational ? "info" : (c.pass ? "pass" : "FAIL");
    out += "] " + c.name + ": " + fmt(c.lhs) + " vs " + fmt(c.rhs) +
           " (ratio " + fmt(c.ratio) + ")";
    if (!c.note.empty()) out += " -- " + c.note;
    out += "\n";
  }
  return out;
}

ScalingReport check_scaling(const ScalingRegime& regime, double margin) {
  if (!(regime.K > 0.0) || !std::isfinite(regime.K))
    fail(ErrorKind::InvalidArgument, "K must be positive and finite");
  if (regime.epsilon < 0.0 || regime.sigma < 0.0)
    fail(ErrorKind::InvalidArgument, "epsilon and sigma must be nonnegative");
  if (!(margin > 0.0) || margin > 1.0)
    fail(ErrorKind::InvalidArgument, "margin must lie in (0, 1]");

  const double K = regime.K;
  const double eps = regime.epsilon;
  const double sigma = regime.sigma;
  const bool no_migration = eps == 0.0;
  const bool no_mutation = sigma == 0.0;
  const double C = 1.0; // convention for the unspecified constant

  ScalingReport report;
  report.margin = margin;

  auto add = [&](std::string name, double lhs, double rhs, bool informational,
                 std::string note) {
    ScalingCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.ratio = safe_ratio(lhs, rhs);
    c.pass = c.ratio <= margin;
    c.informational = informational;
    c.note = std::move(note);
    report.checks.push_back(std::move(c));
  };

  const std::string mig_note = no_migration ? "migration disabled; vacuous" : "";
  const std::string mut_note = no_mutation ? "mutation disabled; vacuous" : "";

  add("1 << K*eps", 1.0, K * eps, no_migration, mig_note);
  add("K*eps << K", K * eps, K, no_migration, mig_note);
  add("exp(-C*K) << K*sigma", std::exp(-C * K), K * sigma, no_mutation, mut_note);
  add("K*sigma << 1/ln(K)", K * sigma,
      std::log(K) > 0.0 ? 1.0 / std::log(K) : kInf, no_mutation, mut_note);
  {
    const bool vac = no_migration || no_mutation;
    add("ln(1/eps) << 1/(K*sigma)", eps > 0.0 ? std::log(1.0 / eps) : kInf,
        sigma > 0.0 ? 1.0 / (K * sigma) : kInf, vac,
        vac ? (no_migration ? mig_note : mut_note) : "");
  }
  add("1/(K*sigma) << exp(C*K)", sigma > 0.0 ? 1.0 / (K * sigma) : kInf,
      std::exp(C * K), true,
      no_mutation ? mut_note : "constant C conventionally 1");
  return report;
}

FixationEstimate predicted_fixation_time(const TraitCatalog& cat,
                                         const std::vector<int>& ladder,
                                         const NumericPolicy& pol) {
  if (ladder.size() < 3)
    fail(ErrorKind::InvalidArgument, "need an ordered ladder of at least 3 traits");
  for (int x : ladder)
    if (x < 0 || static_cast<std::size_t>(x) >= cat.size())
      fail(ErrorKind::InvalidArgument, "ladder index out of range");

  // Every consecutive pair must be strictly ordered: the later trait invades
  // the earlier one's equilibrium, never conversely.
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    const double up = invasion_fitness(cat, ladder[i + 1], ladder[i], pol);
    const double down = invasion_fitness(cat, ladder[i], ladder[i + 1], pol);
    if (!(up > pol.sign_tol) || !(down < -pol.sign_tol))
      fail(ErrorKind::OrderViolation,
           "ladder traits " + cat.traits[static_cast<std::size_t>(ladder[i])].id +
               ", " + cat.traits[static_cast<std::size_t>(ladder[i + 1])].id +
               " are not strictly ordered");
  }

  FixationEstimate est;
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
    est.uphill_fitness.push_back(
        invasion_fitness(cat, ladder[i + 1], ladder[i], pol));

  double total = 0.0;
  for (std::size_t i = 0; i + 2 < ladder.size(); ++i) {
    const int x0 = ladder[i], x1 = ladder[i + 1], x2 = ladder[i + 2];
    const double f10 = invasion_fitness(cat, x1, x0, pol);
    const double f21 = invasion_fitness(cat, x2, x1, pol);
    const double f01 = invasion_fitness(cat, x0, x1, pol);
    const double f12 = invasion_fitness(cat, x1, x2, pol);
    const auto& t0 = cat.traits[static_cast<std::size_t>(x0)];
    const auto& t2 = cat.traits[static_cast<std::size_t>(x2)];
    const double growth0 = t0.b - t0.d;
    const double c1 = std::min(std::abs(f01) / f21, 1.0);
    const double bound = 1.0 / f10 + 1.0 / f21 + c1 / growth0;
    if (i == 0) {
      est.c1 = c1;
      est.c2 = c1 * std::abs(f12) / growth0;
    }
    if (2.0 / (t2.b - t2.d) < 1.0 / f10 + 1.0 / f21)
      est.growth_bound_ok = false;
    total += bound;
  }
  est.time_units = total;
  est.heuristic = ladder.size() > 3;
  return est;
}

double total_variation_distance(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size())
    fail(ErrorKind::InvalidArgument,
         "configurations live on different catalogs");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

FixationMeasurement measure_fixation_time(const Trajectory& traj,
                                          const Configuration& target,
                                          double delta,
                                          const ScalingRegime& regime) {
  if (traj.times.empty() || traj.states.size() != traj.times.size())
    fail(ErrorKind::InvalidArgument, "trajectory has no samples");
  if (!(delta >= 0.0))
    fail(ErrorKind::InvalidArgument, "delta must be nonnegative");

  // Scan backwards for the last excursion outside the delta-ball; the
  // trajectory "enters and stays" from the next grid point on.
  std::size_t first_inside = 0;
  for (std::size_t i = traj.times.size(); i-- > 0;) {
    if (total_variation_distance(traj.states[i], target) > delta) {
      first_inside = i + 1;
      break;
    }
  }
  FixationMeasurement m;
  if (first_inside >= traj.times.size()) return m; // never settles
  m.reached = true;
  m.time = traj.times[first_inside];
  if (regime.epsilon > 0.0 && regime.epsilon < 1.0)
    m.time_over_log = m.time / std::log(1.0 / regime.epsilon);
  return m;
}

OdeComparison compare_to_ode(const EnsembleStats& ensemble,
                             const Integration& ode) {
  if (ensemble.times.size() != ode.times.size())
    fail(ErrorKind::GridMismatch, "sample grids have different lengths");
  for (std::size_t i = 0; i < ensemble.times.size(); ++i)
    if (std::abs(ensemble.times[i] - ode.times[i]) > 1e-9)
      fail(ErrorKind::GridMismatch, "sample grids differ at index " +
                                        std::to_string(i));
  OdeComparison cmp;
  cmp.gap.resize(ensemble.times.size(), 0.0);
  for (std::size_t t = 0; t < ensemble.times.size(); ++t) {
    if (ensemble.mean[t].size() != ode.states[t].size())
      fail(ErrorKind::GridMismatch, "trait counts differ");
    double g = 0.0;
    for (std::size_t l = 0; l < ensemble.mean[t].size(); ++l)
      g = std::max(g, std::abs(ensemble.mean[t][l] - ode.states[t][l]));
    cmp.gap[t] = g;
    cmp.sup_gap = std::max(cmp.sup_gap, g);
  }
  return cmp;
}

} // namespace devtree
