#include "devtree/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

namespace devtree {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order weights for the error estimate (include the FSAL stage).
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

bool banded(const OdeSystem& sys, std::size_t i, std::size_t j) {
  return std::abs(sys.order_pos[i] - sys.order_pos[j]) <= 1;
}

} // namespace

void OdeSystem::rhs(const double* n, double* out) const {
  const std::size_t m = dim();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& t = catalog.traits[static_cast<std::size_t>(members[i])];
    double crowd = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (banded(*this, i, j)) crowd += catalog.alpha(members[i], members[j]) * n[j];
    double v = (t.b - t.d - crowd) * n[i];
    if (epsilon != 0.0) {
      double flux = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j || !banded(*this, i, j)) continue;
        flux += catalog.mig(members[j], members[i]) * n[j] -
                catalog.mig(members[i], members[j]) * n[i];
      }
      v += epsilon * flux;
    }
    out[i] = v;
  }
}

std::vector<double> OdeSystem::rhs(const std::vector<double>& n) const {
  if (n.size() != dim())
    fail(ErrorKind::InvalidArgument, "state dimension mismatch");
  std::vector<double> out(dim());
  rhs(n.data(), out.data());
  return out;
}

std::vector<double> OdeSystem::jacobian(const std::vector<double>& n) const {
  if (n.size() != dim())
    fail(ErrorKind::InvalidArgument, "state dimension mismatch");
  const std::size_t m = dim();
  std::vector<double> J(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& t = catalog.traits[static_cast<std::size_t>(members[i])];
    double crowd = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (banded(*this, i, j)) crowd += catalog.alpha(members[i], members[j]) * n[j];
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      if (banded(*this, i, j)) v -= catalog.alpha(members[i], members[j]) * n[i];
      if (i == j) v += t.b - t.d - crowd;
      if (epsilon != 0.0) {
        if (i != j && banded(*this, i, j))
          v += epsilon * catalog.mig(members[j], members[i]);
        if (i == j)
          for (std::size_t k = 0; k < m; ++k)
            if (k != i && banded(*this, i, k))
              v -= epsilon * catalog.mig(members[i], members[k]);
      }
      J[i * m + j] = v;
    }
  }
  return J;
}

OdeSystem logistic_system(const TraitCatalog& cat, int x) {
  if (x < 0 || static_cast<std::size_t>(x) >= cat.size())
    fail(ErrorKind::InvalidArgument, "trait index out of range");
  OdeSystem sys;
  sys.kind = SystemKind::Logistic;
  sys.catalog = cat;
  sys.members = {x};
  sys.order_pos = {0};
  return sys;
}

OdeSystem lv2_system(const TraitCatalog& cat, int x, int y) {
  if (x == y) fail(ErrorKind::InvalidArgument, "need two distinct traits");
  if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= cat.size() ||
      static_cast<std::size_t>(y) >= cat.size())
    fail(ErrorKind::InvalidArgument, "trait index out of range");
  OdeSystem sys;
  sys.kind = SystemKind::LotkaVolterra2;
  sys.catalog = cat;
  sys.members = {x, y};
  sys.order_pos = {0, 1};
  return sys;
}

OdeSystem nearest_neighbor_system(const TraitCatalog& cat, double epsilon,
                                  bool include_migration,
                                  const NumericPolicy& pol) {
  OdeSystem sys;
  sys.kind = SystemKind::NearestNeighborLV;
  sys.catalog = cat;
  sys.members.resize(cat.size());
  for (std::size_t i = 0; i < cat.size(); ++i) sys.members[i] = static_cast<int>(i);
  const auto order = fitness_order(cat, pol);
  sys.order_pos.assign(cat.size(), 0);
  for (std::size_t p = 0; p < order.size(); ++p)
    sys.order_pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
  sys.epsilon = include_migration ? epsilon : 0.0;
  return sys;
}

Integration integrate(const OdeSystem& sys, const std::vector<double>& y0,
                      const std::vector<double>& grid,
                      const NumericPolicy& pol) {
  const std::size_t m = sys.dim();
  if (y0.size() != m) fail(ErrorKind::InvalidArgument, "initial state dimension mismatch");
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "empty sample grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      fail(ErrorKind::InvalidArgument, "sample grid must be strictly increasing");

  Integration out;
  out.times = grid;
  out.states.reserve(grid.size());

  std::vector<double> y = y0, ytmp(m), ynew(m), yerr(m);
  std::vector<double> k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m);

  auto clip = [&](std::vector<double>& v) {
    for (auto& x : v)
      if (std::abs(x) < pol.ode_abs_tol) x = 0.0;
  };

  double t = grid[0];
  clip(y);
  out.states.push_back(y);

  const double span = grid.back() - grid.front();
  double h = span > 0.0 ? span / 100.0 : 0.0;

  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double tend = grid[g];
    while (t < tend) {
      if (h > tend - t) h = tend - t;
      if (!(h > span * 1e-14))
        fail(ErrorKind::Stiffness, "step size underflow at t = " + std::to_string(t));
      sys.rhs(y.data(), k1.data());

      for (std::size_t i = 0; i < m; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      sys.rhs(ytmp.data(), k2.data());
      for (std::size_t i = 0; i < m; ++i)
        ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      sys.rhs(ytmp.data(), k3.data());
      for (std::size_t i = 0; i < m; ++i)
        ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      sys.rhs(ytmp.data(), k4.data());
      for (std::size_t i = 0; i < m; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      sys.rhs(ytmp.data(), k5.data());
      for (std::size_t i = 0; i < m; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                              a64 * k4[i] + a65 * k5[i]);
      sys.rhs(ytmp.data(), k6.data());
      for (std::size_t i = 0; i < m; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                              b5 * k5[i] + b6 * k6[i]);
      sys.rhs(ynew.data(), k7.data());

      double err = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double y4 = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                      e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc =
            pol.ode_abs_tol +
            pol.ode_rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(ynew[i] - y4) / sc);
      }

      if (err <= 1.0) {
        t += h;
        y = ynew;
        clip(y);
      }
      const double factor =
          err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
    }
    out.states.push_back(y);
  }
  return out;
}

FixedPointReport fixed_points_lv(const TraitCatalog& cat, int x, int y,
                                 const NumericPolicy& pol) {
  if (x == y) fail(ErrorKind::InvalidArgument, "need two distinct traits");
  const double nx = equilibrium_mass(cat, x, pol);
  const double ny = equilibrium_mass(cat, y, pol);

  FixedPointReport rep;
  rep.points.push_back({0.0, 0.0});
  rep.labels.push_back("extinction");
  rep.points.push_back({nx, 0.0});
  rep.labels.push_back("x-alone");
  rep.points.push_back({0.0, ny});
  rep.labels.push_back("y-alone");

  const double det =
      cat.alpha(x, x) * cat.alpha(y, y) - cat.alpha(x, y) * cat.alpha(y, x);
  if (std::abs(det) <= pol.denom_tol)
    fail(ErrorKind::DegenerateKernel,
         "competition kernel is singular for this pair (determinant = " +
             std::to_string(det) + ")");
  const double fxy = invasion_fitness(cat, x, y, pol);
  const double fyx = invasion_fitness(cat, y, x, pol);
  const double ix = cat.alpha(y, y) * fxy / det;
  const double iy = cat.alpha(x, x) * fyx / det;
  rep.points.push_back({ix, iy});
  rep.labels.push_back("interior");
  rep.has_interior = true;
  rep.interior_admissible = ix > 0.0 && iy > 0.0;
  return rep;
}

StabilityReport classify_stability(const OdeSystem& sys,
                                   const std::vector<double>& point,
                                   const NumericPolicy& pol) {
  const auto r = sys.rhs(point);
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  if (worst > pol.fixed_point_tol) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", worst);
    fail(ErrorKind::NotAFixedPoint,
         std::string("max|rhs| = ") + buf + " exceeds the fixed-point tolerance");
  }

  StabilityReport rep;
  rep.jacobian = sys.jacobian(point);
  const std::size_t m = sys.dim();

  if (m == 1) {
    rep.eigenvalues = {rep.jacobian[0]};
  } else if (m == 2) {
    const double tr = rep.jacobian[0] + rep.jacobian[3];
    const double det = rep.jacobian[0] * rep.jacobian[3] -
                       rep.jacobian[1] * rep.jacobian[2];
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      rep.eigenvalues = {(tr + s) / 2.0, (tr - s) / 2.0};
    } else {
      const double s = std::sqrt(-disc);
      rep.eigenvalues = {{tr / 2.0, s / 2.0}, {tr / 2.0, -s / 2.0}};
    }
  } else {
    Eigen::MatrixXd J(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) J(i, j) = rep.jacobian[i * m + j];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
    for (std::size_t i = 0; i < m; ++i)
      rep.eigenvalues.push_back(solver.eigenvalues()[static_cast<Eigen::Index>(i)]);
  }

  bool all_neg = true, any_pos = false;
  for (const auto& ev : rep.eigenvalues) {
    if (!(ev.real() < -pol.eig_tol)) all_neg = false;
    if (ev.real() > pol.eig_tol) any_pos = true;
  }
  rep.classification = all_neg ? Stability::Stable
                     : any_pos ? Stability::Unstable
                               : Stability::Marginal;
  return rep;
}

} // namespace devtree
