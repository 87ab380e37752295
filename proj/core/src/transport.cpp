#include "dnar/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dnar/error.hpp"
#include "ot_solvers.hpp"

namespace dnar::transport {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kFiberTolerance = 1e-10;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool same_point(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

void require_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim != nu.dim)
    fail(ErrorCode::DimensionMismatch,
         "measures live in dimensions " + std::to_string(mu.dim) + " and " + std::to_string(nu.dim));
}

// Duplicate-merged measure together with the original atoms behind each
// merged atom.
struct Merged {
  DiscreteMeasure measure;
  std::vector<std::vector<std::size_t>> members;
};

Merged merge_with_members(const DiscreteMeasure& mu) {
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return lex_less(mu.point(i), mu.point(j)); });
  Merged out;
  out.measure.dim = mu.dim;
  for (std::size_t idx : order) {
    if (!out.members.empty() && same_point(mu.point(out.members.back().front()), mu.point(idx))) {
      out.members.back().push_back(idx);
      out.measure.weights.back() += mu.weights[idx];
      continue;
    }
    out.members.push_back({idx});
    const auto p = mu.point(idx);
    out.measure.points.insert(out.measure.points.end(), p.begin(), p.end());
    out.measure.weights.push_back(mu.weights[idx]);
  }
  return out;
}

// Splits each merged plan entry over the original duplicate atoms in
// proportion to their weights, so marginals match the caller's measures.
Coupling expand_plan(const Coupling& plan, const Merged& a, const DiscreteMeasure& mu, const Merged& b,
                     const DiscreteMeasure& nu) {
  Coupling out;
  for (const CouplingEntry& e : plan.entries) {
    const auto& ra = a.members[e.row];
    const auto& rb = b.members[e.col];
    if (ra.size() == 1 && rb.size() == 1) {
      out.entries.push_back({ra.front(), rb.front(), e.mass});
      continue;
    }
    for (std::size_t i : ra)
      for (std::size_t j : rb)
        out.entries.push_back({i, j, e.mass * (mu.weights[i] / a.measure.weights[e.row]) *
                                         (nu.weights[j] / b.measure.weights[e.col])});
  }
  return out;
}

// North-west corner rule on sorted 1D supports: the monotone coupling, which
// is optimal for any cost that is a convex function of x - y.
TransportResult monotone_1d(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            const std::function<double(double, double)>& cost) {
  // merge_with_members already sorted both supports.
  TransportResult res;
  res.certificate.method = "monotone_1d";
  std::size_t i = 0, j = 0;
  double ra = a.weights[0], rb = b.weights[0];
  double total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    if (m > 0.0) {
      res.plan.entries.push_back({i, j, m});
      total += m * cost(a.points[i], b.points[j]);
    }
    ra -= m;
    rb -= m;
    if (ra <= rb) {
      if (++i < a.size()) ra = a.weights[i];
    } else {
      if (++j < b.size()) rb = b.weights[j];
    }
  }
  res.cost = total;
  res.certificate.primal = total;
  res.certificate.dual = total;
  return res;
}

std::vector<double> cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                const std::function<double(double)>& of_sq_dist) {
  std::vector<double> c(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i * b.size() + j] = of_sq_dist(sq_dist(a.point(i), b.point(j)));
  return c;
}

bool is_uniform(std::span<const double> w) {
  return std::all_of(w.begin(), w.end(), [&](double z) { return z == w.front(); });
}

double support_diameter_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const auto [amin, amax] = std::minmax_element(a.points.begin(), a.points.end());
  const auto [bmin, bmax] = std::minmax_element(b.points.begin(), b.points.end());
  return std::max(*amax, *bmax) - std::min(*amin, *bmin);
}

}  // namespace

void DiscreteMeasure::validate() const {
  require(dim >= 1, "measure dimension must be >= 1");
  require(!weights.empty(), "measure must have at least one atom");
  require(points.size() == weights.size() * static_cast<std::size_t>(dim), "measure points must be n x dim");
  require(std::all_of(points.begin(), points.end(), [](double z) { return std::isfinite(z); }),
          "measure points must be finite");
  require(std::all_of(weights.begin(), weights.end(), [](double z) { return std::isfinite(z) && z > 0.0; }),
          "measure weights must be positive");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(std::abs(total - 1.0) <= kMassTolerance, "measure weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::uniform(int dim, std::vector<double> points) {
  require(dim >= 1 && !points.empty() && points.size() % dim == 0, "uniform measure needs n x dim points");
  const std::size_t n = points.size() / dim;
  return DiscreteMeasure{dim, std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

DiscreteMeasure DiscreteMeasure::dirac(std::vector<double> point) {
  const int d = static_cast<int>(point.size());
  return DiscreteMeasure{d, std::move(point), {1.0}};
}

void FiberedMeasure::validate() const {
  require(x_dim >= 1 && omega_dim >= 1, "fibered measure dimensions must be >= 1");
  require(!fibers.empty(), "fibered measure needs at least one fibre");
  double total = 0.0;
  for (std::size_t k = 0; k < fibers.size(); ++k) {
    const Fiber& f = fibers[k];
    require(f.omega.size() == static_cast<std::size_t>(omega_dim), "fibre omega has wrong dimension");
    require(std::isfinite(f.mass) && f.mass > 0.0, "fibre mass must be positive");
    require(f.conditional.dim == x_dim, "fibre conditional has wrong dimension");
    f.conditional.validate();
    for (std::size_t l = 0; l < k; ++l)
      require(fibers[l].omega != f.omega, "fibres must carry distinct omega values");
    total += f.mass;
  }
  require(std::abs(total - 1.0) <= kMassTolerance, "fibre masses must sum to 1");
}

DiscreteMeasure FiberedMeasure::flatten() const {
  DiscreteMeasure out;
  out.dim = x_dim + omega_dim;
  for (const Fiber& f : fibers) {
    for (std::size_t i = 0; i < f.conditional.size(); ++i) {
      const auto p = f.conditional.point(i);
      out.points.insert(out.points.end(), p.begin(), p.end());
      out.points.insert(out.points.end(), f.omega.begin(), f.omega.end());
      out.weights.push_back(f.mass * f.conditional.weights[i]);
    }
  }
  return out;
}

DiscreteMeasure FiberedMeasure::omega_marginal() const {
  DiscreteMeasure out;
  out.dim = omega_dim;
  for (const Fiber& f : fibers) {
    out.points.insert(out.points.end(), f.omega.begin(), f.omega.end());
    out.weights.push_back(f.mass);
  }
  return out;
}

std::vector<double> Coupling::row_sums(std::size_t rows) const {
  std::vector<double> s(rows, 0.0);
  for (const auto& e : entries) s.at(e.row) += e.mass;
  return s;
}

std::vector<double> Coupling::col_sums(std::size_t cols) const {
  std::vector<double> s(cols, 0.0);
  for (const auto& e : entries) s.at(e.col) += e.mass;
  return s;
}

TransportResult solve_transport(std::span<const double> a, std::span<const double> b,
                                std::span<const double> cost) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  require(n >= 1 && m >= 1 && cost.size() == n * m, "transport problem needs an n x m cost matrix");
  require(std::all_of(cost.begin(), cost.end(), [](double c) { return std::isfinite(c) && c >= 0.0; }),
          "transport costs must be finite and nonnegative");

  TransportResult res;
  Certificate& cert = res.certificate;
  cert.available = true;

  if (n == m && is_uniform(a) && is_uniform(b) && a.front() == b.front()) {
    const auto sol = detail::solve_assignment(cost, n);
    double sum = 0.0, dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += cost[i * n + sol.col_of_row[i]];
      dual += sol.u[i] + sol.v[i];
      res.plan.entries.push_back({i, sol.col_of_row[i], a[i]});
    }
    cert.method = "assignment";
    res.cost = sum / static_cast<double>(n);
    cert.primal = res.cost;
    cert.dual = dual / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cert.max_dual_violation = std::max(cert.max_dual_violation, sol.u[i] + sol.v[j] - cost[i * n + j]);
    return res;
  }

  const auto sol = detail::solve_min_cost_flow(a, b, cost);
  cert.method = "successive_shortest_paths";
  double primal = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double f = sol.flow[i * m + j];
      if (f > 0.0) {
        res.plan.entries.push_back({i, j, f});
        primal += f * cost[i * m + j];
      }
      cert.max_dual_violation = std::max(cert.max_dual_violation, sol.f[i] + sol.g[j] - cost[i * m + j]);
    }
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) dual += a[i] * sol.f[i];
  for (std::size_t j = 0; j < m; ++j) dual += b[j] * sol.g[j];
  res.cost = primal;
  cert.primal = primal;
  cert.dual = dual;
  return res;
}

DistanceResult w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu, nu);
  mu.validate();
  nu.validate();
  const Merged a = merge_with_members(mu);
  const Merged b = merge_with_members(nu);

  TransportResult t;
  if (mu.dim == 1) {
    t = monotone_1d(a.measure, b.measure, [](double x, double y) { return (x - y) * (x - y); });
  } else {
    const auto c = cost_matrix(a.measure, b.measure, [](double s) { return s; });
    t = solve_transport(a.measure.weights, b.measure.weights, c);
  }
  t.plan = expand_plan(t.plan, a, mu, b, nu);
  DistanceResult out;
  out.squared = std::max(0.0, t.cost);
  out.distance = std::sqrt(out.squared);
  out.transport = std::move(t);
  return out;
}

DistanceResult w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::optional<double> cost_cap) {
  require_same_dim(mu, nu);
  mu.validate();
  nu.validate();
  if (cost_cap) require(*cost_cap > 0.0, "W1 cost cap must be positive");
  const Merged a = merge_with_members(mu);
  const Merged b = merge_with_members(nu);

  TransportResult t;
  if (mu.dim == 1 && (!cost_cap || support_diameter_1d(a.measure, b.measure) <= *cost_cap)) {
    t = monotone_1d(a.measure, b.measure, [](double x, double y) { return std::abs(x - y); });
  } else {
    const double cap = cost_cap.value_or(std::numeric_limits<double>::infinity());
    const auto c = cost_matrix(a.measure, b.measure, [cap](double s) { return std::min(std::sqrt(s), cap); });
    t = solve_transport(a.measure.weights, b.measure.weights, c);
  }
  t.plan = expand_plan(t.plan, a, mu, b, nu);
  DistanceResult out;
  out.distance = std::max(0.0, t.cost);
  out.squared = out.distance * out.distance;
  out.transport = std::move(t);
  return out;
}

double dbl(const DiscreteMeasure& mu, const DiscreteMeasure& nu) { return w1(mu, nu, 2.0).distance; }

double dbl_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu, nu);
  mu.validate();
  nu.validate();
  // Union support with signed mass s = mu - nu.
  DiscreteMeasure joint;
  joint.dim = mu.dim;
  joint.points = mu.points;
  joint.points.insert(joint.points.end(), nu.points.begin(), nu.points.end());
  std::vector<double> sign(mu.size(), 1.0);
  sign.resize(mu.size() + nu.size(), -1.0);
  joint.weights = mu.weights;
  joint.weights.insert(joint.weights.end(), nu.weights.begin(), nu.weights.end());
  const Merged merged = merge_with_members(joint);
  const std::size_t k = merged.measure.size();
  require(k <= kMaxDblLpAtoms, "dbl_lp: union support exceeds " + std::to_string(kMaxDblLpAtoms) + " atoms");

  std::vector<double> s(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t idx : merged.members[i]) s[i] += sign[idx] * joint.weights[idx];

  // Variables psi = phi + 1 in [0, 2]; rows: psi_i <= 2, psi_i - psi_j <= |p_i - p_j|.
  const std::size_t rows = k + k * (k - 1);
  std::vector<double> A(rows * k, 0.0), rhs(rows, 0.0);
  std::size_t r = 0;
  for (std::size_t i = 0; i < k; ++i, ++r) {
    A[r * k + i] = 1.0;
    rhs[r] = 2.0;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      A[r * k + i] = 1.0;
      A[r * k + j] = -1.0;
      rhs[r] = std::sqrt(sq_dist(merged.measure.point(i), merged.measure.point(j)));
      ++r;
    }
  const auto sol = detail::solve_lp_max(s, A, rhs, rows, k);
  const double shift = std::accumulate(s.begin(), s.end(), 0.0);
  return std::max(0.0, sol.value - shift);
}

double fibered_w2(const FiberedMeasure& a, const FiberedMeasure& b) {
  a.validate();
  b.validate();
  if (a.x_dim != b.x_dim || a.omega_dim != b.omega_dim)
    fail(ErrorCode::DimensionMismatch, "fibered measures have different dimensions");
  if (a.fibers.size() != b.fibers.size())
    fail(ErrorCode::MarginalMismatch, "omega-marginals differ in the number of fibres");

  double total = 0.0;
  std::vector<char> used(b.fibers.size(), 0);
  for (const Fiber& fa : a.fibers) {
    std::size_t match = b.fibers.size();
    for (std::size_t l = 0; l < b.fibers.size(); ++l) {
      if (used[l]) continue;
      double gap = 0.0;
      for (int c = 0; c < a.omega_dim; ++c) gap = std::max(gap, std::abs(fa.omega[c] - b.fibers[l].omega[c]));
      if (gap <= kFiberTolerance) {
        match = l;
        break;
      }
    }
    if (match == b.fibers.size() || std::abs(fa.mass - b.fibers[match].mass) > kFiberTolerance)
      fail(ErrorCode::MarginalMismatch, "omega-marginals differ; mass cannot move between fibres");
    used[match] = 1;
    total += fa.mass * w2(fa.conditional, b.fibers[match].conditional).squared;
  }
  return std::sqrt(total);
}

double adapted_w2(const FiberedMeasure& a, const FiberedMeasure& b) {
  a.validate();
  b.validate();
  if (a.x_dim != b.x_dim || a.omega_dim != b.omega_dim)
    fail(ErrorCode::DimensionMismatch, "fibered measures have different dimensions");
  const std::size_t n = a.fibers.size();
  const std::size_t m = b.fibers.size();
  std::vector<double> cost(n * m);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < m; ++l)
      cost[k * m + l] = w2(a.fibers[k].conditional, b.fibers[l].conditional).squared +
                        sq_dist(a.fibers[k].omega, b.fibers[l].omega);
  std::vector<double> ma(n), mb(m);
  for (std::size_t k = 0; k < n; ++k) ma[k] = a.fibers[k].mass;
  for (std::size_t l = 0; l < m; ++l) mb[l] = b.fibers[l].mass;
  return std::sqrt(std::max(0.0, solve_transport(ma, mb, cost).cost));
}

DiscreteMeasure empirical_positions(const particle::Ensemble& ens) {
  ens.validate();
  return DiscreteMeasure::uniform(ens.dim, ens.x);
}

DiscreteMeasure empirical_phase(const particle::Ensemble& ens, bool use_velocity) {
  ens.validate();
  const int d = ens.dim;
  const std::vector<double>& second = use_velocity ? ens.v : ens.omega;
  std::vector<double> pts;
  pts.reserve(2 * ens.x.size());
  for (int i = 0; i < ens.count; ++i) {
    pts.insert(pts.end(), ens.x.begin() + i * d, ens.x.begin() + (i + 1) * d);
    pts.insert(pts.end(), second.begin() + i * d, second.begin() + (i + 1) * d);
  }
  return DiscreteMeasure::uniform(2 * d, std::move(pts));
}

FiberedMeasure empirical_fibered(const particle::Ensemble& ens) {
  ens.validate();
  const int d = ens.dim;
  std::vector<int> order(ens.count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return lex_less(ens.desired(i), ens.desired(j)); });

  FiberedMeasure out;
  out.x_dim = d;
  out.omega_dim = d;
  std::vector<std::vector<int>> groups;
  for (int i : order) {
    if (!groups.empty() && same_point(ens.desired(groups.back().front()), ens.desired(i))) {
      groups.back().push_back(i);
    } else {
      groups.push_back({i});
    }
  }
  for (const auto& g : groups) {
    Fiber f;
    const auto om = ens.desired(g.front());
    f.omega.assign(om.begin(), om.end());
    f.mass = static_cast<double>(g.size()) / static_cast<double>(ens.count);
    std::vector<double> pts;
    for (int i : g) pts.insert(pts.end(), ens.x.begin() + i * d, ens.x.begin() + (i + 1) * d);
    f.conditional = DiscreteMeasure::uniform(d, std::move(pts));
    out.fibers.push_back(std::move(f));
  }
  return out;
}

std::variant<DiscreteMeasure, FiberedMeasure> empirical_from_ensemble(const particle::Ensemble& ens,
                                                                      EmpiricalMode mode, bool use_velocity) {
  switch (mode) {
    case EmpiricalMode::Position: return empirical_positions(ens);
    case EmpiricalMode::Phase: return empirical_phase(ens, use_velocity);
    case EmpiricalMode::Fibered: return empirical_fibered(ens);
  }
  fail(ErrorCode::InvalidArgument, "unknown empirical mode");
}

std::vector<double> Moments::total_momentum() const {
  std::vector<double> s(omega_dim, 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (int c = 0; c < omega_dim; ++c) s[c] += momentum[i * omega_dim + c];
  return s;
}

double Moments::max_abs_pressure() const {
  double best = 0.0;
  for (double p : pressure) best = std::max(best, std::abs(p));
  return best;
}

Moments moments(const FiberedMeasure& mu) {
  mu.validate();
  const int q = mu.omega_dim;
  struct Acc {
    double mass = 0.0;
    std::vector<double> m1;
    std::vector<std::pair<double, std::vector<double>>> atoms;  // (mass, omega)
  };
  auto cmp = [](const std::vector<double>& a, const std::vector<double>& b) { return lex_less(a, b); };
  std::map<std::vector<double>, Acc, decltype(cmp)> by_x(cmp);
  for (const Fiber& f : mu.fibers) {
    for (std::size_t i = 0; i < f.conditional.size(); ++i) {
      const auto p = f.conditional.point(i);
      Acc& acc = by_x[std::vector<double>(p.begin(), p.end())];
      if (acc.m1.empty()) acc.m1.assign(q, 0.0);
      const double m = f.mass * f.conditional.weights[i];
      acc.mass += m;
      for (int c = 0; c < q; ++c) acc.m1[c] += m * f.omega[c];
      acc.atoms.emplace_back(m, f.omega);
    }
  }
  Moments out;
  out.omega_dim = q;
  out.rho.dim = mu.x_dim;
  for (const auto& [x, acc] : by_x) {
    out.rho.points.insert(out.rho.points.end(), x.begin(), x.end());
    out.rho.weights.push_back(acc.mass);
    out.momentum.insert(out.momentum.end(), acc.m1.begin(), acc.m1.end());
    std::vector<double> wbar(q);
    for (int c = 0; c < q; ++c) wbar[c] = acc.m1[c] / acc.mass;
    std::vector<double> pi(static_cast<std::size_t>(q) * q, 0.0);
    for (const auto& [m, om] : acc.atoms)
      for (int r = 0; r < q; ++r)
        for (int c = 0; c < q; ++c) pi[r * q + c] += m * (om[r] - wbar[r]) * om[c];
    out.pressure.insert(out.pressure.end(), pi.begin(), pi.end());
  }
  return out;
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, int out_dim,
                            const std::function<void(std::span<const double>, std::span<double>)>& map) {
  require(out_dim >= 1, "pushforward target dimension must be >= 1");
  DiscreteMeasure out;
  out.dim = out_dim;
  out.weights = mu.weights;
  out.points.resize(mu.size() * out_dim);
  for (std::size_t i = 0; i < mu.size(); ++i)
    map(mu.point(i), std::span<double>(out.points.data() + i * out_dim, out_dim));
  return out;
}

DiscreteMeasure merge_duplicates(const DiscreteMeasure& mu) { return merge_with_members(mu).measure; }

DiscreteMeasure grid_to_measure(const hydro::GridField1D& field) {
  require(field.cells() >= 1, "grid field has no cells");
  require(std::all_of(field.rho.begin(), field.rho.end(), [](double r) { return r >= 0.0; }),
          "grid density must be nonnegative");
  const double dx = field.dx();
  double total = 0.0;
  for (double r : field.rho) total += r * dx;
  if (!(total > 0.0) || !std::isfinite(total)) fail(ErrorCode::NonNormalizable, "grid field has no mass");
  DiscreteMeasure out;
  out.dim = 1;
  for (int i = 0; i < field.cells(); ++i) {
    const double m = field.rho[i] * dx / total;
    if (m <= 0.0) continue;
    out.points.push_back(field.center(i));
    out.weights.push_back(m);
  }
  return out;
}

Coarsened coarsen_1d(const DiscreteMeasure& mu, std::size_t max_atoms) {
  require(mu.dim == 1, "coarsen_1d needs a 1D measure");
  require(max_atoms >= 1, "coarsen_1d needs max_atoms >= 1");
  const DiscreteMeasure sorted = merge_duplicates(mu);
  if (sorted.size() <= max_atoms) return {sorted, 0.0};

  const std::size_t group = (sorted.size() + max_atoms - 1) / max_atoms;
  Coarsened out;
  out.measure.dim = 1;
  for (std::size_t start = 0; start < sorted.size(); start += group) {
    const std::size_t end = std::min(sorted.size(), start + group);
    double m = 0.0, first = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      m += sorted.weights[k];
      first += sorted.weights[k] * sorted.points[k];
    }
    const double bary = first / m;
    for (std::size_t k = start; k < end; ++k)
      out.error_bound = std::max(out.error_bound, std::abs(sorted.points[k] - bary));
    out.measure.points.push_back(bary);
    out.measure.weights.push_back(m);
  }
  return out;
}

}  // namespace dnar::transport
