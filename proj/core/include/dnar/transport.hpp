#pragma once

// Discrete measures and optimal-transport distances between them: exact W2
// and W1 (optionally with truncated ground cost), the bounded-Lipschitz
// distance, the fibered distance W_{2,nu} and the adapted (nested) distance
// AW2.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dnar/grid_field.hpp"
#include "dnar/particle.hpp"

namespace dnar::transport {

/// Weighted atoms in R^m; points are row-major n x m.
struct DiscreteMeasure {
  int dim = 1;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  /// Throws InvalidArgument unless weights > 0, sum to 1 within 1e-12, and all
  /// points are finite.
  void validate() const;

  static DiscreteMeasure uniform(int dim, std::vector<double> points);
  static DiscreteMeasure dirac(std::vector<double> point);
};

struct Fiber {
  std::vector<double> omega;
  double mass = 0.0;
  DiscreteMeasure conditional;  // probability measure over x
};

/// Disintegration of a measure on (x, omega) along its omega-marginal.
struct FiberedMeasure {
  int x_dim = 1;
  int omega_dim = 1;
  std::vector<Fiber> fibers;

  /// Distinct omegas, positive masses summing to 1, valid conditionals.
  void validate() const;
  /// The joint measure on R^{x_dim + omega_dim}, atoms (x, omega).
  DiscreteMeasure flatten() const;
  /// The omega-marginal nu.
  DiscreteMeasure omega_marginal() const;
};

struct CouplingEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double mass = 0.0;
};

/// Sparse transport plan; rows index the first measure, columns the second.
struct Coupling {
  std::vector<CouplingEntry> entries;

  std::vector<double> row_sums(std::size_t rows) const;
  std::vector<double> col_sums(std::size_t cols) const;
};

/// LP optimality certificate from the dual potentials (f, g) returned by the
/// solver: dual feasibility f_i + g_j <= c_ij and the primal-dual gap.
struct Certificate {
  std::string method;
  double primal = 0.0;
  double dual = 0.0;
  double max_dual_violation = 0.0;
  bool available = false;

  double gap() const { return primal - dual; }
};

struct TransportResult {
  double cost = 0.0;
  Coupling plan;
  Certificate certificate;
};

/// Exact discrete optimal transport between weight vectors a (n) and b (m)
/// for the dense row-major cost matrix (n x m). Equal-size uniform problems go
/// to the assignment solver, everything else to successive shortest paths.
TransportResult solve_transport(std::span<const double> a, std::span<const double> b,
                                std::span<const double> cost);

struct DistanceResult {
  double distance = 0.0;
  double squared = 0.0;  // distance^2; for W2 this is the optimal quadratic cost
  TransportResult transport;
};

DistanceResult w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
DistanceResult w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  std::optional<double> cost_cap = std::nullopt);

/// Bounded-Lipschitz distance, computed as W1 with ground cost min(|x-y|, 2).
double dbl(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Bounded-Lipschitz distance from the direct dual LP over test-function
/// values on the union support. Cross-check path; union support limited to
/// kMaxDblLpAtoms atoms.
double dbl_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
inline constexpr std::size_t kMaxDblLpAtoms = 64;

/// (sum over fibers of mass * W2^2(A^omega, B^omega))^{1/2}; throws
/// MarginalMismatch unless both measures carry the same (omega, mass) pairs
/// within 1e-10.
double fibered_w2(const FiberedMeasure& a, const FiberedMeasure& b);

/// Nested distance: outer OT over fibre pairs with cost
/// W2^2(A^omega, B^omega') + |omega - omega'|^2.
double adapted_w2(const FiberedMeasure& a, const FiberedMeasure& b);

enum class EmpiricalMode { Position, Phase, Fibered };

/// Uniform 1/N atoms. Phase mode pairs x with omega (or with v when
/// use_velocity is set, for alignment ensembles); Fibered groups equal omegas.
std::variant<DiscreteMeasure, FiberedMeasure> empirical_from_ensemble(const particle::Ensemble& ens,
                                                                      EmpiricalMode mode,
                                                                      bool use_velocity = false);
DiscreteMeasure empirical_positions(const particle::Ensemble& ens);
DiscreteMeasure empirical_phase(const particle::Ensemble& ens, bool use_velocity = false);
FiberedMeasure empirical_fibered(const particle::Ensemble& ens);

/// omega-moments of a fibered measure at each distinct x location.
struct Moments {
  DiscreteMeasure rho;                  // x-marginal
  std::vector<double> momentum;         // rho*w per atom, row-major size() x omega_dim
  std::vector<double> pressure;         // Pi per atom, row-major size() x omega_dim^2
  int omega_dim = 1;

  std::vector<double> total_momentum() const;
  double max_abs_pressure() const;
};

Moments moments(const FiberedMeasure& mu);

/// Image measure under `map`, which sends a point of R^dim to R^out_dim.
DiscreteMeasure pushforward(const DiscreteMeasure& mu, int out_dim,
                            const std::function<void(std::span<const double>, std::span<double>)>& map);

/// Exact duplicate points merged, weights summed; result sorted lexicographically.
DiscreteMeasure merge_duplicates(const DiscreteMeasure& mu);

/// One atom per cell with positive mass at the cell centre, weight = normalised
/// cell mass. Throws NonNormalizable when the total mass is <= 0.
DiscreteMeasure grid_to_measure(const hydro::GridField1D& field);

struct Coarsened {
  DiscreteMeasure measure;
  double error_bound = 0.0;  // max distance an atom moved; bounds the dbl and W1 change
};

/// Mass-conserving merge of consecutive atoms of a 1D measure (sorted by
/// position) into at most max_atoms groups, each replaced by its barycentre.
Coarsened coarsen_1d(const DiscreteMeasure& mu, std::size_t max_atoms);

}  // namespace dnar::transport
