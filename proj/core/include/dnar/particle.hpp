#pragma once

// Microscopic dynamics: the first-order DNAR particle system
//   x_i' = v_i,  omega_i' = 0,  v_i = omega_i - (1/N) sum_j grad K(x_i - x_j)
// and the second-order alignment system
//   x_i' = v_i,  v_i' = (1/N) sum_{j != i} Psi(x_i - x_j) (v_j - v_i).

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dnar/kernel.hpp"

namespace dnar::particle {

/// N agents in R^d. Arrays are row-major N x d.
struct Ensemble {
  int dim = 1;
  int count = 0;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> omega;
  double t = 0.0;

  Ensemble() = default;
  Ensemble(int dim, int count);

  std::span<const double> pos(int i) const { return {x.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> pos(int i) { return {x.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> vel(int i) const { return {v.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> vel(int i) { return {v.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> desired(int i) const {
    return {omega.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> desired(int i) { return {omega.data() + i * dim, static_cast<std::size_t>(dim)}; }

  void validate() const;
};

enum class Scheme { ForwardEuler, RK4 };

struct IntegratorConfig {
  Scheme scheme = Scheme::RK4;
  double dt = 1e-3;
  double t_final = 1.0;
  int record_every = 1;

  void validate() const;
  /// Number of steps, round(t_final/dt); the last step is shortened or
  /// lengthened by at most dt/2 so the run ends exactly at t_final.
  long steps() const;
};

struct Frame {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> omega;
};

/// Recorded states; frames[0] is the initial state and the final time is
/// always recorded.
struct Trajectory {
  int dim = 1;
  int count = 0;
  std::vector<Frame> frames;

  Ensemble ensemble_at(std::size_t frame) const;
};

std::vector<double> dnar_velocity(const Ensemble& ens, const kernel::KernelSpec& k);
std::vector<double> cs_rhs(const Ensemble& ens, const kernel::MatrixWeightSpec& psi);

/// Generic first-order flow x' = f(x); used for DNAR on free space and on the
/// torus. f writes N x d velocities for the given positions.
using VelocityField = std::function<void(std::span<const double> x, std::span<double> v_out)>;
/// Generic alignment flow v' = a(x, v).
using AccelerationField =
    std::function<void(std::span<const double> x, std::span<const double> v, std::span<double> a_out)>;

Trajectory integrate_first_order(const Ensemble& ens0, const VelocityField& f, const IntegratorConfig& cfg);
Trajectory integrate_second_order(const Ensemble& ens0, const AccelerationField& a,
                                  const IntegratorConfig& cfg);

Trajectory integrate_dnar(const Ensemble& ens0, const kernel::KernelSpec& k, const IntegratorConfig& cfg);
Trajectory integrate_cs(const Ensemble& ens0, const kernel::MatrixWeightSpec& psi,
                        const IntegratorConfig& cfg);

struct EquivalenceReport {
  double max_position_gap = 0.0;
  double max_velocity_gap = 0.0;
  double max_gap() const { return max_position_gap > max_velocity_gap ? max_position_gap : max_velocity_gap; }
};

/// Runs DNAR from ens0 and the alignment system from (x0, v0 = dnar_velocity(ens0))
/// with Psi = Hess K, and reports sup over recorded times and particles of the
/// Euclidean position and velocity gaps.
EquivalenceReport equivalence_check(const Ensemble& ens0, const kernel::KernelSpec& k,
                                    const IntegratorConfig& cfg);

struct Diagnostics {
  std::vector<double> t;
  std::vector<double> kinetic_energy;           // (1/2N) sum |v_i|^2
  std::vector<std::vector<double>> momentum;    // (1/N) sum v_i
  std::vector<double> velocity_diameter;        // max_ij |v_i - v_j|
  std::vector<double> position_diameter;        // max_ij |x_i - x_j|
  std::vector<std::vector<double>> center_of_mass;
};

Diagnostics diagnostics(const Trajectory& traj);

// Initial-state sampling. Each helper fills the requested array of an
// ensemble from an explicitly seeded generator.
enum class Layout { UniformBox, Gaussian, Lattice };

/// Fills `out` (N x d) with samples; UniformBox draws from [center-scale, center+scale]^d,
/// Gaussian from N(center, scale^2 I), Lattice places a regular grid spanning the box.
void sample(std::vector<double>& out, int count, int dim, Layout layout, double center, double scale,
            std::uint64_t seed);

/// Subtracts the per-coordinate mean so (1/N) sum out_i = 0.
void remove_mean(std::vector<double>& values, int count, int dim);

}  // namespace dnar::particle
