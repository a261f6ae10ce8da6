#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dobcoord/controllers.hpp"
#include "dobcoord/graph.hpp"
#include "dobcoord/model.hpp"
#include "dobcoord/synthesis.hpp"

namespace dobcoord::sim {

using matops::Matrix;
using matops::Vector;

enum class ControlLaw { FullInformation, FullOrder, ReducedOrder };

std::string to_string(ControlLaw law);
ControlLaw law_from_string(const std::string& name);

/// Offsets of every state block inside the stacked closed-loop vector.
/// Order: x_1..x_N, d_1..d_N, r, then per law xi_1..xi_N, zeta_1..zeta_N,
/// eta_1..eta_N (full-order) or zeta/eta only (reduced-order).
struct StateLayout {
  struct Block {
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
  };
  std::vector<Block> x, d, xi, zeta, eta;
  Block r;
  Eigen::Index total = 0;
};

/// Explicit initial conditions. Controller states default to the origin;
/// the optional vectors exist so estimator states can be initialized
/// exactly (e.g. for equivalence experiments).
struct InitialConditions {
  std::vector<Vector> x;
  std::vector<Vector> xi, zeta, eta;  // empty => zeros
};

/// The assembled switched closed loop: plants, exosystems, controllers, and
/// the observer network. Immutable after construction; the only time
/// dependence of the vector field is the active graph's weights.
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(std::vector<model::AgentModel> agents,
                   std::vector<model::DisturbanceExosystem> disturbances,
                   model::LeaderExosystem leader,
                   graph::SwitchingSchedule schedule, synthesis::GainSet gains,
                   ControlLaw law);

  int followers() const { return static_cast<int>(agents_.size()); }
  ControlLaw law() const { return law_; }
  const StateLayout& layout() const { return layout_; }
  const graph::SwitchingSchedule& schedule() const { return schedule_; }
  const std::vector<model::AgentModel>& agents() const { return agents_; }
  const std::vector<model::DisturbanceExosystem>& disturbances() const {
    return disturbances_;
  }
  const model::LeaderExosystem& leader() const { return leader_; }
  const synthesis::GainSet& gains() const { return gains_; }
  Eigen::Index output_dim() const { return leader_.F0.rows(); }

  Vector initial_state(const InitialConditions& init) const;

  /// Control input of agent i evaluated on the stacked state.
  Vector control(const Vector& z, std::size_t i) const;

  /// Vector field under a fixed graph (the integrator resolves sigma(t)).
  void rhs(const graph::CommGraph& active, const Vector& z, Vector& dz) const;

  /// Stacked outputs [y0, y_1, ..., y_N].
  Vector outputs(const Vector& z) const;

  /// Stacked tracking errors [e_1, ..., e_N], e_i = y_i - y0.
  Vector errors(const Vector& z) const;

 private:
  std::vector<model::AgentModel> agents_;
  std::vector<model::DisturbanceExosystem> disturbances_;
  model::LeaderExosystem leader_;
  graph::SwitchingSchedule schedule_;
  synthesis::GainSet gains_;
  ControlLaw law_;
  StateLayout layout_;
};

struct Trajectory {
  std::vector<double> times;
  Matrix states;   // samples x total state dimension
  Matrix outputs;  // samples x (N+1)*l, columns [y0, y_1..y_N]
  Matrix errors;   // samples x N*l
};

// Integration aborts once the state max-norm exceeds this bound.
inline constexpr double kDivergenceBound = 1e9;

/// Classical fixed-step RK4 with steps truncated so that every switching
/// instant is a step boundary; every step is recorded.
Trajectory integrate(const ClosedLoopSystem& sys, const Vector& z0,
                     double t_end, double h);

/// Per-agent max of |e_i| (all components) over samples with t >= T.
Vector max_error_after(const Trajectory& traj, double T,
                       Eigen::Index output_dim = 1);

/// Per-agent earliest time after which |e_i| stays within tol;
/// std::nullopt when the final sample still violates it.
std::vector<std::optional<double>> convergence_time(const Trajectory& traj,
                                                    double tol,
                                                    Eigen::Index output_dim = 1);

struct ObserverErrorNorms {
  Matrix state;        // samples x N, |xi - x| (full-order law only, else 0x0)
  Matrix disturbance;  // samples x N, |zeta - d| or |zeta - L x - d|
  Matrix reference;    // samples x N, |eta - r|
};

ObserverErrorNorms observer_error_norms(const Trajectory& traj,
                                        const ClosedLoopSystem& sys);

struct CsvOptions {
  std::optional<std::uint64_t> seed;  // recorded as a header comment
  int every = 1;                      // write every k-th sample
  bool observer_norms = false;        // append observer error norm columns
};

void write_csv(const Trajectory& traj, const ClosedLoopSystem& sys,
               std::ostream& os, const CsvOptions& options = {});

}  // namespace dobcoord::sim
