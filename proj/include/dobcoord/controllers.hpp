#pragma once

#include <vector>

#include "dobcoord/model.hpp"
#include "dobcoord/synthesis.hpp"

namespace dobcoord::controllers {

using matops::Matrix;
using matops::Vector;

/// What agent i sees of the observer network at one instant: weighted
/// output-level estimates of its neighbors plus the leader's measured
/// output when the agent is wired to the leader. The observer never reads
/// the leader's state vector, only y0.
struct NeighborView {
  struct Neighbor {
    double weight = 0.0;  // a_ij(t)
    Vector output;        // F0 * eta_j
  };
  std::vector<Neighbor> neighbors;
  double leader_weight = 0.0;  // a_i0(t)
  Vector leader_output;        // y0 = F0 r
};

/// Distributed leader-observer derivative:
///   eta' = S0 eta + L0 * sum_j a_ij (F0 eta - out_j).
Vector leader_observer_rhs(const Vector& eta, const NeighborView& view,
                           const Matrix& L0,
                           const model::LeaderExosystem& leader);

/// Baseline law with the true signals: u = K1 x + K2 d + K3 r.
Vector full_information_control(const Vector& x, const Vector& d,
                                const Vector& r, const Matrix& K1,
                                const Matrix& K2, const Matrix& K3);

struct FullOrderDerivatives {
  Vector u;
  Vector xi_dot;
  Vector zeta_dot;
  Vector eta_dot;
};

/// Output-feedback DOB law. Evaluation order: u from the current estimates,
/// then the predicted output y_hat = C xi + D u, then the derivatives with
/// innovation y - y_hat. The measured output is the only plant signal read.
FullOrderDerivatives full_order_dob_rhs(
    const Vector& y_measured, const Vector& xi, const Vector& zeta,
    const Vector& eta, const NeighborView& view,
    const model::AgentModel& agent, const model::DisturbanceExosystem& dist,
    const synthesis::AgentGains& gains, const Matrix& L0,
    const model::LeaderExosystem& leader);

struct ReducedOrderDerivatives {
  Vector u;
  Vector zeta_dot;
  Vector eta_dot;
};

/// State-feedback DOB law with the reduced-order disturbance observer.
/// Evaluation order: disturbance estimate zeta - L x, then u, then zeta'.
ReducedOrderDerivatives reduced_order_dob_rhs(
    const Vector& x, const Vector& zeta, const Vector& eta,
    const NeighborView& view, const model::AgentModel& agent,
    const model::DisturbanceExosystem& dist,
    const synthesis::AgentGains& gains, const Matrix& L0,
    const model::LeaderExosystem& leader);

}  // namespace dobcoord::controllers
