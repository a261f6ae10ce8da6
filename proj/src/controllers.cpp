#include "dobcoord/controllers.hpp"

namespace dobcoord::controllers {

namespace {

void require_size(const Vector& v, Eigen::Index n, const char* name) {
  if (v.size() != n)
    throw DimensionError(std::string(name) + " has length " +
                         std::to_string(v.size()) + ", expected " +
                         std::to_string(n));
}

Vector coupling_term(const Vector& eta, const NeighborView& view,
                     const model::LeaderExosystem& leader) {
  const Vector own_output = leader.F0 * eta;
  Vector coupling = Vector::Zero(own_output.size());
  if (view.leader_weight != 0.0) {
    require_size(view.leader_output, own_output.size(), "leader output");
    coupling += view.leader_weight * (own_output - view.leader_output);
  }
  for (const auto& nb : view.neighbors) {
    if (nb.weight == 0.0) continue;
    require_size(nb.output, own_output.size(), "neighbor output");
    coupling += nb.weight * (own_output - nb.output);
  }
  return coupling;
}

}  // namespace

Vector leader_observer_rhs(const Vector& eta, const NeighborView& view,
                           const Matrix& L0,
                           const model::LeaderExosystem& leader) {
  require_size(eta, leader.S0.rows(), "eta");
  return leader.S0 * eta + L0 * coupling_term(eta, view, leader);
}

Vector full_information_control(const Vector& x, const Vector& d,
                                const Vector& r, const Matrix& K1,
                                const Matrix& K2, const Matrix& K3) {
  require_size(x, K1.cols(), "x");
  require_size(d, K2.cols(), "d");
  require_size(r, K3.cols(), "r");
  return K1 * x + K2 * d + K3 * r;
}

FullOrderDerivatives full_order_dob_rhs(
    const Vector& y_measured, const Vector& xi, const Vector& zeta,
    const Vector& eta, const NeighborView& view,
    const model::AgentModel& agent, const model::DisturbanceExosystem& dist,
    const synthesis::AgentGains& gains, const Matrix& L0,
    const model::LeaderExosystem& leader) {
  require_size(y_measured, agent.output_dim(), "y");
  require_size(xi, agent.state_dim(), "xi");
  require_size(zeta, agent.disturbance_dim(), "zeta");

  FullOrderDerivatives out;
  out.u = gains.K1 * xi + gains.K2 * zeta + gains.K3 * eta;
  const Vector y_hat = agent.C * xi + agent.D * out.u;
  const Vector innovation = y_measured - y_hat;
  out.xi_dot =
      agent.A * xi + agent.E * zeta + agent.B * out.u - gains.L1 * innovation;
  out.zeta_dot = dist.S * zeta - gains.L2 * innovation;
  out.eta_dot = leader_observer_rhs(eta, view, L0, leader);
  return out;
}

ReducedOrderDerivatives reduced_order_dob_rhs(
    const Vector& x, const Vector& zeta, const Vector& eta,
    const NeighborView& view, const model::AgentModel& agent,
    const model::DisturbanceExosystem& dist,
    const synthesis::AgentGains& gains, const Matrix& L0,
    const model::LeaderExosystem& leader) {
  require_size(x, agent.state_dim(), "x");
  require_size(zeta, agent.disturbance_dim(), "zeta");

  ReducedOrderDerivatives out;
  const Vector disturbance_estimate = zeta - gains.L * x;
  out.u =
      gains.K1 * x + gains.K2 * disturbance_estimate + gains.K3 * eta;
  out.zeta_dot = (dist.S + gains.L * agent.E) * zeta +
                 (gains.L * agent.A - dist.S * gains.L -
                  gains.L * agent.E * gains.L) *
                     x +
                 gains.L * agent.B * out.u;
  out.eta_dot = leader_observer_rhs(eta, view, L0, leader);
  return out;
}

}  // namespace dobcoord::controllers
