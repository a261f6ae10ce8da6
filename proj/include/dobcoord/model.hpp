#pragma once

#include <span>
#include <string>
#include <vector>

#include "dobcoord/matops.hpp"

namespace dobcoord::model {

/// One follower's state-space data:
///   x' = A x + B u + E d,   y = C x + D u.
struct AgentModel {
  matops::Matrix A;  // n x n
  matops::Matrix B;  // n x m
  matops::Matrix C;  // l x n
  matops::Matrix D;  // l x m
  matops::Matrix E;  // n x q (q = 0 when the agent has no disturbance)

  AgentModel(matops::Matrix A_, matops::Matrix B_, matops::Matrix C_,
             matops::Matrix D_, matops::Matrix E_);

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C.rows(); }
  Eigen::Index disturbance_dim() const { return E.cols(); }
};

/// Autonomous generator of a local disturbance: d' = S d.
struct DisturbanceExosystem {
  matops::Matrix S;        // q x q
  matops::Vector initial;  // d(0)
};

/// Leader: r' = S0 r, y0 = F0 r.
struct LeaderExosystem {
  matops::Matrix S0;       // n0 x n0
  matops::Matrix F0;       // l x n0
  matops::Vector initial;  // r(0)
};

/// Second-order unit-mass plant y'' + g y' + f y = u + <coupling, d> lifted
/// to state space with x = (y, y'); the disturbance row enters the velocity
/// equation.
AgentModel mass_damper_spring(double f, double g,
                              const Eigen::RowVectorXd& coupling);

/// PBH detectability: rank [A - lambda I; C] = n at every eigenvalue with
/// nonnegative real part.
bool check_detectability(const matops::Matrix& C, const matops::Matrix& A);

/// PBH stabilizability of (A, B): rank [A - lambda I, B] = n at every
/// eigenvalue with nonnegative real part.
bool check_stabilizability(const matops::Matrix& A, const matops::Matrix& B);

/// Transmission-zero freedom: rank [A - lambda I, B; C, D] = n + l at each
/// supplied exosystem eigenvalue; sufficient for regulator solvability.
bool check_rank_condition(const AgentModel& agent,
                          const matops::Spectrum& exo_eigs);

struct ValidationIssue {
  int agent = -1;  // 1-based agent index, -1 for leader/global issues
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> failures;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return failures.empty(); }
};

/// Checks the standing assumptions for a whole scenario: dimension
/// consistency, stabilizability, observer detectability (composite and
/// disturbance pairs), leader detectability, and exosystem eigenvalue
/// placement (an exosystem with strictly stable modes only warns; those
/// modes decay on their own).
ValidationReport validate_scenario_models(
    std::span<const AgentModel> agents,
    std::span<const DisturbanceExosystem> disturbances,
    const LeaderExosystem& leader);

}  // namespace dobcoord::model
