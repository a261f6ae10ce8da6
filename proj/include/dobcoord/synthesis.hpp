#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dobcoord/graph.hpp"
#include "dobcoord/model.hpp"

namespace dobcoord::synthesis {

using matops::Matrix;

/// Solutions of the two regulator equation pairs for one agent:
///   X1 S  = A X1 + B U1 + E,   0 = C X1 + D U1         (disturbance pair)
///   X2 S0 = A X2 + B U2,       0 = C X2 + D U2 - F0    (reference pair)
struct RegulatorSolution {
  Matrix X1;  // n x q
  Matrix U1;  // m x q
  Matrix X2;  // n x n0
  Matrix U2;  // m x n0
};

/// Every gain one agent's controllers need.
struct AgentGains {
  Matrix K1;  // m x n, state feedback: A + B K1 Hurwitz
  Matrix K2;  // m x q, disturbance feedforward U1 - K1 X1
  Matrix K3;  // m x n0, reference feedforward U2 - K1 X2
  Matrix L1;  // n x l, full-order observer state correction
  Matrix L2;  // q x l, full-order observer disturbance correction
  Matrix L;   // q x n, reduced-order observer gain: S + L E Hurwitz
  RegulatorSolution regulator;
};

struct GainSet {
  std::vector<AgentGains> agents;
  Matrix L0;           // n0 x l, shared leader-observer gain
  Matrix P;            // n0 x n0, symmetric positive definite certificate
  double mu_star = 0;  // max(1/lambda_bar, 1)
  double decay_c = 0;  // common-Lyapunov decay constant
};

/// Optional verbatim injections consulted by synthesize_gains; anything left
/// empty is computed. Entries beyond K1/L1/L2/L/L0 let a complete gain file
/// round-trip through the same structure.
struct AgentGainSpec {
  std::optional<Matrix> K1, K2, K3, L1, L2, L;
  std::optional<Matrix> X1, U1, X2, U2;
};

struct GainSpec {
  std::vector<AgentGainSpec> agents;  // empty, or one entry per follower
  std::optional<Matrix> L0, P;
  std::optional<double> mu_star, decay_c;
};

/// Stabilizing solution X of A'X + XA - XBR^{-1}B'X + Q = 0 via the
/// Hamiltonian eigenvector method; Q and R must be symmetric with R
/// invertible and the stable invariant subspace well-defined.
Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R);

/// Solves both regulator pairs; raises SynthesisError naming the pair that
/// has no solution. Residuals of the returned blocks are below
/// 1e-10 * (1 + |rhs|).
RegulatorSolution solve_regulator_equations(const model::AgentModel& agent,
                                            const model::DisturbanceExosystem& dist,
                                            const model::LeaderExosystem& leader);

/// Deterministic state feedback making A + B K1 Hurwitz (unit-weight LQR).
Matrix stabilizing_gain(const model::AgentModel& agent);

/// K2 = U1 - K1 X1, K3 = U2 - K1 X2.
std::pair<Matrix, Matrix> feedforward_gains(const RegulatorSolution& reg,
                                            const Matrix& K1);

struct LeaderObserverGain {
  Matrix P;   // certificate: P S0 + S0' P - 2 F0' F0 negative definite
  Matrix L0;  // -mu_star * P^{-1} F0'
  double mu_star = 0;
};

/// Observer gain shared by all followers. P is built from the filter-type
/// Riccati equation S0 Sigma + Sigma S0' - Sigma F0'F0 Sigma + I = 0 with
/// P = Sigma^{-1}; lambda_bar is the smallest grounded-Laplacian eigenvalue
/// over the admissible graphs.
LeaderObserverGain leader_observer_gain(const model::LeaderExosystem& leader,
                                        double lambda_bar);

struct CommonLyapunovResult {
  bool ok = false;
  double c = 0.0;                 // largest decay constant when ok
  double violating_lambda = 0.0;  // offending eigenvalue when !ok
};

/// Largest c >= 1e-9 with (S0 + lambda L0 F0)'P + P(S0 + lambda L0 F0)
/// <= -cP for every supplied lambda, via the generalized eigenvalue bound.
CommonLyapunovResult verify_common_lyapunov(const Matrix& P, const Matrix& L0,
                                            const model::LeaderExosystem& leader,
                                            std::span<const double> eigs);

/// Full-order observer gains (L1, L2): the composite matrix
/// [[A + L1 C, E], [L2 C, S]] is Hurwitz.
std::pair<Matrix, Matrix> full_order_observer_gains(
    const model::AgentModel& agent, const model::DisturbanceExosystem& dist);

/// Reduced-order observer gain L: S + L E is Hurwitz.
Matrix reduced_order_observer_gain(const model::AgentModel& agent,
                                   const model::DisturbanceExosystem& dist);

/// Composite observer matrix [[A + L1 C, E], [L2 C, S]].
Matrix full_order_composite(const model::AgentModel& agent,
                            const model::DisturbanceExosystem& dist,
                            const Matrix& L1, const Matrix& L2);

// Hurwitz margin demanded of every synthesized closed-loop matrix.
inline constexpr double kSynthesisMargin = 1e-6;

/// Runs the whole synthesis chain for a scenario, honoring overrides.
/// With `strict` (the default) the assembled set is re-validated and a
/// SynthesisError is raised on any violated invariant; with strict = false
/// the set is returned as-is for later inspection by validate_gain_set.
GainSet synthesize_gains(std::span<const model::AgentModel> agents,
                         std::span<const model::DisturbanceExosystem> dists,
                         const model::LeaderExosystem& leader,
                         std::span<const graph::CommGraph> graphs,
                         const GainSpec& overrides = {}, bool strict = true);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the computed margin/residual the check judged
  std::string detail;
};

/// Per-condition verification of a gain set against a scenario: Hurwitz
/// margins, regulator residuals, feedforward consistency, and the leader
/// certificate checks.
std::vector<CheckResult> validate_gain_set(
    std::span<const model::AgentModel> agents,
    std::span<const model::DisturbanceExosystem> dists,
    const model::LeaderExosystem& leader,
    std::span<const graph::CommGraph> graphs, const GainSet& gains);

}  // namespace dobcoord::synthesis
