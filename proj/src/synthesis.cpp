#include "dobcoord/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dobcoord::synthesis {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;

void require_symmetric(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError(std::string("solve_care: ") + what +
                          " must be symmetric");
}

}  // namespace

Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols())
    throw DimensionError("solve_care: dimension mismatch");
  require_symmetric(Q, "Q");
  require_symmetric(R, "R");

  if (n == 0) return Matrix(0, 0);

  const Matrix R_inv = R.inverse();
  Matrix hamiltonian(2 * n, 2 * n);
  hamiltonian.topLeftCorner(n, n) = A;
  hamiltonian.topRightCorner(n, n) = -B * R_inv * B.transpose();
  hamiltonian.bottomLeftCorner(n, n) = -Q;
  hamiltonian.bottomRightCorner(n, n) = -A.transpose();

  Eigen::EigenSolver<Matrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success)
    throw NumericalError("solve_care: Hamiltonian eigensolve failed");

  // Basis of the stable invariant subspace.
  ComplexMatrix basis(2 * n, n);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const double re = solver.eigenvalues()(i).real();
    if (re < -1e-9) {
      if (count == n)
        throw NumericalError("solve_care: more than n stable eigenvalues");
      basis.col(count++) = solver.eigenvectors().col(i);
    } else if (std::abs(re) <= 1e-9) {
      throw NumericalError(
          "solve_care: Hamiltonian eigenvalue on the imaginary axis; the "
          "stabilizing solution does not exist");
    }
  }
  if (count != n)
    throw NumericalError("solve_care: stable subspace has wrong dimension");

  const ComplexMatrix top = basis.topRows(n);
  const ComplexMatrix bottom = basis.bottomRows(n);
  Eigen::FullPivLU<ComplexMatrix> lu(top);
  if (!lu.isInvertible())
    throw NumericalError("solve_care: stable subspace is not a graph over "
                         "the state space");
  const ComplexMatrix x_complex = bottom * lu.inverse();
  Matrix x = x_complex.real();
  x = 0.5 * (x + x.transpose()).eval();

  const Matrix residual = A.transpose() * x + x * A -
                          x * B * R_inv * B.transpose() * x + Q;
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if (residual.cwiseAbs().maxCoeff() > 1e-7 * scale * std::max(1.0, x.norm()))
    throw NumericalError("solve_care: residual check failed, " +
                         std::to_string(residual.norm()));
  return x;
}

RegulatorSolution solve_regulator_equations(
    const model::AgentModel& agent, const model::DisturbanceExosystem& dist,
    const model::LeaderExosystem& leader) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index m = agent.input_dim();
  const Eigen::Index l = agent.output_dim();
  const Eigen::Index q = agent.disturbance_dim();
  const Eigen::Index n0 = leader.S0.rows();

  const Matrix eye_n = Matrix::Identity(n, n);
  const Matrix eye_l = Matrix::Identity(l, l);

  auto solve_pair = [&](const Matrix& exo, const Matrix& forcing,
                        const Matrix& output_rhs, Eigen::Index w,
                        const char* which) -> std::pair<Matrix, Matrix> {
    if (w == 0) return {Matrix(n, 0), Matrix(m, 0)};
    const Matrix eye_w = Matrix::Identity(w, w);
    matops::BlockSystem system;
    system.unknowns = {{n, w}, {m, w}};
    // X exo - A X - B U = forcing
    system.equations.push_back(
        {{{0, eye_n, exo}, {0, -agent.A, eye_w}, {1, -agent.B, eye_w}},
         forcing});
    // C X + D U = output_rhs
    system.equations.push_back(
        {{{0, agent.C, eye_w}, {1, agent.D, eye_w}}, output_rhs});
    try {
      auto sol = matops::solve_linear_matrix_system(system);
      return {sol.blocks[0], sol.blocks[1]};
    } catch (const NoSolutionError& e) {
      throw SynthesisError(std::string("regulator equations unsolvable (") +
                           which + " pair): " + e.what());
    }
  };

  RegulatorSolution reg;
  std::tie(reg.X1, reg.U1) =
      solve_pair(dist.S, agent.E, Matrix::Zero(l, q), q, "disturbance");
  std::tie(reg.X2, reg.U2) =
      solve_pair(leader.S0, Matrix::Zero(n, n0), leader.F0, n0, "reference");
  return reg;
}

Matrix stabilizing_gain(const model::AgentModel& agent) {
  if (!model::check_stabilizability(agent.A, agent.B))
    throw SynthesisError("stabilizing_gain: (A, B) is not stabilizable");
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index m = agent.input_dim();
  const Matrix x = solve_care(agent.A, agent.B, Matrix::Identity(n, n),
                              Matrix::Identity(m, m));
  Matrix k = -agent.B.transpose() * x;
  if (!matops::is_hurwitz(agent.A + agent.B * k, kSynthesisMargin))
    throw SynthesisError(
        "stabilizing_gain: synthesized gain misses the stability margin");
  return k;
}

std::pair<Matrix, Matrix> feedforward_gains(const RegulatorSolution& reg,
                                            const Matrix& K1) {
  return {reg.U1 - K1 * reg.X1, reg.U2 - K1 * reg.X2};
}

LeaderObserverGain leader_observer_gain(const model::LeaderExosystem& leader,
                                        double lambda_bar) {
  if (!(lambda_bar > 0.0))
    throw SynthesisError("leader_observer_gain: lambda_bar must be positive");
  if (!model::check_detectability(leader.F0, leader.S0))
    throw SynthesisError("leader_observer_gain: (F0, S0) is not detectable");
  const Eigen::Index n0 = leader.S0.rows();
  const Eigen::Index l = leader.F0.rows();
  // Filter-type Riccati: S0 Sigma + Sigma S0' - Sigma F0'F0 Sigma + I = 0.
  const Matrix sigma =
      solve_care(leader.S0.transpose(), leader.F0.transpose(),
                 Matrix::Identity(n0, n0), Matrix::Identity(l, l));
  LeaderObserverGain out;
  out.mu_star = std::max(1.0 / lambda_bar, 1.0);
  out.P = sigma.inverse();
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.L0 = -out.mu_star * sigma * leader.F0.transpose();
  return out;
}

CommonLyapunovResult verify_common_lyapunov(const Matrix& P, const Matrix& L0,
                                            const model::LeaderExosystem& leader,
                                            std::span<const double> eigs) {
  Eigen::SelfAdjointEigenSolver<Matrix> p_eigs(P);
  if (p_eigs.info() != Eigen::Success || p_eigs.eigenvalues()(0) <= 0.0)
    throw ValidationError("verify_common_lyapunov: P must be positive definite");

  CommonLyapunovResult result;
  result.c = std::numeric_limits<double>::infinity();
  for (double lambda : eigs) {
    const Matrix closed = leader.S0 + lambda * L0 * leader.F0;
    Matrix m = closed.transpose() * P + P * closed;
    m = 0.5 * (m + m.transpose()).eval();
    // Largest mu with M x = mu P x; M <= -cP holds for all c <= -mu.
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> gen(m, P);
    if (gen.info() != Eigen::Success)
      throw NumericalError("verify_common_lyapunov: generalized eigensolve "
                           "failed");
    const double c_lambda = -gen.eigenvalues().maxCoeff();
    if (c_lambda < result.c) {
      result.c = c_lambda;
      result.violating_lambda = lambda;
    }
  }
  result.ok = result.c >= 1e-9 && std::isfinite(result.c);
  if (!result.ok) result.c = 0.0;
  return result;
}

Matrix full_order_composite(const model::AgentModel& agent,
                            const model::DisturbanceExosystem& dist,
                            const Matrix& L1, const Matrix& L2) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index q = agent.disturbance_dim();
  Matrix composite(n + q, n + q);
  composite.topLeftCorner(n, n) = agent.A + L1 * agent.C;
  composite.topRightCorner(n, q) = agent.E;
  composite.bottomLeftCorner(q, n) = L2 * agent.C;
  composite.bottomRightCorner(q, q) = dist.S;
  return composite;
}

std::pair<Matrix, Matrix> full_order_observer_gains(
    const model::AgentModel& agent, const model::DisturbanceExosystem& dist) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index q = agent.disturbance_dim();
  const Eigen::Index l = agent.output_dim();

  Matrix a_bar = Matrix::Zero(n + q, n + q);
  a_bar.topLeftCorner(n, n) = agent.A;
  a_bar.topRightCorner(n, q) = agent.E;
  a_bar.bottomRightCorner(q, q) = dist.S;
  Matrix c_bar = Matrix::Zero(l, n + q);
  c_bar.leftCols(n) = agent.C;

  if (!model::check_detectability(c_bar, a_bar))
    throw SynthesisError(
        "full_order_observer_gains: composite pair is not detectable");

  const Matrix sigma =
      solve_care(a_bar.transpose(), c_bar.transpose(),
                 Matrix::Identity(n + q, n + q), Matrix::Identity(l, l));
  const Matrix gain = -sigma * c_bar.transpose();  // (n+q) x l
  Matrix l1 = gain.topRows(n);
  Matrix l2 = gain.bottomRows(q);
  if (!matops::is_hurwitz(full_order_composite(agent, dist, l1, l2),
                          kSynthesisMargin))
    throw SynthesisError(
        "full_order_observer_gains: synthesized gains miss the margin");
  return {std::move(l1), std::move(l2)};
}

Matrix reduced_order_observer_gain(const model::AgentModel& agent,
                                   const model::DisturbanceExosystem& dist) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index q = agent.disturbance_dim();
  if (q == 0) return Matrix(0, n);
  if (!model::check_detectability(agent.E, dist.S))
    throw SynthesisError(
        "reduced_order_observer_gain: (E, S) is not detectable");
  const Matrix sigma = solve_care(dist.S.transpose(), agent.E.transpose(),
                                  Matrix::Identity(q, q),
                                  Matrix::Identity(n, n));
  Matrix gain = -sigma * agent.E.transpose();
  if (!matops::is_hurwitz(dist.S + gain * agent.E, kSynthesisMargin))
    throw SynthesisError(
        "reduced_order_observer_gain: synthesized gain misses the margin");
  return gain;
}

namespace {

std::vector<double> grounded_spectrum_union(
    std::span<const graph::CommGraph> graphs) {
  std::set<double> values;
  for (const auto& g : graphs) {
    const Matrix h = graph::grounded(g).H;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
      values.insert(solver.eigenvalues()(i));
  }
  return {values.begin(), values.end()};
}

void check_dims(const std::optional<Matrix>& m, Eigen::Index rows,
                Eigen::Index cols, int agent, const char* name) {
  if (!m) return;
  if (m->rows() != rows || m->cols() != cols)
    throw DimensionError("gain override " + std::string(name) + " for agent " +
                         std::to_string(agent) + " must be " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(m->rows()) + "x" +
                         std::to_string(m->cols()));
}

}  // namespace

GainSet synthesize_gains(std::span<const model::AgentModel> agents,
                         std::span<const model::DisturbanceExosystem> dists,
                         const model::LeaderExosystem& leader,
                         std::span<const graph::CommGraph> graphs,
                         const GainSpec& overrides, bool strict) {
  if (agents.size() != dists.size())
    throw DimensionError("synthesize_gains: agent/disturbance count mismatch");
  if (!overrides.agents.empty() && overrides.agents.size() != agents.size())
    throw DimensionError(
        "synthesize_gains: override entries must match the agent count");

  const double lambda_bar = graph::min_eigenvalue_over(graphs);
  GainSet gains;

  {
    const auto leader_gain = leader_observer_gain(leader, lambda_bar);
    gains.P = overrides.P.value_or(leader_gain.P);
    gains.L0 = overrides.L0.value_or(leader_gain.L0);
    gains.mu_star = overrides.mu_star.value_or(leader_gain.mu_star);
  }

  const std::vector<double> spectrum = grounded_spectrum_union(graphs);
  const auto lyap = verify_common_lyapunov(gains.P, gains.L0, leader, spectrum);
  if (strict && !lyap.ok)
    throw SynthesisError(
        "synthesize_gains: common Lyapunov inequality fails at grounded "
        "eigenvalue " +
        std::to_string(lyap.violating_lambda));
  gains.decay_c = overrides.decay_c.value_or(lyap.c);

  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& agent = agents[i];
    const auto& dist = dists[i];
    const AgentGainSpec spec =
        overrides.agents.empty() ? AgentGainSpec{} : overrides.agents[i];
    const int idx = static_cast<int>(i) + 1;
    const Eigen::Index n = agent.state_dim(), m = agent.input_dim(),
                       l = agent.output_dim(), q = agent.disturbance_dim(),
                       n0 = leader.S0.rows();
    check_dims(spec.K1, m, n, idx, "K1");
    check_dims(spec.K2, m, q, idx, "K2");
    check_dims(spec.K3, m, n0, idx, "K3");
    check_dims(spec.L1, n, l, idx, "L1");
    check_dims(spec.L2, q, l, idx, "L2");
    check_dims(spec.L, q, n, idx, "L");

    AgentGains ag;
    if (spec.X1 && spec.U1 && spec.X2 && spec.U2) {
      ag.regulator = {*spec.X1, *spec.U1, *spec.X2, *spec.U2};
    } else {
      ag.regulator = solve_regulator_equations(agent, dist, leader);
    }
    ag.K1 = spec.K1 ? *spec.K1 : stabilizing_gain(agent);
    std::tie(ag.K2, ag.K3) = feedforward_gains(ag.regulator, ag.K1);
    if (spec.K2) ag.K2 = *spec.K2;
    if (spec.K3) ag.K3 = *spec.K3;
    if (spec.L1 && spec.L2) {
      ag.L1 = *spec.L1;
      ag.L2 = *spec.L2;
    } else if (spec.L1 || spec.L2) {
      throw SynthesisError("synthesize_gains: L1 and L2 must be overridden "
                           "together for agent " + std::to_string(idx));
    } else {
      std::tie(ag.L1, ag.L2) = full_order_observer_gains(agent, dist);
    }
    ag.L = spec.L ? *spec.L : reduced_order_observer_gain(agent, dist);
    gains.agents.push_back(std::move(ag));
  }

  if (strict) {
    const auto checks =
        validate_gain_set(agents, dists, leader, graphs, gains);
    for (const auto& check : checks)
      if (!check.passed)
        throw SynthesisError("synthesize_gains: invariant failed: " +
                             check.name + " (" + check.detail + ")");
  }
  return gains;
}

std::vector<CheckResult> validate_gain_set(
    std::span<const model::AgentModel> agents,
    std::span<const model::DisturbanceExosystem> dists,
    const model::LeaderExosystem& leader,
    std::span<const graph::CommGraph> graphs, const GainSet& gains) {
  std::vector<CheckResult> checks;
  auto add = [&](std::string name, bool passed, double value,
                 std::string detail) {
    checks.push_back({std::move(name), passed, value, std::move(detail)});
  };

  if (gains.agents.size() != agents.size()) {
    add("gain-set shape", false, 0.0,
        "gain set covers " + std::to_string(gains.agents.size()) +
            " agents, scenario has " + std::to_string(agents.size()));
    return checks;
  }

  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& agent = agents[i];
    const auto& dist = dists[i];
    const auto& ag = gains.agents[i];
    const std::string tag = "agent " + std::to_string(i + 1);

    double abscissa = matops::spectral_abscissa(agent.A + agent.B * ag.K1);
    add(tag + ": A + B K1 Hurwitz", abscissa < 0.0, -abscissa,
        "spectral abscissa " + std::to_string(abscissa));

    abscissa = matops::spectral_abscissa(
        full_order_composite(agent, dist, ag.L1, ag.L2));
    add(tag + ": composite observer matrix Hurwitz", abscissa < 0.0, -abscissa,
        "spectral abscissa " + std::to_string(abscissa));

    if (agent.disturbance_dim() > 0) {
      abscissa = matops::spectral_abscissa(dist.S + ag.L * agent.E);
      add(tag + ": S + L E Hurwitz", abscissa < 0.0, -abscissa,
          "spectral abscissa " + std::to_string(abscissa));
    }

    const auto& reg = ag.regulator;
    const double res1 =
        std::hypot((reg.X1 * dist.S - agent.A * reg.X1 - agent.B * reg.U1 -
                    agent.E).norm(),
                   (agent.C * reg.X1 + agent.D * reg.U1).norm());
    const double res2 =
        std::hypot((reg.X2 * leader.S0 - agent.A * reg.X2 - agent.B * reg.U2)
                       .norm(),
                   (agent.C * reg.X2 + agent.D * reg.U2 - leader.F0).norm());
    const double budget1 = 1e-10 * (1.0 + agent.E.norm());
    const double budget2 = 1e-10 * (1.0 + leader.F0.norm());
    add(tag + ": disturbance regulator residual", res1 <= budget1, res1,
        "residual " + std::to_string(res1));
    add(tag + ": reference regulator residual", res2 <= budget2, res2,
        "residual " + std::to_string(res2));

    const auto [k2, k3] = feedforward_gains(reg, ag.K1);
    const bool ff_ok = matops::approx_equal(ag.K2, k2, 1e-12, 1e-12) &&
                       matops::approx_equal(ag.K3, k3, 1e-12, 1e-12);
    add(tag + ": feedforward gains consistent", ff_ok,
        (ag.K2 - k2).norm() + (ag.K3 - k3).norm(),
        ff_ok ? "K2, K3 match U - K1 X" : "K2/K3 differ from U - K1 X");
  }

  {
    Eigen::SelfAdjointEigenSolver<Matrix> p_solver(gains.P);
    const double p_min = p_solver.eigenvalues()(0);
    const double sym_err =
        (gains.P - gains.P.transpose()).cwiseAbs().maxCoeff();
    add("P symmetric positive definite", p_min > 0.0 && sym_err <= 1e-10,
        p_min, "min eigenvalue " + std::to_string(p_min));

    const Matrix strict_lhs = gains.P * leader.S0 +
                              leader.S0.transpose() * gains.P -
                              2.0 * leader.F0.transpose() * leader.F0;
    Eigen::SelfAdjointEigenSolver<Matrix> lhs_solver(
        0.5 * (strict_lhs + strict_lhs.transpose()));
    const double max_eig = lhs_solver.eigenvalues().maxCoeff();
    add("P S0 + S0' P - 2 F0'F0 negative definite", max_eig <= -1e-8,
        -max_eig, "max eigenvalue " + std::to_string(max_eig));
  }

  try {
    const std::vector<double> spectrum = grounded_spectrum_union(graphs);
    const auto lyap =
        verify_common_lyapunov(gains.P, gains.L0, leader, spectrum);
    add("common Lyapunov decay over grounded spectra", lyap.ok, lyap.c,
        lyap.ok ? "c = " + std::to_string(lyap.c)
                : "fails at grounded eigenvalue " +
                      std::to_string(lyap.violating_lambda));
  } catch (const Error& e) {
    add("common Lyapunov decay over grounded spectra", false, 0.0, e.what());
  }

  return checks;
}

}  // namespace dobcoord::synthesis
