#include "dobcoord/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace dobcoord::model {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;

Eigen::Index numerical_rank(const ComplexMatrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  const double threshold = static_cast<double>(std::max(m.rows(), m.cols())) *
                           std::numeric_limits<double>::epsilon() * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  return rank;
}

// Eigenvalues with real part >= 0, padded by a small tolerance so that
// marginal modes computed as -1e-16 are still tested.
constexpr double kUnstableTol = 1e-9;

}  // namespace

AgentModel::AgentModel(matops::Matrix A_, matops::Matrix B_, matops::Matrix C_,
                       matops::Matrix D_, matops::Matrix E_)
    : A(std::move(A_)),
      B(std::move(B_)),
      C(std::move(C_)),
      D(std::move(D_)),
      E(std::move(E_)) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw DimensionError("AgentModel: A must be square");
  if (B.rows() != n)
    throw DimensionError("AgentModel: B must have as many rows as A");
  if (C.cols() != n)
    throw DimensionError("AgentModel: C must have as many columns as A");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw DimensionError("AgentModel: D must be (outputs x inputs)");
  if (E.rows() != n)
    throw DimensionError("AgentModel: E must have as many rows as A");
}

AgentModel mass_damper_spring(double f, double g,
                              const Eigen::RowVectorXd& coupling) {
  matops::Matrix a(2, 2);
  a << 0.0, 1.0, -f, -g;
  matops::Matrix b(2, 1);
  b << 0.0, 1.0;
  matops::Matrix c(1, 2);
  c << 1.0, 0.0;
  matops::Matrix d = matops::Matrix::Zero(1, 1);
  matops::Matrix e = matops::Matrix::Zero(2, coupling.cols());
  e.row(1) = coupling;
  return AgentModel(std::move(a), std::move(b), std::move(c), std::move(d),
                    std::move(e));
}

bool check_detectability(const matops::Matrix& C, const matops::Matrix& A) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.cols() != n)
    throw DimensionError("check_detectability: dimension mismatch");
  if (n == 0) return true;
  const matops::Spectrum eigs = matops::eigenvalues(A);
  ComplexMatrix pencil(n + C.rows(), n);
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (eigs[i].real() < -kUnstableTol) continue;
    pencil.topRows(n) = A.cast<std::complex<double>>() -
                        eigs[i] * ComplexMatrix::Identity(n, n);
    pencil.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    if (numerical_rank(pencil) < n) return false;
  }
  return true;
}

bool check_stabilizability(const matops::Matrix& A, const matops::Matrix& B) {
  // PBH duality: (A, B) stabilizable iff (B^T, A^T) detectable.
  return check_detectability(B.transpose(), A.transpose());
}

bool check_rank_condition(const AgentModel& agent,
                          const matops::Spectrum& exo_eigs) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index m = agent.input_dim();
  const Eigen::Index l = agent.output_dim();
  ComplexMatrix block(n + l, n + m);
  block.block(0, n, n, m) = agent.B.cast<std::complex<double>>();
  block.block(n, 0, l, n) = agent.C.cast<std::complex<double>>();
  block.block(n, n, l, m) = agent.D.cast<std::complex<double>>();
  for (Eigen::Index i = 0; i < exo_eigs.size(); ++i) {
    block.block(0, 0, n, n) = agent.A.cast<std::complex<double>>() -
                              exo_eigs[i] * ComplexMatrix::Identity(n, n);
    if (numerical_rank(block) < n + l) return false;
  }
  return true;
}

namespace {

matops::Matrix composite_state_matrix(const AgentModel& agent,
                                      const DisturbanceExosystem& dist) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index q = agent.disturbance_dim();
  matops::Matrix composite = matops::Matrix::Zero(n + q, n + q);
  composite.topLeftCorner(n, n) = agent.A;
  composite.topRightCorner(n, q) = agent.E;
  composite.bottomRightCorner(q, q) = dist.S;
  return composite;
}

matops::Matrix composite_output_matrix(const AgentModel& agent) {
  const Eigen::Index n = agent.state_dim();
  const Eigen::Index q = agent.disturbance_dim();
  matops::Matrix out = matops::Matrix::Zero(agent.output_dim(), n + q);
  out.leftCols(n) = agent.C;
  return out;
}

bool has_open_lhp_eigenvalue(const matops::Matrix& s) {
  const matops::Spectrum eigs = matops::eigenvalues(s);
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    if (eigs[i].real() < -kUnstableTol) return true;
  return false;
}

}  // namespace

ValidationReport validate_scenario_models(
    std::span<const AgentModel> agents,
    std::span<const DisturbanceExosystem> disturbances,
    const LeaderExosystem& leader) {
  ValidationReport report;
  auto fail = [&](int agent, std::string msg) {
    report.failures.push_back({agent, std::move(msg)});
  };
  auto warn = [&](int agent, std::string msg) {
    report.warnings.push_back({agent, std::move(msg)});
  };

  if (agents.size() != disturbances.size()) {
    fail(-1, "agent and disturbance counts differ");
    return report;
  }
  if (leader.S0.rows() != leader.S0.cols())
    fail(-1, "leader S0 must be square");
  if (leader.F0.cols() != leader.S0.rows())
    fail(-1, "leader F0 must have as many columns as S0");
  if (leader.initial.size() != leader.S0.rows())
    fail(-1, "leader initial state length does not match S0");
  if (!report.failures.empty()) return report;

  if (!check_detectability(leader.F0, leader.S0))
    fail(-1, "(F0, S0) is not detectable");
  if (has_open_lhp_eigenvalue(leader.S0))
    warn(-1, "leader exosystem has strictly stable modes");

  const Eigen::Index l = leader.F0.rows();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const int idx = static_cast<int>(i) + 1;
    const auto& agent = agents[i];
    const auto& dist = disturbances[i];
    if (agent.output_dim() != l) {
      fail(idx, "output dimension differs from the leader's");
      continue;
    }
    if (dist.S.rows() != dist.S.cols() ||
        dist.S.rows() != agent.disturbance_dim()) {
      fail(idx, "disturbance S dimensions do not match the agent's E");
      continue;
    }
    if (dist.initial.size() != dist.S.rows()) {
      fail(idx, "disturbance initial state length does not match S");
      continue;
    }
    if (!check_stabilizability(agent.A, agent.B))
      fail(idx, "(A, B) is not stabilizable");
    if (!check_detectability(composite_output_matrix(agent),
                             composite_state_matrix(agent, dist)))
      fail(idx, "composite pair ([C, 0], [[A, E], [0, S]]) is not detectable");
    if (agent.disturbance_dim() > 0 &&
        !check_detectability(agent.E, dist.S))
      fail(idx, "(E, S) is not detectable");
    if (has_open_lhp_eigenvalue(dist.S))
      warn(idx, "disturbance exosystem has strictly stable modes");
  }
  return report;
}

}  // namespace dobcoord::model
