#include "dobcoord/graph.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace dobcoord::graph {

namespace {

void check_weights(const matops::Matrix& w) {
  if (w.rows() != w.cols() || w.rows() < 1)
    throw DimensionError("CommGraph: weights must be square (N+1)x(N+1)");
  if (!w.allFinite())
    throw ValidationError("CommGraph: non-finite weight");
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    if (w(i, i) != 0.0)
      throw ValidationError("CommGraph: self-loop weight at node " +
                            std::to_string(i));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (w(i, j) < 0.0)
        throw ValidationError("CommGraph: negative weight on edge " +
                              std::to_string(j) + " -> " + std::to_string(i));
  }
  if (w.row(0).cwiseAbs().sum() != 0.0)
    throw ValidationError("CommGraph: the leader (node 0) cannot receive");
}

}  // namespace

CommGraph::CommGraph(int n_followers, const std::vector<Edge>& edges) {
  if (n_followers < 1)
    throw ValidationError("CommGraph: need at least one follower");
  weights_ = matops::Matrix::Zero(n_followers + 1, n_followers + 1);
  for (const auto& e : edges) {
    if (e.from < 0 || e.from > n_followers || e.to < 0 || e.to > n_followers)
      throw ValidationError("CommGraph: edge node out of range: " +
                            std::to_string(e.from) + " -> " +
                            std::to_string(e.to));
    weights_(e.to, e.from) = e.weight;
  }
  check_weights(weights_);
}

CommGraph::CommGraph(matops::Matrix weights) : weights_(std::move(weights)) {
  check_weights(weights_);
}

std::vector<Edge> CommGraph::edges() const {
  std::vector<Edge> out;
  for (Eigen::Index to = 0; to < weights_.rows(); ++to)
    for (Eigen::Index from = 0; from < weights_.cols(); ++from)
      if (weights_(to, from) > 0.0)
        out.push_back({static_cast<int>(from), static_cast<int>(to),
                       weights_(to, from)});
  return out;
}

matops::Matrix laplacian(const CommGraph& g) {
  const matops::Matrix& w = g.weights();
  matops::Matrix lap = -w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) lap(i, i) = w.row(i).sum();
  return lap;
}

namespace {

matops::Matrix grounded_matrix(const CommGraph& g) {
  const matops::Matrix lap = laplacian(g);
  const Eigen::Index n = lap.rows() - 1;
  return lap.block(1, 1, n, n);
}

constexpr double kSymTol = 1e-12;
constexpr double kPosDefTol = 1e-12;

bool spd_min_eigenvalue(const matops::Matrix& h, double* min_eig) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (((h - h.transpose()).cwiseAbs().maxCoeff()) > kSymTol * scale)
    return false;
  Eigen::SelfAdjointEigenSolver<matops::Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalError("grounded Laplacian eigenvalue solve failed");
  *min_eig = solver.eigenvalues()(0);
  return *min_eig > kPosDefTol;
}

}  // namespace

bool validate_connected(const CommGraph& g) {
  double min_eig = 0.0;
  return spd_min_eigenvalue(grounded_matrix(g), &min_eig);
}

GroundedLaplacian grounded(const CommGraph& g) {
  GroundedLaplacian out;
  out.H = grounded_matrix(g);
  if (!spd_min_eigenvalue(out.H, &out.min_eigenvalue))
    throw ValidationError(
        "grounded: graph is not connected (grounded Laplacian is not "
        "symmetric positive definite)");
  return out;
}

double min_eigenvalue_over(std::span<const CommGraph> graphs) {
  if (graphs.empty())
    throw Error("min_eigenvalue_over: empty graph set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : graphs) best = std::min(best, grounded(g).min_eigenvalue);
  return best;
}

SwitchingSchedule::SwitchingSchedule(std::vector<CommGraph> graphs,
                                     std::vector<Segment> segments,
                                     bool periodic, double dwell_time)
    : graphs_(std::move(graphs)),
      segments_(std::move(segments)),
      periodic_(periodic),
      dwell_time_(dwell_time) {
  if (graphs_.empty())
    throw ValidationError("SwitchingSchedule: no graphs");
  if (segments_.empty())
    throw ValidationError("SwitchingSchedule: no segments");
  if (!(dwell_time_ > 0.0))
    throw ValidationError("SwitchingSchedule: dwell time must be positive");
  const int nodes = graphs_.front().nodes();
  for (const auto& g : graphs_)
    if (g.nodes() != nodes)
      throw ValidationError("SwitchingSchedule: graphs disagree on node count");
  double cum = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (s.graph >= graphs_.size())
      throw ValidationError("SwitchingSchedule: segment " + std::to_string(i) +
                            " references unknown graph index " +
                            std::to_string(s.graph + 1));
    if (s.duration < dwell_time_)
      throw ValidationError("SwitchingSchedule: segment " + std::to_string(i) +
                            " duration " + std::to_string(s.duration) +
                            " is below the dwell time " +
                            std::to_string(dwell_time_));
    cum += s.duration;
    boundaries_.push_back(cum);
  }
}

std::size_t SwitchingSchedule::graph_at(double t) const {
  if (t < 0.0)
    throw ValidationError("graph_at: time must be nonnegative");
  double local = t;
  if (periodic_) {
    local = std::fmod(t, total_duration());
  } else if (t >= total_duration()) {
    throw ScheduleExhaustedError(
        "graph_at: non-periodic schedule exhausted at t = " +
        std::to_string(t));
  }
  // Right-continuous: segment k is active on [boundary_{k-1}, boundary_k).
  for (std::size_t k = 0; k < boundaries_.size(); ++k)
    if (local < boundaries_[k]) return segments_[k].graph;
  return segments_.back().graph;  // local == total_duration() by rounding
}

std::vector<double> SwitchingSchedule::switch_times(double t_end) const {
  std::vector<double> out;
  if (periodic_) {
    const double period = total_duration();
    for (int cycle = 0;; ++cycle) {
      for (std::size_t k = 0; k < boundaries_.size(); ++k) {
        const double t = cycle * period + boundaries_[k];
        if (t >= t_end) return out;
        out.push_back(t);
      }
    }
  }
  for (double b : boundaries_) {
    if (b >= t_end) break;
    out.push_back(b);
  }
  return out;
}

}  // namespace dobcoord::graph
