#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dobcoord/matops.hpp"

namespace dobcoord::graph {

/// Weighted directed edge: information flows from `from` to `to`,
/// i.e. it sets adjacency entry a[to][from] = weight.
struct Edge {
  int from = 0;
  int to = 0;
  double weight = 1.0;
};

/// Communication topology over nodes {0, 1, ..., N} where node 0 is the
/// leader. Row i of the adjacency matrix lists what node i receives:
/// a_ij > 0 means node j informs node i. The leader receives nothing, so
/// row 0 is identically zero.
class CommGraph {
 public:
  CommGraph(int n_followers, const std::vector<Edge>& edges);
  explicit CommGraph(matops::Matrix weights);

  int followers() const { return static_cast<int>(weights_.rows()) - 1; }
  int nodes() const { return static_cast<int>(weights_.rows()); }
  const matops::Matrix& weights() const { return weights_; }
  double weight(int to, int from) const { return weights_(to, from); }

  /// Edge list (from, to, weight) in row-major scan order.
  std::vector<Edge> edges() const;

 private:
  matops::Matrix weights_;  // (N+1) x (N+1)
};

/// Weighted Laplacian: l_ii = sum_{j != i} a_ij, l_ij = -a_ij.
matops::Matrix laplacian(const CommGraph& g);

struct GroundedLaplacian {
  matops::Matrix H;  // N x N, Laplacian with leader row/column deleted
  double min_eigenvalue = 0.0;
};

/// True iff the grounded Laplacian is symmetric positive definite, which is
/// the operative connectedness criterion: every follower reaches the leader
/// and the follower-induced subgraph is undirected.
bool validate_connected(const CommGraph& g);

/// Grounded Laplacian of a connected graph; raises ValidationError otherwise.
GroundedLaplacian grounded(const CommGraph& g);

/// Minimum grounded-Laplacian eigenvalue over a set of connected graphs.
double min_eigenvalue_over(std::span<const CommGraph> graphs);

struct Segment {
  std::size_t graph = 0;  // index into the schedule's graph list
  double duration = 0.0;
};

/// Piecewise-constant topology signal with a dwell-time guarantee. The
/// signal is right-continuous: at a switching instant the new segment's
/// graph is already active.
class SwitchingSchedule {
 public:
  SwitchingSchedule(std::vector<CommGraph> graphs, std::vector<Segment> segments,
                    bool periodic, double dwell_time);

  const std::vector<CommGraph>& graphs() const { return graphs_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool periodic() const { return periodic_; }
  double dwell_time() const { return dwell_time_; }
  double total_duration() const { return boundaries_.back(); }

  /// Index of the graph active at time t >= 0.
  std::size_t graph_at(double t) const;
  const CommGraph& active(double t) const { return graphs_[graph_at(t)]; }

  /// Switching instants strictly inside (0, t_end).
  std::vector<double> switch_times(double t_end) const;

 private:
  std::vector<CommGraph> graphs_;
  std::vector<Segment> segments_;
  bool periodic_;
  double dwell_time_;
  std::vector<double> boundaries_;  // cumulative segment end times, size = #segments
};

}  // namespace dobcoord::graph
