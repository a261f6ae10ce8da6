#include "dobcoord/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dobcoord::sim {

std::string to_string(ControlLaw law) {
  switch (law) {
    case ControlLaw::FullInformation: return "full-info";
    case ControlLaw::FullOrder: return "full-order";
    case ControlLaw::ReducedOrder: return "reduced-order";
  }
  return "?";
}

ControlLaw law_from_string(const std::string& name) {
  if (name == "full-info") return ControlLaw::FullInformation;
  if (name == "full-order") return ControlLaw::FullOrder;
  if (name == "reduced-order") return ControlLaw::ReducedOrder;
  throw ValidationError("unknown control law '" + name +
                        "' (expected full-info, full-order, or reduced-order)");
}

namespace {

StateLayout build_layout(const std::vector<model::AgentModel>& agents,
                         const model::LeaderExosystem& leader, ControlLaw law) {
  StateLayout layout;
  Eigen::Index offset = 0;
  auto push = [&](std::vector<StateLayout::Block>& dst, Eigen::Index size) {
    dst.push_back({offset, size});
    offset += size;
  };
  for (const auto& a : agents) push(layout.x, a.state_dim());
  for (const auto& a : agents) push(layout.d, a.disturbance_dim());
  layout.r = {offset, leader.S0.rows()};
  offset += leader.S0.rows();
  if (law == ControlLaw::FullOrder)
    for (const auto& a : agents) push(layout.xi, a.state_dim());
  if (law != ControlLaw::FullInformation) {
    for (const auto& a : agents) push(layout.zeta, a.disturbance_dim());
    for ([[maybe_unused]] const auto& a : agents)
      push(layout.eta, leader.S0.rows());
  }
  layout.total = offset;
  return layout;
}

Vector seg(const Vector& z, const StateLayout::Block& b) {
  return z.segment(b.offset, b.size);
}

}  // namespace

ClosedLoopSystem::ClosedLoopSystem(
    std::vector<model::AgentModel> agents,
    std::vector<model::DisturbanceExosystem> disturbances,
    model::LeaderExosystem leader, graph::SwitchingSchedule schedule,
    synthesis::GainSet gains, ControlLaw law)
    : agents_(std::move(agents)),
      disturbances_(std::move(disturbances)),
      leader_(std::move(leader)),
      schedule_(std::move(schedule)),
      gains_(std::move(gains)),
      law_(law) {
  const auto report =
      model::validate_scenario_models(agents_, disturbances_, leader_);
  if (!report.ok()) {
    std::string msg = "ClosedLoopSystem: model validation failed:";
    for (const auto& issue : report.failures)
      msg += "\n  [agent " + std::to_string(issue.agent) + "] " + issue.message;
    throw ValidationError(msg);
  }
  if (schedule_.graphs().front().followers() !=
      static_cast<int>(agents_.size()))
    throw DimensionError(
        "ClosedLoopSystem: schedule graphs must have one node per follower "
        "plus the leader");
  const auto checks = synthesis::validate_gain_set(
      agents_, disturbances_, leader_, schedule_.graphs(), gains_);
  for (const auto& check : checks)
    if (!check.passed)
      throw ValidationError("ClosedLoopSystem: gain invariant failed: " +
                            check.name + " (" + check.detail + ")");
  layout_ = build_layout(agents_, leader_, law_);
}

Vector ClosedLoopSystem::initial_state(const InitialConditions& init) const {
  const std::size_t n_agents = agents_.size();
  auto fill = [&](Vector& z, const std::vector<StateLayout::Block>& blocks,
                  const std::vector<Vector>& values, const char* what) {
    if (values.empty()) return;
    if (values.size() != blocks.size())
      throw DimensionError(std::string("initial_state: ") + what +
                           " initials must cover every agent");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (values[i].size() != blocks[i].size)
        throw DimensionError(std::string("initial_state: ") + what +
                             " initial for agent " + std::to_string(i + 1) +
                             " has wrong length");
      z.segment(blocks[i].offset, blocks[i].size) = values[i];
    }
  };

  if (init.x.size() != n_agents)
    throw DimensionError("initial_state: need one plant initial per follower");
  Vector z = Vector::Zero(layout_.total);
  fill(z, layout_.x, init.x, "plant");
  for (std::size_t i = 0; i < n_agents; ++i)
    z.segment(layout_.d[i].offset, layout_.d[i].size) =
        disturbances_[i].initial;
  z.segment(layout_.r.offset, layout_.r.size) = leader_.initial;
  if (law_ == ControlLaw::FullOrder) fill(z, layout_.xi, init.xi, "xi");
  if (law_ != ControlLaw::FullInformation) {
    fill(z, layout_.zeta, init.zeta, "zeta");
    fill(z, layout_.eta, init.eta, "eta");
  }
  return z;
}

Vector ClosedLoopSystem::control(const Vector& z, std::size_t i) const {
  const auto& ag = gains_.agents[i];
  switch (law_) {
    case ControlLaw::FullInformation:
      return controllers::full_information_control(
          seg(z, layout_.x[i]), seg(z, layout_.d[i]), seg(z, layout_.r),
          ag.K1, ag.K2, ag.K3);
    case ControlLaw::FullOrder:
      return ag.K1 * seg(z, layout_.xi[i]) + ag.K2 * seg(z, layout_.zeta[i]) +
             ag.K3 * seg(z, layout_.eta[i]);
    case ControlLaw::ReducedOrder: {
      const Vector x = seg(z, layout_.x[i]);
      return ag.K1 * x +
             ag.K2 * (seg(z, layout_.zeta[i]) - ag.L * x) +
             ag.K3 * seg(z, layout_.eta[i]);
    }
  }
  throw Error("control: unreachable");
}

void ClosedLoopSystem::rhs(const graph::CommGraph& active, const Vector& z,
                           Vector& dz) const {
  dz.resize(layout_.total);
  const Vector r = seg(z, layout_.r);
  const Vector y0 = leader_.F0 * r;
  dz.segment(layout_.r.offset, layout_.r.size) = leader_.S0 * r;

  const std::size_t n_agents = agents_.size();
  std::vector<Vector> eta_outputs;
  if (law_ != ControlLaw::FullInformation) {
    eta_outputs.reserve(n_agents);
    for (std::size_t j = 0; j < n_agents; ++j)
      eta_outputs.push_back(leader_.F0 * seg(z, layout_.eta[j]));
  }

  auto view_for = [&](std::size_t i) {
    controllers::NeighborView view;
    view.leader_weight = active.weight(static_cast<int>(i) + 1, 0);
    view.leader_output = y0;
    for (std::size_t j = 0; j < n_agents; ++j) {
      const double w =
          active.weight(static_cast<int>(i) + 1, static_cast<int>(j) + 1);
      if (w != 0.0) view.neighbors.push_back({w, eta_outputs[j]});
    }
    return view;
  };

  for (std::size_t i = 0; i < n_agents; ++i) {
    const auto& agent = agents_[i];
    const auto& dist = disturbances_[i];
    const auto& ag = gains_.agents[i];
    const Vector x = seg(z, layout_.x[i]);
    const Vector d = seg(z, layout_.d[i]);
    dz.segment(layout_.d[i].offset, layout_.d[i].size) = dist.S * d;

    Vector u;
    switch (law_) {
      case ControlLaw::FullInformation: {
        u = controllers::full_information_control(x, d, r, ag.K1, ag.K2,
                                                  ag.K3);
        break;
      }
      case ControlLaw::FullOrder: {
        const Vector xi = seg(z, layout_.xi[i]);
        const Vector zeta = seg(z, layout_.zeta[i]);
        const Vector eta = seg(z, layout_.eta[i]);
        u = ag.K1 * xi + ag.K2 * zeta + ag.K3 * eta;
        const Vector y = agent.C * x + agent.D * u;
        const auto derivs = controllers::full_order_dob_rhs(
            y, xi, zeta, eta, view_for(i), agent, dist, ag, gains_.L0,
            leader_);
        u = derivs.u;
        dz.segment(layout_.xi[i].offset, layout_.xi[i].size) = derivs.xi_dot;
        dz.segment(layout_.zeta[i].offset, layout_.zeta[i].size) =
            derivs.zeta_dot;
        dz.segment(layout_.eta[i].offset, layout_.eta[i].size) =
            derivs.eta_dot;
        break;
      }
      case ControlLaw::ReducedOrder: {
        const auto derivs = controllers::reduced_order_dob_rhs(
            x, seg(z, layout_.zeta[i]), seg(z, layout_.eta[i]), view_for(i),
            agent, dist, ag, gains_.L0, leader_);
        u = derivs.u;
        dz.segment(layout_.zeta[i].offset, layout_.zeta[i].size) =
            derivs.zeta_dot;
        dz.segment(layout_.eta[i].offset, layout_.eta[i].size) =
            derivs.eta_dot;
        break;
      }
    }
    dz.segment(layout_.x[i].offset, layout_.x[i].size) =
        agent.A * x + agent.B * u + agent.E * d;
  }
}

Vector ClosedLoopSystem::outputs(const Vector& z) const {
  const Eigen::Index l = output_dim();
  Vector out((followers() + 1) * l);
  out.head(l) = leader_.F0 * seg(z, layout_.r);
  for (std::size_t i = 0; i < agents_.size(); ++i)
    out.segment((i + 1) * l, l) = agents_[i].C * seg(z, layout_.x[i]) +
                                  agents_[i].D * control(z, i);
  return out;
}

Vector ClosedLoopSystem::errors(const Vector& z) const {
  const Eigen::Index l = output_dim();
  const Vector ys = outputs(z);
  Vector err(followers() * l);
  for (int i = 0; i < followers(); ++i)
    err.segment(i * l, l) = ys.segment((i + 1) * l, l) - ys.head(l);
  return err;
}

namespace {

void check_finite(const Vector& z, double t) {
  if (!z.allFinite() || z.cwiseAbs().maxCoeff() > kDivergenceBound)
    throw DivergenceError(
        "integrate: state diverged at t = " + std::to_string(t), t);
}

}  // namespace

Trajectory integrate(const ClosedLoopSystem& sys, const Vector& z0,
                     double t_end, double h) {
  if (!(h > 0.0)) throw ValidationError("integrate: step must be positive");
  if (t_end < 0.0)
    throw ValidationError("integrate: t_end must be nonnegative");
  if (z0.size() != sys.layout().total)
    throw DimensionError("integrate: initial state has wrong dimension");

  // Barriers: every switching instant plus the horizon; within one stretch
  // the vector field is constant in t.
  std::vector<double> barriers = sys.schedule().switch_times(t_end);
  barriers.push_back(t_end);

  std::vector<double> times;
  std::vector<Vector> samples;
  times.push_back(0.0);
  samples.push_back(z0);
  check_finite(z0, 0.0);

  Vector z = z0;
  Vector k1(z.size()), k2(z.size()), k3(z.size()), k4(z.size());
  double t = 0.0;
  for (double barrier : barriers) {
    if (barrier <= t) continue;
    const graph::CommGraph& active = sys.schedule().active(t);
    const double span = barrier - t;
    const auto full_steps = static_cast<long>(std::floor(span / h + 1e-9));
    const double remainder = span - static_cast<double>(full_steps) * h;
    const long n_steps = full_steps + (remainder > 1e-12 ? 1 : 0);
    const double start = t;
    for (long k = 0; k < n_steps; ++k) {
      const double step =
          (k < full_steps) ? h : remainder;  // final partial step
      sys.rhs(active, z, k1);
      sys.rhs(active, z + (step / 2) * k1, k2);
      sys.rhs(active, z + (step / 2) * k2, k3);
      sys.rhs(active, z + step * k3, k4);
      z += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
      t = (k + 1 < n_steps) ? start + (k + 1) * h : barrier;
      check_finite(z, t);
      times.push_back(t);
      samples.push_back(z);
    }
    t = barrier;
  }

  Trajectory traj;
  traj.times = std::move(times);
  const auto n_samples = static_cast<Eigen::Index>(traj.times.size());
  traj.states.resize(n_samples, sys.layout().total);
  traj.outputs.resize(n_samples, (sys.followers() + 1) * sys.output_dim());
  traj.errors.resize(n_samples, sys.followers() * sys.output_dim());
  for (Eigen::Index k = 0; k < n_samples; ++k) {
    traj.states.row(k) = samples[static_cast<std::size_t>(k)];
    traj.outputs.row(k) = sys.outputs(samples[static_cast<std::size_t>(k)]);
    traj.errors.row(k) = sys.errors(samples[static_cast<std::size_t>(k)]);
  }
  return traj;
}

Vector max_error_after(const Trajectory& traj, double T,
                       Eigen::Index output_dim) {
  const auto n_agents =
      static_cast<Eigen::Index>(traj.errors.cols() / output_dim);
  Vector worst = Vector::Zero(n_agents);
  bool any = false;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] < T - 1e-12) continue;
    any = true;
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      const double e = traj.errors.row(static_cast<Eigen::Index>(k))
                           .segment(i * output_dim, output_dim)
                           .cwiseAbs()
                           .maxCoeff();
      worst(i) = std::max(worst(i), e);
    }
  }
  if (!any)
    throw ValidationError("max_error_after: no samples at or after T = " +
                          std::to_string(T));
  return worst;
}

std::vector<std::optional<double>> convergence_time(const Trajectory& traj,
                                                    double tol,
                                                    Eigen::Index output_dim) {
  if (!(tol > 0.0))
    throw ValidationError("convergence_time: tolerance must be positive");
  const auto n_agents =
      static_cast<Eigen::Index>(traj.errors.cols() / output_dim);
  const auto n_samples = static_cast<Eigen::Index>(traj.times.size());
  std::vector<std::optional<double>> out;
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    Eigen::Index last_bad = -1;
    for (Eigen::Index k = n_samples - 1; k >= 0; --k) {
      const double e = traj.errors.row(k)
                           .segment(i * output_dim, output_dim)
                           .cwiseAbs()
                           .maxCoeff();
      if (e > tol) {
        last_bad = k;
        break;
      }
    }
    if (last_bad < 0)
      out.emplace_back(0.0);
    else if (last_bad + 1 >= n_samples)
      out.emplace_back(std::nullopt);
    else
      out.emplace_back(traj.times[static_cast<std::size_t>(last_bad + 1)]);
  }
  return out;
}

ObserverErrorNorms observer_error_norms(const Trajectory& traj,
                                        const ClosedLoopSystem& sys) {
  if (sys.law() == ControlLaw::FullInformation)
    throw Error("observer_error_norms: the full-information law has no "
                "observer states");
  const auto& layout = sys.layout();
  const auto n_samples = static_cast<Eigen::Index>(traj.times.size());
  const auto n_agents = static_cast<Eigen::Index>(sys.followers());

  ObserverErrorNorms norms;
  const bool full_order = sys.law() == ControlLaw::FullOrder;
  if (full_order) norms.state.resize(n_samples, n_agents);
  norms.disturbance.resize(n_samples, n_agents);
  norms.reference.resize(n_samples, n_agents);

  for (Eigen::Index k = 0; k < n_samples; ++k) {
    const Vector z = traj.states.row(k);
    const Vector r = z.segment(layout.r.offset, layout.r.size);
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const Vector x = z.segment(layout.x[idx].offset, layout.x[idx].size);
      const Vector d = z.segment(layout.d[idx].offset, layout.d[idx].size);
      const Vector zeta =
          z.segment(layout.zeta[idx].offset, layout.zeta[idx].size);
      const Vector eta =
          z.segment(layout.eta[idx].offset, layout.eta[idx].size);
      if (full_order) {
        const Vector xi = z.segment(layout.xi[idx].offset, layout.xi[idx].size);
        norms.state(k, i) = (xi - x).norm();
        norms.disturbance(k, i) = (zeta - d).norm();
      } else {
        norms.disturbance(k, i) =
            (zeta - sys.gains().agents[idx].L * x - d).norm();
      }
      norms.reference(k, i) = (eta - r).norm();
    }
  }
  return norms;
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::string column_name(const std::string& base, Eigen::Index component,
                        Eigen::Index l) {
  if (l == 1) return base;
  return base + "_" + std::to_string(component + 1);
}

}  // namespace

void write_csv(const Trajectory& traj, const ClosedLoopSystem& sys,
               std::ostream& os, const CsvOptions& options) {
  const int every = std::max(1, options.every);
  const Eigen::Index l = sys.output_dim();
  const int n = sys.followers();

  if (options.seed) os << "# seed " << *options.seed << "\n";
  os << "# law " << to_string(sys.law()) << "\n";

  os << "t";
  for (Eigen::Index c = 0; c < l; ++c) os << "," << column_name("y0", c, l);
  for (int i = 1; i <= n; ++i)
    for (Eigen::Index c = 0; c < l; ++c)
      os << "," << column_name("y_" + std::to_string(i), c, l);
  for (int i = 1; i <= n; ++i)
    for (Eigen::Index c = 0; c < l; ++c)
      os << "," << column_name("e_" + std::to_string(i), c, l);

  ObserverErrorNorms norms;
  const bool with_norms =
      options.observer_norms && sys.law() != ControlLaw::FullInformation;
  if (with_norms) {
    norms = observer_error_norms(traj, sys);
    if (sys.law() == ControlLaw::FullOrder)
      for (int i = 1; i <= n; ++i) os << ",obs_state_err_" << i;
    for (int i = 1; i <= n; ++i) os << ",obs_dist_err_" << i;
    for (int i = 1; i <= n; ++i) os << ",obs_ref_err_" << i;
  }
  os << "\n";

  const auto n_samples = static_cast<Eigen::Index>(traj.times.size());
  for (Eigen::Index k = 0; k < n_samples; ++k) {
    if (k % every != 0 && k != n_samples - 1) continue;
    os << format_value(traj.times[static_cast<std::size_t>(k)]);
    for (Eigen::Index c = 0; c < traj.outputs.cols(); ++c)
      os << "," << format_value(traj.outputs(k, c));
    for (Eigen::Index c = 0; c < traj.errors.cols(); ++c)
      os << "," << format_value(traj.errors(k, c));
    if (with_norms) {
      if (sys.law() == ControlLaw::FullOrder)
        for (Eigen::Index i = 0; i < norms.state.cols(); ++i)
          os << "," << format_value(norms.state(k, i));
      for (Eigen::Index i = 0; i < norms.disturbance.cols(); ++i)
        os << "," << format_value(norms.disturbance(k, i));
      for (Eigen::Index i = 0; i < norms.reference.cols(); ++i)
        os << "," << format_value(norms.reference(k, i));
    }
    os << "\n";
  }
}

}  // namespace dobcoord::sim
