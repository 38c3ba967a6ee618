#include "vinit/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace vinit {

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::kCostConverged: return "cost_converged";
    case Termination::kGradientConverged: return "gradient_converged";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kDampingOverflow: return "damping_overflow";
  }
  return "unknown";
}

namespace {
constexpr double kMinInverseDepth = 1e-9;
constexpr double kMaxDamping = 1e16;
}  // namespace

struct Problem::Layout {
  std::vector<int> rot, pos, vel, ba, bg, rot_dim;
  std::vector<int> feat, ss;
  int cols = 0;
  int rows = 0;
};

struct Problem::Linearization {
  double cost = 0.0;
  CostBreakdown costs;
  int saturated = 0;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd rows;  // whitened robust-scaled Jacobian
  int rows_used = 0;
};

Problem::Problem(const PinholeCamera& camera, const Pose& extrinsics,
                 int n_keyframes, int n_features, int n_scale_shifts)
    : camera_(camera),
      extrinsics_(extrinsics),
      n_keyframes_(n_keyframes),
      n_features_(n_features),
      n_scale_shifts_(n_scale_shifts),
      position_constant_(n_keyframes, 0),
      yaw_constant_(n_keyframes, 0),
      feature_constant_(n_features, 0) {}

void Problem::add_inertial(int i, int j, const PreintegratedImu& pre,
                           const Mat15& sqrt_info, const Vec3& gravity) {
  if (i < 0 || j < 0 || i >= n_keyframes_ || j >= n_keyframes_) {
    throw Error("inertial residual references an unknown keyframe");
  }
  residuals_.push_back(InertialBlock{i, j, pre, sqrt_info, gravity});
  active_.push_back(1);
}

void Problem::add_reprojection(int feature, int keyframe, const Vec2& pixel,
                               double pixel_sigma, double huber_delta) {
  if (feature < 0 || feature >= n_features_ || keyframe < 0 ||
      keyframe >= n_keyframes_) {
    throw Error("reprojection residual references an unknown block");
  }
  residuals_.push_back(
      ReprojBlock{feature, keyframe, pixel, 1.0 / pixel_sigma, huber_delta});
  active_.push_back(1);
}

void Problem::add_depth(const DepthMeasurement& m, double huber_delta) {
  if (m.feature < 0 || m.feature >= n_features_ || m.keyframe < 0 ||
      m.keyframe >= n_scale_shifts_) {
    throw Error("depth residual references an unknown block");
  }
  residuals_.push_back(DepthBlock{m, huber_delta});
  active_.push_back(1);
}

void Problem::add_bias_prior(int keyframe, const Vec3& prior_ba,
                             const Vec3& prior_bg, double sigma_ba,
                             double sigma_bg) {
  residuals_.push_back(
      BiasPriorBlock{keyframe, prior_ba, prior_bg, 1.0 / sigma_ba,
                     1.0 / sigma_bg});
  active_.push_back(1);
}

void Problem::add_scale_shift_prior(int keyframe, double sigma_scale,
                                    double sigma_shift) {
  if (keyframe < 0 || keyframe >= n_scale_shifts_) {
    throw Error("scale-shift prior references an unknown block");
  }
  residuals_.push_back(
      SsPriorBlock{keyframe, 1.0 / sigma_scale, 1.0 / sigma_shift});
  active_.push_back(1);
}

void Problem::set_position_constant(int keyframe) {
  position_constant_.at(keyframe) = 1;
}

void Problem::set_yaw_constant(int keyframe) {
  yaw_constant_.at(keyframe) = 1;
}

void Problem::set_feature_constant(int feature) {
  feature_constant_.at(feature) = 1;
}

int Problem::active_residual_count() const {
  int n = 0;
  for (char a : active_) n += a;
  return n;
}

Problem::Layout Problem::make_layout(const Variables& vars) const {
  Layout layout;
  layout.rot.assign(n_keyframes_, -1);
  layout.pos.assign(n_keyframes_, -1);
  layout.vel.assign(n_keyframes_, -1);
  layout.ba.assign(n_keyframes_, -1);
  layout.bg.assign(n_keyframes_, -1);
  layout.rot_dim.assign(n_keyframes_, 0);
  layout.feat.assign(n_features_, -1);
  layout.ss.assign(n_scale_shifts_, -1);

  std::vector<char> ref_pose(n_keyframes_, 0), ref_vel(n_keyframes_, 0),
      ref_ba(n_keyframes_, 0), ref_bg(n_keyframes_, 0),
      ref_feat(n_features_, 0), ref_ss(n_scale_shifts_, 0);

  for (size_t idx = 0; idx < residuals_.size(); ++idx) {
    if (!active_[idx]) continue;
    std::visit(
        [&](const auto& block) {
          using T = std::decay_t<decltype(block)>;
          if constexpr (std::is_same_v<T, InertialBlock>) {
            for (int k : {block.i, block.j}) {
              ref_pose[k] = ref_vel[k] = ref_ba[k] = ref_bg[k] = 1;
            }
          } else if constexpr (std::is_same_v<T, ReprojBlock>) {
            ref_feat[block.feature] = 1;
            ref_pose[block.keyframe] = 1;
            ref_pose[vars.features[block.feature].anchor_keyframe] = 1;
          } else if constexpr (std::is_same_v<T, DepthBlock>) {
            ref_feat[block.m.feature] = 1;
            ref_pose[block.m.keyframe] = 1;
            ref_pose[vars.features[block.m.feature].anchor_keyframe] = 1;
            ref_ss[block.m.keyframe] = 1;
          } else if constexpr (std::is_same_v<T, BiasPriorBlock>) {
            ref_ba[block.keyframe] = 1;
            ref_bg[block.keyframe] = 1;
          } else if constexpr (std::is_same_v<T, SsPriorBlock>) {
            ref_ss[block.keyframe] = 1;
          }
        },
        residuals_[idx]);
  }

  int col = 0;
  for (int k = 0; k < n_keyframes_; ++k) {
    if (ref_pose[k]) {
      layout.rot_dim[k] = yaw_constant_[k] ? 2 : 3;
      layout.rot[k] = col;
      col += layout.rot_dim[k];
      if (!position_constant_[k]) {
        layout.pos[k] = col;
        col += 3;
      }
    }
    if (ref_vel[k]) {
      layout.vel[k] = col;
      col += 3;
    }
    if (ref_ba[k]) {
      layout.ba[k] = col;
      col += 3;
    }
    if (ref_bg[k]) {
      layout.bg[k] = col;
      col += 3;
    }
  }
  for (int i = 0; i < n_features_; ++i) {
    if (ref_feat[i] && !feature_constant_[i]) {
      layout.feat[i] = col;
      col += 3;
    }
  }
  for (int k = 0; k < n_scale_shifts_; ++k) {
    if (ref_ss[k]) {
      layout.ss[k] = col;
      col += 2;
    }
  }
  layout.cols = col;

  int rows = 0;
  for (size_t idx = 0; idx < residuals_.size(); ++idx) {
    if (!active_[idx]) continue;
    rows += std::visit(
        [](const auto& block) -> int {
          using T = std::decay_t<decltype(block)>;
          if constexpr (std::is_same_v<T, InertialBlock>) return 15;
          if constexpr (std::is_same_v<T, ReprojBlock>) return 2;
          if constexpr (std::is_same_v<T, DepthBlock>) return 1;
          if constexpr (std::is_same_v<T, BiasPriorBlock>) return 6;
          return 2;
        },
        residuals_[idx]);
  }
  layout.rows = rows;
  return layout;
}

std::vector<Mat3> Problem::rotation_bases(const Variables& vars,
                                          const Layout& layout) const {
  std::vector<Mat3> bases(n_keyframes_, Mat3::Identity());
  for (int k = 0; k < n_keyframes_; ++k) {
    if (layout.rot_dim[k] == 2) {
      // Kill the tangent direction that rotates about the global z axis.
      const Vec3 d = vars.states[k].q.matrix().transpose() * Vec3::UnitZ();
      Vec3 seed = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
      const Vec3 b1 = d.cross(seed).normalized();
      const Vec3 b2 = d.cross(b1).normalized();
      Mat3 basis = Mat3::Zero();
      basis.col(0) = b1;
      basis.col(1) = b2;
      bases[k] = basis;
    }
  }
  return bases;
}

namespace {

struct Contrib {
  int col = -1;
  int dim = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3, 0, 15, 3> jac;
};

}  // namespace

bool Problem::evaluate(const Variables& vars, const Layout& layout,
                       const std::vector<Mat3>& bases, bool want_hessian,
                       bool want_rows, bool drop_invalid,
                       Linearization& lin) const {
  lin.cost = 0.0;
  lin.costs = CostBreakdown{};
  lin.saturated = 0;
  const bool want_jac = want_hessian || want_rows;
  if (want_hessian) {
    lin.hessian = Eigen::MatrixXd::Zero(layout.cols, layout.cols);
    lin.gradient = Eigen::VectorXd::Zero(layout.cols);
  }
  if (want_rows) {
    lin.rows = Eigen::MatrixXd::Zero(layout.rows, layout.cols);
  }
  lin.rows_used = 0;

  std::vector<Contrib> contribs;
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 15, 1> r_scaled;

  const auto commit = [&](double scale) {
    if (!want_jac) return;
    const int m = static_cast<int>(r_scaled.size());
    if (want_hessian) {
      for (const auto& a : contribs) {
        if (a.col < 0) continue;
        lin.gradient.segment(a.col, a.dim).noalias() +=
            scale * scale * a.jac.leftCols(a.dim).transpose() * r_scaled;
        for (const auto& b : contribs) {
          if (b.col < 0) continue;
          lin.hessian.block(a.col, b.col, a.dim, b.dim).noalias() +=
              scale * scale * a.jac.leftCols(a.dim).transpose() *
              b.jac.leftCols(b.dim);
        }
      }
    }
    if (want_rows) {
      for (const auto& a : contribs) {
        if (a.col < 0) continue;
        lin.rows.block(lin.rows_used, a.col, m, a.dim) =
            scale * a.jac.leftCols(a.dim);
      }
      lin.rows_used += m;
    }
  };

  // Adds a 3-dof rotation contribution through the gauge basis of keyframe k.
  const auto rot_contrib = [&](int k, const Eigen::Matrix<double, Eigen::Dynamic, 3>& j_theta) {
    Contrib c;
    c.col = layout.rot[k];
    c.dim = layout.rot_dim[k];
    if (c.col >= 0) {
      c.jac.resize(j_theta.rows(), 3);
      c.jac.setZero();
      c.jac.leftCols(c.dim) = j_theta * bases[k].leftCols(c.dim);
    }
    return c;
  };
  const auto plain_contrib = [&](int col, const Eigen::Matrix<double, Eigen::Dynamic, 3>& j) {
    Contrib c;
    c.col = col;
    c.dim = col >= 0 ? static_cast<int>(j.cols()) : 0;
    if (col >= 0) c.jac = j;
    return c;
  };

  bool all_valid = true;
  for (size_t idx = 0; idx < residuals_.size(); ++idx) {
    if (!active_[idx]) continue;
    contribs.clear();
    bool valid = true;

    const bool ok = std::visit(
        [&](const auto& block) -> bool {
          using T = std::decay_t<decltype(block)>;
          if constexpr (std::is_same_v<T, InertialBlock>) {
            const KeyframeState& xi = vars.states[block.i];
            const KeyframeState& xj = vars.states[block.j];
            Vec15 r;
            InertialJacobians jac;
            if (want_jac) {
              jac = inertial_residual_jacobians(xi, xj, block.pre,
                                                block.gravity);
              r = jac.residual;
            } else {
              r = inertial_residual(xi, xj, block.pre, block.gravity);
            }
            r_scaled = block.sqrt_info * r;
            const double c = r_scaled.squaredNorm();
            lin.costs.inertial += c;
            if (want_jac) {
              const Mat15 ji = block.sqrt_info * jac.d_xi;
              const Mat15 jj = block.sqrt_info * jac.d_xj;
              for (int side = 0; side < 2; ++side) {
                const int k = side == 0 ? block.i : block.j;
                const Mat15& j = side == 0 ? ji : jj;
                contribs.push_back(rot_contrib(k, j.middleCols<3>(0)));
                contribs.push_back(plain_contrib(layout.pos[k], j.middleCols<3>(3)));
                contribs.push_back(plain_contrib(layout.vel[k], j.middleCols<3>(6)));
                contribs.push_back(plain_contrib(layout.ba[k], j.middleCols<3>(9)));
                contribs.push_back(plain_contrib(layout.bg[k], j.middleCols<3>(12)));
              }
            }
            commit(1.0);
            return true;
          } else if constexpr (std::is_same_v<T, ReprojBlock>) {
            const Feature& f = vars.features[block.feature];
            if (f.w <= kMinInverseDepth) {
              valid = false;
              return false;
            }
            const int anchor = f.anchor_keyframe;
            const ReprojectionJacobians jac = reprojection_residual_jacobians(
                f, block.pixel, vars.states[anchor],
                vars.states[block.keyframe], extrinsics_, camera_);
            if (!jac.valid) {
              valid = false;
              return false;
            }
            r_scaled = block.inv_sigma * jac.residual;
            const double sq = r_scaled.squaredNorm();
            const double w = huber_weight(sq, block.delta);
            lin.costs.visual += huber_rho(sq, block.delta);
            if (want_jac && !jac.same_frame) {
              contribs.push_back(rot_contrib(
                  anchor, (block.inv_sigma * jac.d_anchor_theta).eval()));
              contribs.push_back(plain_contrib(
                  layout.pos[anchor], (block.inv_sigma * jac.d_anchor_p).eval()));
              contribs.push_back(rot_contrib(
                  block.keyframe, (block.inv_sigma * jac.d_target_theta).eval()));
              contribs.push_back(plain_contrib(
                  layout.pos[block.keyframe],
                  (block.inv_sigma * jac.d_target_p).eval()));
            }
            if (want_jac) {
              contribs.push_back(plain_contrib(
                  layout.feat[block.feature],
                  (block.inv_sigma * jac.d_uvw).eval()));
            }
            commit(std::sqrt(w));
            return true;
          } else if constexpr (std::is_same_v<T, DepthBlock>) {
            const Feature& f = vars.features[block.m.feature];
            if (f.w <= kMinInverseDepth) {
              valid = false;
              return false;
            }
            const int anchor = f.anchor_keyframe;
            const DepthResidualJacobians jac = depth_residual_jacobians(
                block.m, vars.scale_shifts[block.m.keyframe], f,
                vars.states[anchor].pose(), vars.states[block.m.keyframe].pose(),
                extrinsics_);
            if (jac.saturated) ++lin.saturated;
            r_scaled.resize(1);
            r_scaled(0) = jac.residual;
            const double sq = jac.residual * jac.residual;
            const double w = block.m.lambda * huber_weight(sq, block.delta);
            lin.costs.depth += block.m.lambda * huber_rho(sq, block.delta);
            if (want_jac && !jac.saturated) {
              if (!jac.same_frame) {
                contribs.push_back(rot_contrib(anchor, jac.d_anchor_theta));
                contribs.push_back(
                    plain_contrib(layout.pos[anchor], jac.d_anchor_p));
                contribs.push_back(
                    rot_contrib(block.m.keyframe, jac.d_target_theta));
                contribs.push_back(plain_contrib(layout.pos[block.m.keyframe],
                                                 jac.d_target_p));
              }
              contribs.push_back(
                  plain_contrib(layout.feat[block.m.feature], jac.d_uvw));
              Eigen::Matrix<double, 1, 3> j_ss;
              j_ss << jac.d_s, jac.d_b, 0.0;
              Contrib c;
              c.col = layout.ss[block.m.keyframe];
              c.dim = c.col >= 0 ? 2 : 0;
              if (c.col >= 0) c.jac = j_ss;
              contribs.push_back(c);
            }
            commit(std::sqrt(w));
            return true;
          } else if constexpr (std::is_same_v<T, BiasPriorBlock>) {
            const KeyframeState& x = vars.states[block.keyframe];
            Vec6 r = bias_prior_residual(x, block.ba, block.bg);
            r.head<3>() *= block.inv_sigma_ba;
            r.tail<3>() *= block.inv_sigma_bg;
            r_scaled = r;
            lin.costs.bias_prior += r.squaredNorm();
            if (want_jac) {
              Eigen::Matrix<double, 6, 3> j_ba = Eigen::Matrix<double, 6, 3>::Zero();
              j_ba.topRows<3>() = block.inv_sigma_ba * Mat3::Identity();
              Eigen::Matrix<double, 6, 3> j_bg = Eigen::Matrix<double, 6, 3>::Zero();
              j_bg.bottomRows<3>() = block.inv_sigma_bg * Mat3::Identity();
              contribs.push_back(plain_contrib(layout.ba[block.keyframe], j_ba));
              contribs.push_back(plain_contrib(layout.bg[block.keyframe], j_bg));
            }
            commit(1.0);
            return true;
          } else {
            const SsPriorBlock& prior = block;
            const ScaleShift& ss = vars.scale_shifts[prior.keyframe];
            Vec2 r = scale_shift_prior_residual(ss);
            r(0) *= prior.inv_sigma_a;
            r(1) *= prior.inv_sigma_b;
            r_scaled = r;
            lin.costs.scale_shift_prior += r.squaredNorm();
            if (want_jac) {
              Eigen::Matrix<double, 2, 3> j = Eigen::Matrix<double, 2, 3>::Zero();
              j(0, 0) = -prior.inv_sigma_a * scale_from_free_derivative(ss.s);
              j(1, 1) = -prior.inv_sigma_b;
              Contrib c;
              c.col = layout.ss[prior.keyframe];
              c.dim = c.col >= 0 ? 2 : 0;
              if (c.col >= 0) c.jac = j;
              contribs.push_back(c);
            }
            commit(1.0);
            return true;
          }
        },
        residuals_[idx]);

    if (!ok && !valid) {
      if (drop_invalid) {
        active_[idx] = 0;
      } else {
        all_valid = false;
        break;
      }
    }
  }

  lin.cost = lin.costs.total();
  return all_valid;
}

void Problem::apply_step(Variables& vars, const Layout& layout,
                         const std::vector<Mat3>& bases,
                         const Eigen::VectorXd& delta) const {
  for (int k = 0; k < n_keyframes_; ++k) {
    KeyframeState& x = vars.states[k];
    if (layout.rot[k] >= 0) {
      const int dim = layout.rot_dim[k];
      const Vec3 d_theta =
          bases[k].leftCols(dim) * delta.segment(layout.rot[k], dim);
      x.q = x.q.retract(d_theta);
    }
    if (layout.pos[k] >= 0) x.p += delta.segment<3>(layout.pos[k]);
    if (layout.vel[k] >= 0) x.v += delta.segment<3>(layout.vel[k]);
    if (layout.ba[k] >= 0) x.ba += delta.segment<3>(layout.ba[k]);
    if (layout.bg[k] >= 0) x.bg += delta.segment<3>(layout.bg[k]);
  }
  for (int i = 0; i < n_features_; ++i) {
    if (layout.feat[i] >= 0) {
      Feature& f = vars.features[i];
      f.u += delta(layout.feat[i]);
      f.v += delta(layout.feat[i] + 1);
      f.w += delta(layout.feat[i] + 2);
    }
  }
  for (int k = 0; k < n_scale_shifts_; ++k) {
    if (layout.ss[k] >= 0) {
      vars.scale_shifts[k].s += delta(layout.ss[k]);
      vars.scale_shifts[k].b += delta(layout.ss[k] + 1);
    }
  }
}

SolveReport Problem::solve(Variables& vars, const SolveConfig& config) {
  SolveReport report;
  active_.assign(residuals_.size(), 1);

  // Drop residuals that cannot be evaluated at the seed.
  Layout probe_layout;  // columns unused for a cost-only pass
  probe_layout.rot.assign(n_keyframes_, -1);
  probe_layout.pos.assign(n_keyframes_, -1);
  probe_layout.vel.assign(n_keyframes_, -1);
  probe_layout.ba.assign(n_keyframes_, -1);
  probe_layout.bg.assign(n_keyframes_, -1);
  probe_layout.rot_dim.assign(n_keyframes_, 0);
  probe_layout.feat.assign(n_features_, -1);
  probe_layout.ss.assign(n_scale_shifts_, -1);
  Linearization seed;
  evaluate(vars, probe_layout, {}, false, false, true, seed);
  report.residuals_dropped_at_seed =
      static_cast<int>(residuals_.size()) - active_residual_count();

  const Layout layout = make_layout(vars);
  if (layout.cols == 0) {
    report.initial_cost = report.final_cost = seed.cost;
    report.costs = seed.costs;
    report.termination = Termination::kCostConverged;
    return report;
  }

  std::vector<Mat3> bases = rotation_bases(vars, layout);
  Linearization lin;
  evaluate(vars, layout, bases, true, false, false, lin);
  report.initial_cost = lin.cost;

  double cost = lin.cost;
  double mu = config.initial_damping;
  report.termination = Termination::kMaxIterations;

  while (report.iterations < config.max_iterations) {
    const double grad_norm = 2.0 * lin.gradient.norm();
    if (grad_norm < config.gradient_tolerance) {
      report.termination = Termination::kGradientConverged;
      break;
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = lin.hessian;
      damped.diagonal() += mu * lin.hessian.diagonal().cwiseMax(1e-12);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      Eigen::VectorXd step;
      bool solvable = ldlt.info() == Eigen::Success;
      if (solvable) {
        step = ldlt.solve(-lin.gradient);
        solvable = step.allFinite();
      }
      ++report.attempted_steps;

      if (solvable) {
        Variables candidate = vars;
        apply_step(candidate, layout, bases, step);
        bool valid = true;
        for (int i = 0; i < n_features_ && valid; ++i) {
          if (layout.feat[i] >= 0 &&
              candidate.features[i].w <= kMinInverseDepth) {
            valid = false;
          }
        }
        Linearization trial;
        if (valid) {
          valid = evaluate(candidate, layout, bases, false, false, false, trial);
        }
        if (valid && trial.cost < cost) {
          vars = std::move(candidate);
          const double previous = cost;
          cost = trial.cost;
          mu = std::max(mu / 3.0, 1e-18);
          ++report.iterations;
          bases = rotation_bases(vars, layout);
          evaluate(vars, layout, bases, true, false, false, lin);
          accepted = true;
          if (previous - cost <
              config.cost_tolerance * std::max(previous, 1e-300)) {
            report.termination = Termination::kCostConverged;
            report.iterations = report.iterations;  // fallthrough to done
            goto done;
          }
          break;
        }
      }

      mu *= 10.0;
      if (mu > kMaxDamping) {
        if (!solvable) {
          throw NumericalFailure(
              "normal equations remained unsolvable at maximum damping");
        }
        report.termination = Termination::kDampingOverflow;
        goto done;
      }
    }
  }

done:
  report.final_cost = cost;
  report.costs = lin.costs;
  report.saturated_depth_residuals = lin.saturated;
  report.gradient_norm = 2.0 * lin.gradient.norm();
  return report;
}

CostBreakdown Problem::evaluate_cost(const Variables& vars) const {
  Layout probe_layout;
  probe_layout.rot.assign(n_keyframes_, -1);
  probe_layout.pos.assign(n_keyframes_, -1);
  probe_layout.vel.assign(n_keyframes_, -1);
  probe_layout.ba.assign(n_keyframes_, -1);
  probe_layout.bg.assign(n_keyframes_, -1);
  probe_layout.rot_dim.assign(n_keyframes_, 0);
  probe_layout.feat.assign(n_features_, -1);
  probe_layout.ss.assign(n_scale_shifts_, -1);
  Linearization lin;
  if (!evaluate(vars, probe_layout, {}, false, false, false, lin)) {
    throw NumericalFailure("cost evaluation hit an invalid residual");
  }
  return lin.costs;
}

double Problem::hessian_log_condition(const Variables& vars) const {
  const Layout layout = make_layout(vars);
  if (layout.cols == 0) {
    throw RankDeficient("problem has no free parameters");
  }
  if (layout.rows < layout.cols) {
    throw RankDeficient("fewer residual rows than free parameters");
  }
  const std::vector<Mat3> bases = rotation_bases(vars, layout);
  Linearization lin;
  if (!evaluate(vars, layout, bases, false, true, false, lin)) {
    throw NumericalFailure("Jacobian evaluation hit an invalid residual");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(lin.rows.topRows(lin.rows_used));
  const auto& sv = svd.singularValues();
  const double s_max = sv(0);
  const double s_min = sv(sv.size() - 1);
  if (!(s_min > 1e-300)) {
    throw RankDeficient("whitened Jacobian is numerically rank deficient");
  }
  return 2.0 * (std::log(s_max) - std::log(s_min));
}

}  // namespace vinit
