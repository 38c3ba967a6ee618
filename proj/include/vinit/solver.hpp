#pragma once

#include <string>
#include <variant>
#include <vector>

#include "vinit/geometry.hpp"
#include "vinit/imu.hpp"
#include "vinit/monodepth.hpp"
#include "vinit/state.hpp"
#include "vinit/vision.hpp"

namespace vinit {

/// Parameters a solve reads and updates in place.
struct Variables {
  std::vector<KeyframeState> states;
  std::vector<Feature> features;
  std::vector<ScaleShift> scale_shifts;  ///< empty when depth is disabled
};

struct SolveConfig {
  int max_iterations = 50;
  double cost_tolerance = 1e-8;
  double gradient_tolerance = 1e-10;
  double initial_damping = 1e-4;
};

enum class Termination {
  kCostConverged,
  kGradientConverged,
  kMaxIterations,
  kDampingOverflow,
};

std::string to_string(Termination reason);

struct CostBreakdown {
  double inertial = 0.0;
  double visual = 0.0;
  double depth = 0.0;
  double bias_prior = 0.0;
  double scale_shift_prior = 0.0;

  double total() const {
    return inertial + visual + depth + bias_prior + scale_shift_prior;
  }
};

struct SolveReport {
  int iterations = 0;       ///< accepted steps
  int attempted_steps = 0;  ///< including rejections
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double gradient_norm = 0.0;  ///< at the final point
  Termination termination = Termination::kMaxIterations;
  CostBreakdown costs;  ///< at the final point
  int saturated_depth_residuals = 0;
  int residuals_dropped_at_seed = 0;
};

/// Nonlinear least-squares problem over keyframe states, inverse-depth
/// features, and per-keyframe scale-shift blocks. Rotations are optimized on
/// their 3-dof tangent space with right-multiplied increments; a keyframe can
/// additionally have its yaw direction held fixed for gauge freedom.
class Problem {
 public:
  Problem(const PinholeCamera& camera, const Pose& extrinsics,
          int n_keyframes, int n_features, int n_scale_shifts);

  void add_inertial(int i, int j, const PreintegratedImu& pre,
                    const Mat15& sqrt_info, const Vec3& gravity);
  void add_reprojection(int feature, int keyframe, const Vec2& pixel,
                        double pixel_sigma, double huber_delta);
  void add_depth(const DepthMeasurement& m, double huber_delta);
  void add_bias_prior(int keyframe, const Vec3& prior_ba, const Vec3& prior_bg,
                      double sigma_ba, double sigma_bg);
  void add_scale_shift_prior(int keyframe, double sigma_scale,
                             double sigma_shift);

  void set_position_constant(int keyframe);
  void set_yaw_constant(int keyframe);
  void set_feature_constant(int feature);

  /// Robust Levenberg-Marquardt; accepted steps strictly decrease the cost.
  /// Residual blocks that are invalid at the seed are dropped permanently;
  /// steps that would invalidate an active block are rejected.
  SolveReport solve(Variables& vars, const SolveConfig& config);

  /// Natural log of the condition number of J^T W J, from the singular
  /// values of the whitened robust-weighted Jacobian with gauge-fixed
  /// columns removed. Throws RankDeficient on an exactly singular spectrum.
  double hessian_log_condition(const Variables& vars) const;

  /// Robust cost and per-family breakdown at the given point.
  CostBreakdown evaluate_cost(const Variables& vars) const;

  size_t residual_count() const { return residuals_.size(); }
  int active_residual_count() const;

 private:
  struct InertialBlock {
    int i, j;
    PreintegratedImu pre;
    Mat15 sqrt_info;
    Vec3 gravity;
  };
  struct ReprojBlock {
    int feature, keyframe;
    Vec2 pixel;
    double inv_sigma, delta;
  };
  struct DepthBlock {
    DepthMeasurement m;
    double delta;
  };
  struct BiasPriorBlock {
    int keyframe;
    Vec3 ba, bg;
    double inv_sigma_ba, inv_sigma_bg;
  };
  struct SsPriorBlock {
    int keyframe;
    double inv_sigma_a, inv_sigma_b;
  };
  using Residual = std::variant<InertialBlock, ReprojBlock, DepthBlock,
                                BiasPriorBlock, SsPriorBlock>;

  struct Layout;
  struct Linearization;

  Layout make_layout() const;
  std::vector<Mat3> rotation_bases(const Variables& vars,
                                   const Layout& layout) const;

  /// Returns false when an active residual cannot be evaluated at vars.
  bool evaluate(const Variables& vars, const Layout& layout,
                const std::vector<Mat3>& bases, bool want_hessian,
                bool want_rows, bool drop_invalid, Linearization& lin) const;

  void apply_step(Variables& vars, const Layout& layout,
                  const std::vector<Mat3>& bases,
                  const Eigen::VectorXd& delta) const;

  PinholeCamera camera_;
  Pose extrinsics_;
  int n_keyframes_;
  int n_features_;
  int n_scale_shifts_;

  std::vector<Residual> residuals_;
  mutable std::vector<char> active_;  // parallel to residuals_

  std::vector<char> position_constant_;
  std::vector<char> yaw_constant_;
  std::vector<char> feature_constant_;
};

}  // namespace vinit
