#pragma once

#include <utility>
#include <vector>

#include "vinit/geometry.hpp"
#include "vinit/image.hpp"
#include "vinit/state.hpp"

namespace vinit {

/// One sampled mono-depth value tied to a feature observation.
struct DepthMeasurement {
  int feature = -1;   ///< index into the window's feature list
  int keyframe = -1;
  double d = 0.0;     ///< raw model inverse depth at the feature pixel
  double lambda = 1.0;  ///< edge-awareness weight, in (0, 1]
};

struct DepthResidualValue {
  double value = 0.0;
  bool saturated = false;  ///< log argument was clamped at 1e-6
};

/// log((a*d + b) * depth-of-feature-in-target-camera), the temporal
/// consistency error between the affine-corrected model depth and the
/// feature's estimated depth.
DepthResidualValue depth_residual(const DepthMeasurement& m,
                                  const ScaleShift& s_k, const Feature& f,
                                  const Pose& anchor_pose,
                                  const Pose& target_pose,
                                  const Pose& extrinsics);

struct DepthResidualJacobians {
  double residual = 0.0;
  bool saturated = false;
  bool same_frame = false;
  Eigen::RowVector3d d_anchor_theta = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d d_anchor_p = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d d_target_theta = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d d_target_p = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d d_uvw = Eigen::RowVector3d::Zero();
  double d_s = 0.0;
  double d_b = 0.0;
};

DepthResidualJacobians depth_residual_jacobians(const DepthMeasurement& m,
                                                const ScaleShift& s_k,
                                                const Feature& f,
                                                const Pose& anchor_pose,
                                                const Pose& target_pose,
                                                const Pose& extrinsics);

/// [1 - a, -b]; pulls the affine correction toward the regime the depth
/// model was trained in. Whitening is applied by the solver.
Vec2 scale_shift_prior_residual(const ScaleShift& s_k);

struct BilateralParams {
  int radius = 2;             ///< 5x5 window
  double sigma_spatial = 2.0;  ///< pixels
  double sigma_range = 0.1;    ///< on values normalized to [0, 1]
};

/// Bilateral-filtered value at one pixel, computed on the raster normalized
/// to [0, 1] by (minv, maxv); borders replicate.
double bilateral_filtered(const Raster<float>& raster, int x, int y,
                          const BilateralParams& params, double minv,
                          double maxv);

/// |4-neighbor Laplacian| of the bilateral-filtered, normalized raster.
double filtered_laplacian_abs(const Raster<float>& raster, int x, int y,
                              const BilateralParams& params, double minv,
                              double maxv);

/// exp(-(alpha * |lap_image| + |lap_depth|)); the image term is dropped when
/// no intensity image is available.
double edge_weight_from_laplacians(double lap_image_abs, double lap_depth_abs,
                                   double alpha, bool has_image);

/// Samples the edge-awareness weight for feature pixels of one keyframe.
/// Filtering is evaluated lazily around the requested pixels.
class EdgeWeightSampler {
 public:
  EdgeWeightSampler(const Image* image, const DepthMap& depth, double alpha,
                    const BilateralParams& params = {});

  /// Weight at the nearest pixel; throws OutOfBounds outside the raster.
  double weight(const Vec2& pixel) const;

 private:
  const Image* image_;
  const DepthMap& depth_;
  double alpha_;
  BilateralParams params_;
  double image_min_ = 0.0, image_max_ = 0.0;
  double depth_min_ = 0.0, depth_max_ = 0.0;
};

/// One-shot convenience over EdgeWeightSampler.
double edge_weight(const Image* image, const DepthMap& depth,
                   const Vec2& pixel, double alpha);

/// Depth residuals grouped for outlier rejection, one entry per
/// (feature, keyframe) measurement.
struct DepthResidualTable {
  struct Entry {
    int feature = -1;
    int keyframe = -1;
    double residual = 0.0;
  };
  std::vector<Entry> entries;
};

struct OutlierRejection {
  /// Surviving (feature, keyframe) measurements, in table order.
  std::vector<std::pair<int, int>> inliers;
  /// 1: all rejected, 2: all accepted, 3: percentile cut applied.
  int branch = 0;
  std::vector<int> rejected_features;
  /// Per-feature spread statistics for features with >= 2 residuals.
  std::vector<int> scored_features;
  std::vector<double> sigma;
  double cut_value = 0.0;
};

/// Keeps the measurements whose features have temporally consistent
/// residuals. Features with fewer than two residuals are not scored and are
/// kept unless everything is rejected.
OutlierRejection reject_outliers(const DepthResidualTable& table,
                                 double sigma_min, double sigma_max);

/// Nearest-rank percentile of a sample, p in [0, 100].
double percentile_nearest_rank(std::vector<double> values, double p);

}  // namespace vinit
