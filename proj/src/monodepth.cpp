#include "vinit/monodepth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vinit {

namespace {
constexpr double kLogClamp = 1e-6;
}

DepthResidualValue depth_residual(const DepthMeasurement& m,
                                  const ScaleShift& s_k, const Feature& f,
                                  const Pose& anchor_pose,
                                  const Pose& target_pose,
                                  const Pose& extrinsics) {
  const double a = s_k.scale();
  const double z_model = a * m.d + s_k.b;
  const double omega =
      feature_point_in_camera(f, anchor_pose, target_pose, extrinsics).z();
  double arg = z_model * omega;
  DepthResidualValue out;
  if (arg < kLogClamp) {
    arg = kLogClamp;
    out.saturated = true;
  }
  out.value = std::log(arg);
  return out;
}

DepthResidualJacobians depth_residual_jacobians(const DepthMeasurement& m,
                                                const ScaleShift& s_k,
                                                const Feature& f,
                                                const Pose& anchor_pose,
                                                const Pose& target_pose,
                                                const Pose& extrinsics) {
  DepthResidualJacobians out;
  const double a = s_k.scale();
  const double z_model = a * m.d + s_k.b;
  const FeaturePointJacobians chain = feature_point_in_camera_jacobians(
      f, anchor_pose, target_pose, extrinsics);
  const double omega = chain.point_c.z();
  out.same_frame = chain.same_frame;

  const double arg = z_model * omega;
  if (arg < kLogClamp) {
    out.residual = std::log(kLogClamp);
    out.saturated = true;
    return out;  // flat region of the clamp: no gradient
  }
  out.residual = std::log(arg);

  const double inv_omega = 1.0 / omega;
  const Eigen::RowVector3d d_omega = Eigen::RowVector3d(0.0, 0.0, inv_omega);
  if (!chain.same_frame) {
    out.d_anchor_theta = d_omega * chain.d_anchor_theta;
    out.d_anchor_p = d_omega * chain.d_anchor_p;
    out.d_target_theta = d_omega * chain.d_target_theta;
    out.d_target_p = d_omega * chain.d_target_p;
  }
  out.d_uvw = d_omega * chain.d_uvw;
  out.d_s = m.d * scale_from_free_derivative(s_k.s) / z_model;
  out.d_b = 1.0 / z_model;
  return out;
}

Vec2 scale_shift_prior_residual(const ScaleShift& s_k) {
  return Vec2(1.0 - s_k.scale(), -s_k.b);
}

namespace {

double normalized_at(const Raster<float>& raster, int x, int y, double minv,
                     double inv_span) {
  x = std::clamp(x, 0, raster.width - 1);
  y = std::clamp(y, 0, raster.height - 1);
  return (static_cast<double>(raster.at(x, y)) - minv) * inv_span;
}

}  // namespace

double bilateral_filtered(const Raster<float>& raster, int x, int y,
                          const BilateralParams& params, double minv,
                          double maxv) {
  const double span = maxv - minv;
  const double inv_span = span > 0.0 ? 1.0 / span : 0.0;
  const double center = normalized_at(raster, x, y, minv, inv_span);
  const double inv_2ss = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
  const double inv_2sr = 1.0 / (2.0 * params.sigma_range * params.sigma_range);
  double acc = 0.0;
  double norm = 0.0;
  for (int dy = -params.radius; dy <= params.radius; ++dy) {
    for (int dx = -params.radius; dx <= params.radius; ++dx) {
      const double v = normalized_at(raster, x + dx, y + dy, minv, inv_span);
      const double dv = v - center;
      const double w = std::exp(-(dx * dx + dy * dy) * inv_2ss) *
                       std::exp(-dv * dv * inv_2sr);
      acc += w * v;
      norm += w;
    }
  }
  return acc / norm;
}

double filtered_laplacian_abs(const Raster<float>& raster, int x, int y,
                              const BilateralParams& params, double minv,
                              double maxv) {
  const auto filtered = [&](int px, int py) {
    px = std::clamp(px, 0, raster.width - 1);
    py = std::clamp(py, 0, raster.height - 1);
    return bilateral_filtered(raster, px, py, params, minv, maxv);
  };
  const double lap = filtered(x + 1, y) + filtered(x - 1, y) +
                     filtered(x, y + 1) + filtered(x, y - 1) -
                     4.0 * filtered(x, y);
  return std::abs(lap);
}

double edge_weight_from_laplacians(double lap_image_abs, double lap_depth_abs,
                                   double alpha, bool has_image) {
  const double exponent =
      (has_image ? alpha * lap_image_abs : 0.0) + lap_depth_abs;
  return std::exp(-exponent);
}

EdgeWeightSampler::EdgeWeightSampler(const Image* image, const DepthMap& depth,
                                     double alpha,
                                     const BilateralParams& params)
    : image_(image), depth_(depth), alpha_(alpha), params_(params) {
  const auto span = [](const auto& raster, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (float v : raster.values) {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
  };
  span(depth_, depth_min_, depth_max_);
  if (image_ != nullptr) {
    span(*image_, image_min_, image_max_);
  }
}

double EdgeWeightSampler::weight(const Vec2& pixel) const {
  const int x = static_cast<int>(std::lround(pixel.x()));
  const int y = static_cast<int>(std::lround(pixel.y()));
  if (!depth_.contains(x, y)) {
    throw OutOfBounds("edge weight requested outside the depth map");
  }
  const double lap_depth =
      filtered_laplacian_abs(depth_, x, y, params_, depth_min_, depth_max_);
  double lap_image = 0.0;
  if (image_ != nullptr) {
    lap_image =
        filtered_laplacian_abs(*image_, x, y, params_, image_min_, image_max_);
  }
  return edge_weight_from_laplacians(lap_image, lap_depth, alpha_,
                                     image_ != nullptr);
}

double edge_weight(const Image* image, const DepthMap& depth,
                   const Vec2& pixel, double alpha) {
  return EdgeWeightSampler(image, depth, alpha).weight(pixel);
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) {
    throw Error("percentile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const auto rank = static_cast<size_t>(
      std::max(1.0, std::ceil(p / 100.0 * n)));
  return values[std::min(rank, values.size()) - 1];
}

OutlierRejection reject_outliers(const DepthResidualTable& table,
                                 double sigma_min, double sigma_max) {
  OutlierRejection out;

  // Group residuals per feature, preserving first-appearance order.
  std::vector<int> features;
  std::vector<std::vector<double>> residuals;
  for (const auto& e : table.entries) {
    auto it = std::find(features.begin(), features.end(), e.feature);
    if (it == features.end()) {
      features.push_back(e.feature);
      residuals.emplace_back();
      it = features.end() - 1;
    }
    residuals[static_cast<size_t>(it - features.begin())].push_back(e.residual);
  }

  for (size_t i = 0; i < features.size(); ++i) {
    const auto& r = residuals[i];
    if (r.size() < 2) continue;
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    out.scored_features.push_back(features[i]);
    out.sigma.push_back(std::sqrt(ss / static_cast<double>(r.size() - 1)));
  }

  const auto accept_all = [&] {
    out.branch = 2;
    for (const auto& e : table.entries) {
      out.inliers.emplace_back(e.feature, e.keyframe);
    }
  };

  if (out.sigma.empty()) {
    // Nothing to score; keep everything.
    accept_all();
    return out;
  }

  if (percentile_nearest_rank(out.sigma, 25.0) > sigma_max) {
    out.branch = 1;
    out.rejected_features = features;
    return out;
  }
  if (percentile_nearest_rank(out.sigma, 85.0) < sigma_min) {
    accept_all();
    return out;
  }

  out.branch = 3;
  out.cut_value = percentile_nearest_rank(out.sigma, 85.0);
  std::vector<int> dropped;
  for (size_t i = 0; i < out.scored_features.size(); ++i) {
    if (out.sigma[i] >= out.cut_value) {
      dropped.push_back(out.scored_features[i]);
    }
  }
  out.rejected_features = dropped;
  for (const auto& e : table.entries) {
    if (std::find(dropped.begin(), dropped.end(), e.feature) == dropped.end()) {
      out.inliers.emplace_back(e.feature, e.keyframe);
    }
  }
  return out;
}

}  // namespace vinit
