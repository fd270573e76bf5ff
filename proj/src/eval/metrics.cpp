#include "cylsfm/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cylsfm/core/error.hpp"
#include "cylsfm/synthesis/view_synthesis.hpp"

namespace cylsfm {

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Tensor default_depth_mask(const Tensor& gt, const DepthBounds& bounds) {
  Tensor mask(gt.rows(), gt.cols(), 1);
  for (int r = 0; r < gt.rows(); ++r)
    for (int c = 0; c < gt.cols(); ++c) {
      const double g = gt(r, c);
      mask(r, c) = g >= bounds.d_min && g <= bounds.d_max ? 1.0 : 0.0;
    }
  return mask;
}

DepthMetrics depth_metrics(const Tensor& pred, const Tensor& gt, const Tensor& mask, bool median_scale) {
  require(pred.channels() == 1 && pred.same_shape(gt) && gt.same_shape(mask), ErrorCode::ShapeMismatch,
          "prediction, ground truth and mask must be single-channel maps of one size");
  std::vector<double> p, g;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (mask.data()[k] == 0.0) continue;
    p.push_back(pred.data()[k]);
    g.push_back(gt.data()[k]);
  }
  require(!g.empty(), ErrorCode::EmptyMask, "no valid pixels to evaluate");
  for (std::size_t k = 0; k < g.size(); ++k)
    require(p[k] > 0.0 && g[k] > 0.0 && std::isfinite(p[k]) && std::isfinite(g[k]), ErrorCode::NonPositiveDepth,
            "depth must be positive and finite on the mask");
  if (median_scale) {
    const double s = median(g) / median(p);
    for (double& v : p) v *= s;
  }
  DepthMetrics m;
  const double t1 = 1.25, t2 = t1 * t1, t3 = t2 * t1;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = p[k] - g[k];
    m.abs_rel += std::abs(d) / g[k];
    m.sq_rel += d * d / g[k];
    m.rmse += d * d;
    const double l = std::log(p[k]) - std::log(g[k]);
    m.rmse_log += l * l;
    const double ratio = std::max(p[k] / g[k], g[k] / p[k]);
    m.delta1 += ratio < t1 ? 1.0 : 0.0;
    m.delta2 += ratio < t2 ? 1.0 : 0.0;
    m.delta3 += ratio < t3 ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(g.size());
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse = std::sqrt(m.rmse / n);
  m.rmse_log = std::sqrt(m.rmse_log / n);
  m.delta1 /= n;
  m.delta2 /= n;
  m.delta3 /= n;
  return m;
}

double median_scale_factor(const Tensor& pred, const Tensor& gt, const Tensor& mask) {
  require(pred.channels() == 1 && pred.same_shape(gt) && gt.same_shape(mask), ErrorCode::ShapeMismatch,
          "prediction, ground truth and mask must be single-channel maps of one size");
  std::vector<double> p, g;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (mask.data()[k] == 0.0) continue;
    p.push_back(pred.data()[k]);
    g.push_back(gt.data()[k]);
  }
  require(!g.empty(), ErrorCode::EmptyMask, "no valid pixels to evaluate");
  return median(g) / median(p);
}

double seam_photometric_error(const Snippet& s, const Tensor& depth, std::span<const Pose6> poses, int band) {
  require(poses.size() == s.sources.size(), ErrorCode::LengthMismatch, "need one pose per source");
  require(band > 0 && 2 * band <= s.camera.width, ErrorCode::BadArgument, "seam band must fit in the image");
  double sum = 0.0;
  long count = 0;
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const SynthResult r = synthesize_view(s.sources[k], depth, poses[k], s.camera);
    for (int row = 0; row < s.camera.height; ++row)
      for (int c = 0; c < s.camera.width; ++c) {
        if (c >= band && c < s.camera.width - band) continue;
        if (r.valid(row, c) == 0.0) continue;
        for (int ch = 0; ch < s.target.channels(); ++ch) sum += std::abs(r.projected(row, c, ch) - s.target(row, c, ch));
        count += s.target.channels();
      }
  }
  require(count > 0, ErrorCode::EmptyMask, "no valid seam pixels");
  return sum / static_cast<double>(count);
}

AteReport ate(const std::vector<Trajectory>& pred, const std::vector<Trajectory>& gt) {
  require(pred.size() == gt.size(), ErrorCode::LengthMismatch, "prediction and ground truth snippet counts differ");
  AteReport rep;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const Trajectory& p = pred[s];
    const Trajectory& g = gt[s];
    require(p.size() == g.size() && !p.empty(), ErrorCode::LengthMismatch, "snippet trajectories differ in length");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const Eigen::Vector3d pk = p[k] - p[0];
      num += pk.dot(g[k] - g[0]);
      den += pk.squaredNorm();
    }
    const double scale = den > 0.0 ? num / den : 0.0;
    double err = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) err += (scale * (p[k] - p[0]) - (g[k] - g[0])).norm();
    rep.per_snippet.push_back(err / static_cast<double>(p.size()));
  }
  rep.count = static_cast<int>(rep.per_snippet.size());
  if (rep.count == 0) return rep;
  for (double e : rep.per_snippet) rep.mean += e;
  rep.mean /= rep.count;
  for (double e : rep.per_snippet) rep.std += (e - rep.mean) * (e - rep.mean);
  rep.std = std::sqrt(rep.std / rep.count);
  return rep;
}

Trajectory snippet_positions(const Pose6& to_prev, const Pose6& to_next) {
  return {pose_to_transform(to_prev).source_origin_in_target(), Eigen::Vector3d::Zero(),
          pose_to_transform(to_next).source_origin_in_target()};
}

std::string format_depth_report(const std::vector<std::string>& names, const std::vector<DepthMetrics>& rows) {
  require(names.size() == rows.size(), ErrorCode::LengthMismatch, "one name per report row");
  auto line = [](const std::string& head, const DepthMetrics& m) {
    return head + " abs_rel=" + fmt(m.abs_rel) + " sq_rel=" + fmt(m.sq_rel) + " rmse=" + fmt(m.rmse) +
           " rmse_log=" + fmt(m.rmse_log) + " d1=" + fmt(m.delta1) + " d2=" + fmt(m.delta2) +
           " d3=" + fmt(m.delta3) + "\n";
  };
  std::string out;
  DepthMetrics avg;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += line("image=" + names[k], rows[k]);
    const DepthMetrics& m = rows[k];
    avg.abs_rel += m.abs_rel;
    avg.sq_rel += m.sq_rel;
    avg.rmse += m.rmse;
    avg.rmse_log += m.rmse_log;
    avg.delta1 += m.delta1;
    avg.delta2 += m.delta2;
    avg.delta3 += m.delta3;
  }
  if (!rows.empty()) {
    const auto n = static_cast<double>(rows.size());
    for (double* v : {&avg.abs_rel, &avg.sq_rel, &avg.rmse, &avg.rmse_log, &avg.delta1, &avg.delta2, &avg.delta3})
      *v /= n;
  }
  out += line("aggregate count=" + std::to_string(rows.size()), avg);
  return out;
}

std::string format_ate_report(const AteReport& report) {
  std::string out;
  for (std::size_t k = 0; k < report.per_snippet.size(); ++k)
    out += "snippet=" + std::to_string(k) + " ate=" + fmt(report.per_snippet[k]) + "\n";
  out += "aggregate mean=" + fmt(report.mean) + " std=" + fmt(report.std) + " count=" + std::to_string(report.count) +
         "\n";
  return out;
}

}  // namespace cylsfm
