#include "cylsfm/synthesis/losses.hpp"

#include <cmath>
#include <string>

#include "cylsfm/core/branch_trace.hpp"
#include "cylsfm/core/error.hpp"
#include "cylsfm/synthesis/depth_state.hpp"
#include "cylsfm/synthesis/view_synthesis.hpp"

namespace cylsfm {

namespace {

double signum(double x) noexcept {
  branch_trace::note(x > 0.0 ? 1 : (x < 0.0 ? 2 : 3));
  return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

// sum_p w(p) |t(p)|; optionally accumulates scale * w * sign(t) into grad_t.
double weighted_abs_sum(const Tensor& t, const Tensor* w, double scale, Tensor* grad_t) {
  double total = 0.0;
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c) {
      const double wp = w ? (*w)(r, c) : 1.0;
      for (int k = 0; k < t.channels(); ++k) {
        const double v = t(r, c, k);
        const double s = signum(v);
        total += wp * std::abs(v);
        if (grad_t) (*grad_t)(r, c, k) = scale * wp * s;
      }
    }
  return total;
}

// Sum of |D op| terms weighted by w, with the gradient wrt disparity added to
// grad when requested.
double stencil_l1(const Tensor& disparity, std::span<const Diff> ops, std::span<const double> mult,
                  const Tensor* w, Seam seam, double norm, Tensor* grad) {
  double total = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Tensor d = finite_diff(disparity, ops[i], seam);
    if (grad) {
      Tensor g(d.rows(), d.cols(), d.channels());
      total += mult[i] * weighted_abs_sum(d, w, mult[i] / norm, &g);
      *grad += finite_diff_adjoint(g, ops[i], seam);
    } else {
      total += mult[i] * weighted_abs_sum(d, w, 0.0, nullptr);
    }
  }
  return total / norm;
}

}  // namespace

std::string_view to_string(SmoothMode mode) noexcept {
  switch (mode) {
    case SmoothMode::SecondOrder: return "second_order";
    case SmoothMode::ImageAware: return "image_aware";
    case SmoothMode::ImageAwareFirstOrder: return "image_aware_first_order";
  }
  return "second_order";
}

SmoothMode smooth_mode_from_string(std::string_view name) {
  if (name == "second_order") return SmoothMode::SecondOrder;
  if (name == "image_aware") return SmoothMode::ImageAware;
  if (name == "image_aware_first_order") return SmoothMode::ImageAwareFirstOrder;
  throw Error(ErrorCode::BadConfig, "unknown smooth mode '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  require(lambda_s >= 0.0 && lambda_e >= 0.0 && lambda_m >= 0.0, ErrorCode::BadConfig,
          "loss weights must be non-negative");
  require(num_scales >= 1, ErrorCode::BadConfig, "num_scales must be at least 1");
}

double photometric_loss(const Tensor& projected, const Tensor& target, const Tensor* weights,
                        const Tensor& valid, PhotometricGrads* grads) {
  require(projected.same_shape(target), ErrorCode::ShapeMismatch, "projected and target images differ in shape");
  require(valid.rows() == target.rows() && valid.cols() == target.cols() && valid.channels() == 1,
          ErrorCode::ShapeMismatch, "validity mask has the wrong shape");
  if (weights)
    require(weights->rows() == target.rows() && weights->cols() == target.cols() && weights->channels() == 1,
            ErrorCode::ShapeMismatch, "mask weights have the wrong shape");
  double count = 0.0;
  for (double v : valid.values()) count += v;
  require(count > 0.0, ErrorCode::EmptyMask, "no valid pixel for the photometric loss");
  const int ch = target.channels();
  const double norm = count * ch;

  if (grads) {
    grads->projected = Tensor(target.rows(), target.cols(), ch);
    grads->weights = Tensor(target.rows(), target.cols(), 1);
  }
  double total = 0.0;
  for (int r = 0; r < target.rows(); ++r)
    for (int c = 0; c < target.cols(); ++c) {
      if (valid(r, c) == 0.0) continue;
      const double e = weights ? (*weights)(r, c) : 1.0;
      double abs_sum = 0.0;
      for (int k = 0; k < ch; ++k) {
        const double diff = projected(r, c, k) - target(r, c, k);
        abs_sum += std::abs(diff);
        const double s = signum(diff);
        if (grads) grads->projected(r, c, k) = e * s / norm;
      }
      total += e * abs_sum;
      if (grads) grads->weights(r, c) = abs_sum / norm;
    }
  return total / norm;
}

double smooth_loss_second_order(const Tensor& disparity, Seam seam, Tensor* grad) {
  require(disparity.channels() == 1, ErrorCode::ShapeMismatch, "smoothness expects single-channel disparity");
  if (grad) *grad = Tensor(disparity.rows(), disparity.cols(), 1);
  // dyx uses the same forward-difference stencil as dxy, so the two cross
  // terms coincide and are counted with weight 2.
  static constexpr Diff ops[] = {Diff::XX, Diff::XY, Diff::YY};
  static constexpr double mult[] = {1.0, 2.0, 1.0};
  const double norm = static_cast<double>(disparity.rows()) * disparity.cols();
  return stencil_l1(disparity, ops, mult, nullptr, seam, norm, grad);
}

Tensor edge_weights(const Tensor& image, Seam seam) {
  const Tensor gx = grad_x(image, seam);
  const Tensor gy = grad_y(image);
  Tensor w(image.rows(), image.cols(), 1);
  const int ch = image.channels();
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < image.cols(); ++c) {
      double g = 0.0;
      for (int k = 0; k < ch; ++k) g += std::hypot(gx(r, c, k), gy(r, c, k));
      w(r, c) = std::exp(-g / ch);
    }
  return w;
}

double smooth_loss_image_aware(const Tensor& disparity, const Tensor& image, Seam seam, int order, Tensor* grad) {
  require(disparity.channels() == 1, ErrorCode::ShapeMismatch, "smoothness expects single-channel disparity");
  require(disparity.rows() == image.rows() && disparity.cols() == image.cols(), ErrorCode::ShapeMismatch,
          "disparity and image differ in size");
  require(order == 1 || order == 2, ErrorCode::BadArgument, "smoothness order must be 1 or 2");
  if (grad) *grad = Tensor(disparity.rows(), disparity.cols(), 1);
  const Tensor w = edge_weights(image, seam);
  const double norm = static_cast<double>(disparity.rows()) * disparity.cols();
  static constexpr Diff second[] = {Diff::XX, Diff::XY, Diff::YY};
  static constexpr Diff first[] = {Diff::X, Diff::Y};
  static constexpr double ones[] = {1.0, 1.0, 1.0};
  if (order == 2) return stencil_l1(disparity, second, ones, &w, seam, norm, grad);
  return stencil_l1(disparity, first, std::span(ones).first(2), &w, seam, norm, grad);
}

Tensor mask_weights(const Tensor& logits) {
  require(logits.channels() == 2, ErrorCode::ShapeMismatch, "mask logits need two channels");
  Tensor w(logits.rows(), logits.cols(), 1);
  for (int r = 0; r < logits.rows(); ++r)
    for (int c = 0; c < logits.cols(); ++c) w(r, c) = sigmoid(logits(r, c, 0) - logits(r, c, 1));
  return w;
}

Tensor mask_weights_backward(const Tensor& logits, const Tensor& grad_weights) {
  Tensor g(logits.rows(), logits.cols(), 2);
  for (int r = 0; r < logits.rows(); ++r)
    for (int c = 0; c < logits.cols(); ++c) {
      const double e = sigmoid(logits(r, c, 0) - logits(r, c, 1));
      const double d = grad_weights(r, c) * e * (1.0 - e);
      g(r, c, 0) = d;
      g(r, c, 1) = -d;
    }
  return g;
}

double explainability_loss(const Tensor& logits, Tensor* grad) {
  require(logits.channels() == 2, ErrorCode::ShapeMismatch, "mask logits need two channels");
  const double n = static_cast<double>(logits.rows()) * logits.cols();
  if (grad) *grad = Tensor(logits.rows(), logits.cols(), 2);
  double total = 0.0;
  for (int r = 0; r < logits.rows(); ++r)
    for (int c = 0; c < logits.cols(); ++c) {
      const double z = logits(r, c, 0) - logits(r, c, 1);
      // -log sigmoid(z) = softplus(-z), evaluated stably.
      total += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
      if (grad) {
        const double miss = 1.0 - sigmoid(z);
        (*grad)(r, c, 0) = -miss / n;
        (*grad)(r, c, 1) = miss / n;
      }
    }
  return total / n;
}

LossBreakdown total_loss(const LossInputs& in, const LossConfig& cfg, LossGradients* grads) {
  cfg.validate();
  require(in.target != nullptr, ErrorCode::BadArgument, "loss needs a target image");
  require(!in.sources.empty(), ErrorCode::BadArgument, "loss needs at least one source image");
  require(in.poses.size() == in.sources.size(), ErrorCode::ShapeMismatch, "one pose per source required");
  require(static_cast<int>(in.disparity.size()) == cfg.num_scales, ErrorCode::ShapeMismatch,
          "disparity pyramid depth does not match num_scales");
  const bool use_mask = cfg.lambda_e > 0.0;
  if (use_mask) {
    require(in.mask_logits.size() == in.sources.size(), ErrorCode::ShapeMismatch,
            "one mask pyramid per source required");
    for (const auto& m : in.mask_logits)
      require(static_cast<int>(m.size()) == cfg.num_scales, ErrorCode::ShapeMismatch,
              "mask pyramid depth does not match num_scales");
  }
  const std::size_t n_src = in.sources.size();
  const auto n_scales = static_cast<std::size_t>(cfg.num_scales);

  if (grads) {
    grads->disparity.assign(n_scales, Tensor());
    grads->poses.assign(n_src, Pose6{});
    grads->mask_logits.assign(use_mask ? n_src : 0, std::vector<Tensor>(n_scales));
  }

  LossBreakdown out;
  Tensor target = *in.target;
  std::vector<Tensor> sources(in.sources.begin(), in.sources.end());
  const double lambda_smooth = cfg.smooth_mode == SmoothMode::SecondOrder ? cfg.lambda_s : cfg.lambda_m;

  for (std::size_t s = 0; s < n_scales; ++s) {
    if (s > 0) {
      target = downsample_half(target);
      for (Tensor& src : sources) src = downsample_half(src);
    }
    const CylCamera cam = in.camera.downscaled(1 << s);
    const Seam seam = cfg.wrap ? seam_of(cam) : Seam::Open;
    const Tensor& disp = in.disparity[s];
    require(disp.rows() == cam.height && disp.cols() == cam.width && disp.channels() == 1,
            ErrorCode::ShapeMismatch, "disparity map has the wrong size for its scale");
    const Tensor depth = reciprocal(disp);
    Tensor grad_depth;
    if (grads) grad_depth = Tensor(cam.height, cam.width, 1);

    for (std::size_t k = 0; k < n_src; ++k) {
      const SynthResult synth = synthesize_view(sources[k], depth, in.poses[k], cam, seam);
      Tensor weights;
      if (use_mask) weights = mask_weights(in.mask_logits[k][s]);
      PhotometricGrads pg;
      out.pixel += photometric_loss(synth.projected, target, use_mask ? &weights : nullptr, synth.valid,
                                    grads ? &pg : nullptr);
      if (use_mask) {
        Tensor ge;
        out.exp += cfg.lambda_e * explainability_loss(in.mask_logits[k][s], grads ? &ge : nullptr);
        if (grads) {
          ge *= cfg.lambda_e;
          ge += mask_weights_backward(in.mask_logits[k][s], pg.weights);
          grads->mask_logits[k][s] = std::move(ge);
        }
      }
      if (grads) {
        const SynthGrads sg = synthesize_view_backward(sources[k], depth, in.poses[k], cam, synth, pg.projected, seam);
        grad_depth += sg.depth;
        grads->poses[k] += sg.pose;
      }
    }

    const double weight = lambda_smooth / static_cast<double>(1 << s);
    Tensor grad_smooth;
    if (weight > 0.0) {
      double term = 0.0;
      switch (cfg.smooth_mode) {
        case SmoothMode::SecondOrder:
          term = smooth_loss_second_order(disp, seam, grads ? &grad_smooth : nullptr);
          break;
        case SmoothMode::ImageAware:
          term = smooth_loss_image_aware(disp, target, seam, 2, grads ? &grad_smooth : nullptr);
          break;
        case SmoothMode::ImageAwareFirstOrder:
          term = smooth_loss_image_aware(disp, target, seam, 1, grads ? &grad_smooth : nullptr);
          break;
      }
      out.smooth += weight * term;
    }

    if (grads) {
      // depth = 1 / disparity
      Tensor gd(cam.height, cam.width, 1);
      for (int r = 0; r < cam.height; ++r)
        for (int c = 0; c < cam.width; ++c) {
          const double v = disp(r, c);
          gd(r, c) = -grad_depth(r, c) / (v * v);
          if (weight > 0.0) gd(r, c) += weight * grad_smooth(r, c);
        }
      grads->disparity[s] = std::move(gd);
    }
  }
  out.total = out.pixel + out.smooth + out.exp;
  return out;
}

}  // namespace cylsfm
