#pragma once

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

struct SynthResult {
  Tensor projected;  // I_proj; zero wherever valid is zero
  Tensor valid;      // rows x cols x 1
  Tensor coords;     // source-image sample position (i, j) per target pixel
};

struct SynthGrads {
  Tensor depth;  // d loss / d target depth
  Pose6 pose;    // d loss / d pose parameters
};

inline Seam seam_of(const CylCamera& cam) { return cam.wraps() ? Seam::Wrap : Seam::Open; }

/// Source-image coordinates hit by every target pixel after unprojecting it
/// at its depth and moving it into the source frame. Pixels whose
/// transformed point lies on the cylinder axis get an out-of-image row so the
/// sampler marks them invalid.
Tensor warp_coordinates(const Tensor& target_depth, const Pose6& pose, const CylCamera& cam);

/// Inverse-warps the source panorama into the target view.
SynthResult synthesize_view(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                            const CylCamera& cam);
/// Same with an explicit sampler seam (Seam::Open on a full panorama is the
/// no-wrap ablation).
SynthResult synthesize_view(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                            const CylCamera& cam, Seam seam);

/// Backward pass of synthesize_view given d loss / d projected.
SynthGrads synthesize_view_backward(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                                    const CylCamera& cam, const SynthResult& forward,
                                    const Tensor& grad_projected);
SynthGrads synthesize_view_backward(const Tensor& source, const Tensor& target_depth, const Pose6& pose,
                                    const CylCamera& cam, const SynthResult& forward,
                                    const Tensor& grad_projected, Seam seam);

}  // namespace cylsfm
