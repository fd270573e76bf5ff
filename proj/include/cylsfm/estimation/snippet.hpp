#pragma once

#include <vector>

#include "cylsfm/camera/cylinder.hpp"
#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

/// A target frame and its neighbours. Ground truth is for evaluation only;
/// gt_depth is empty and gt_poses is empty when unknown.
struct Snippet {
  Tensor target;
  std::vector<Tensor> sources;
  CylCamera camera;
  Tensor gt_depth;
  std::vector<Pose6> gt_poses;  // target -> source, one per source

  /// Throws ShapeMismatch / BadArgument on inconsistent contents.
  void validate() const;
};

}  // namespace cylsfm
