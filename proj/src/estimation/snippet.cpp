#include "cylsfm/estimation/snippet.hpp"

#include "cylsfm/core/error.hpp"

namespace cylsfm {

void Snippet::validate() const {
  camera.validate();
  require(!sources.empty(), ErrorCode::BadArgument, "snippet needs at least one source frame");
  require(target.rows() == camera.height && target.cols() == camera.width, ErrorCode::ShapeMismatch,
          "target image does not match the camera");
  for (const auto& s : sources) require(s.same_shape(target), ErrorCode::ShapeMismatch, "source/target shapes differ");
  if (!gt_depth.empty())
    require(gt_depth.rows() == target.rows() && gt_depth.cols() == target.cols() && gt_depth.channels() == 1,
            ErrorCode::ShapeMismatch, "ground-truth depth does not match the target");
  require(gt_poses.empty() || gt_poses.size() == sources.size(), ErrorCode::LengthMismatch,
          "need one ground-truth pose per source");
}

}  // namespace cylsfm
