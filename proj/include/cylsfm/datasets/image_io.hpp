#pragma once

#include <filesystem>
#include <vector>

#include "cylsfm/synthesis/pose.hpp"
#include "cylsfm/tensor/tensor.hpp"
#include "cylsfm/tensor/wrap_ops.hpp"

namespace cylsfm {

/// Binary PPM (P6). Samples are scaled to [0, 1]; 8- and 16-bit files are read.
Tensor read_ppm(const std::filesystem::path& path);
/// Writes 8-bit P6; values are clamped to [0, 1] and rounded.
void write_ppm(const std::filesystem::path& path, const Tensor& image);

/// Portable float map: "Pf" for one channel, "PF" for three. Writes
/// little-endian (scale -1.0); reads either byte order. Rows are stored
/// bottom to top as the format requires.
Tensor read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Tensor& image);

/// Per-frame ground-truth pose (camera to world) from a pose file line
/// `frame_index, t_x, t_y, t_z, alpha, beta, gamma`.
struct FramePose {
  int frame = 0;
  Pose6 pose;
};

std::vector<FramePose> read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const std::vector<FramePose>& poses);

/// Resamples to rows x cols: area averaging along an axis that shrinks,
/// bilinear along one that grows (wrapping horizontally when seam is Wrap,
/// clamping otherwise).
Tensor resize_image(const Tensor& image, int rows, int cols, Seam seam = Seam::Wrap);

}  // namespace cylsfm
