#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cylsfm {

enum class GradComponent { Conv, Sampler, Synth, TotalLoss, DepthNet, PoseNet };

std::string_view to_string(GradComponent c) noexcept;
GradComponent grad_component_from_string(std::string_view name);
std::vector<GradComponent> all_grad_components();

struct GradCheckResult {
  GradComponent component = GradComponent::Conv;
  double max_rel_error = 0.0;
  int probes = 0;
  int skipped = 0;  // probes straddling a kink (branch trace differs at +h and -h)
};

/// Compares analytic gradients with central differences (step 1e-5) on
/// random small instances. Relative error is |a - n| / max(|a|, |n|, 1e-5).
GradCheckResult gradient_check(GradComponent component, int trials, std::uint64_t seed);

}  // namespace cylsfm
