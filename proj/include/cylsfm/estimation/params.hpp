#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cylsfm/tensor/tensor.hpp"

namespace cylsfm {

class Rng;

struct ParamEntry {
  std::string name;
  std::vector<int> dims;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// All trainable values of a model in one flat array, with a matching
/// gradient array, so optimizers and checkpoints treat them uniformly.
class ParamStore {
 public:
  /// Appends a zero-initialized entry and returns its index.
  std::size_t add(const std::string& name, std::vector<int> dims);

  const std::vector<ParamEntry>& entries() const noexcept { return entries_; }
  std::span<double> values(std::size_t entry);
  std::span<const double> values(std::size_t entry) const;
  std::span<double> grads(std::size_t entry);
  std::vector<double>& all_values() noexcept { return values_; }
  const std::vector<double>& all_values() const noexcept { return values_; }
  std::vector<double>& all_grads() noexcept { return grads_; }
  const std::vector<double>& all_grads() const noexcept { return grads_; }
  void zero_grad();
  std::size_t find(const std::string& name) const;  // throws BadArgument

 private:
  std::vector<ParamEntry> entries_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

/// A convolution whose kernel and bias live in a ParamStore.
struct ConvLayer {
  int k_h = 3;
  int k_w = 3;
  int in = 0;
  int out = 0;
  int stride = 1;
  std::size_t weight = 0;
  std::size_t bias = 0;

  static ConvLayer create(ParamStore& store, const std::string& name, int k, int in, int out, int stride);
  Kernel kernel(const ParamStore& store) const;
  /// Adds kernel gradients into the store's gradient array.
  void accumulate(ParamStore& store, const Kernel& grad) const;
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)); bias zero.
  void init_xavier(ParamStore& store, Rng& rng) const;
};

}  // namespace cylsfm
