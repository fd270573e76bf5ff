#include "cylsfm/estimation/params.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/rng.hpp"

namespace cylsfm {

std::size_t ParamStore::add(const std::string& name, std::vector<int> dims) {
  for (const auto& e : entries_) require(e.name != name, ErrorCode::BadArgument, "duplicate parameter " + name);
  const std::size_t n = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                        [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
  entries_.push_back({name, std::move(dims), values_.size(), n});
  values_.resize(values_.size() + n, 0.0);
  grads_.resize(grads_.size() + n, 0.0);
  return entries_.size() - 1;
}

std::span<double> ParamStore::values(std::size_t entry) {
  const auto& e = entries_.at(entry);
  return std::span<double>(values_).subspan(e.offset, e.size);
}

std::span<const double> ParamStore::values(std::size_t entry) const {
  const auto& e = entries_.at(entry);
  return std::span<const double>(values_).subspan(e.offset, e.size);
}

std::span<double> ParamStore::grads(std::size_t entry) {
  const auto& e = entries_.at(entry);
  return std::span<double>(grads_).subspan(e.offset, e.size);
}

void ParamStore::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

std::size_t ParamStore::find(const std::string& name) const {
  for (std::size_t k = 0; k < entries_.size(); ++k)
    if (entries_[k].name == name) return k;
  throw Error(ErrorCode::BadArgument, "no parameter named " + name);
}

ConvLayer ConvLayer::create(ParamStore& store, const std::string& name, int k, int in, int out, int stride) {
  ConvLayer c;
  c.k_h = c.k_w = k;
  c.in = in;
  c.out = out;
  c.stride = stride;
  c.weight = store.add(name + ".weight", {k, k, in, out});
  c.bias = store.add(name + ".bias", {out});
  return c;
}

Kernel ConvLayer::kernel(const ParamStore& store) const {
  Kernel kern(k_h, k_w, in, out);
  const auto w = store.values(weight);
  const auto b = store.values(bias);
  std::copy(w.begin(), w.end(), kern.weights.begin());
  std::copy(b.begin(), b.end(), kern.bias.begin());
  return kern;
}

void ConvLayer::accumulate(ParamStore& store, const Kernel& grad) const {
  auto gw = store.grads(weight);
  auto gb = store.grads(bias);
  for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += grad.weights[k];
  for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += grad.bias[k];
}

void ConvLayer::init_xavier(ParamStore& store, Rng& rng) const {
  const double limit = std::sqrt(6.0 / (k_h * k_w * (in + out)));
  for (double& v : store.values(weight)) v = rng.uniform(-limit, limit);
  for (double& v : store.values(bias)) v = 0.0;
}

}  // namespace cylsfm
