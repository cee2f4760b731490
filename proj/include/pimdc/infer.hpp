#pragma once

#include <functional>
#include <map>
#include <string>

#include "pimdc/netir.hpp"
#include "pimdc/tensor.hpp"

namespace pimdc {

struct WeightSet {
  std::map<std::string, WeightBlock> blocks;  // keyed by layer id
};

// Cross-correlation with symmetric zero padding. Accumulation order is fixed
// (s innermost, then r, then c; float accumulator) so independent references
// can demand exact equality.
Tensor conv_forward(const Tensor& x, const WeightBlock& w, std::int64_t stride,
                    std::int64_t pad);

// Convolution whose filter covers the whole input map; output is 1 x 1 x m.
Tensor fc_forward(const Tensor& x, const WeightBlock& w);

Tensor relu(const Tensor& x);
// Windows ignore padded cells (empty windows yield 0).
Tensor maxpool(const Tensor& x, std::int64_t r, std::int64_t s, std::int64_t stride,
               std::int64_t pad);
// Padded cells count as zeros: sum over in-bounds cells divided by r*s.
Tensor avgpool(const Tensor& x, std::int64_t r, std::int64_t s, std::int64_t stride,
               std::int64_t pad);
Tensor add(const Tensor& a, const Tensor& b);

// Called with each layer's freshly computed output; may rewrite it in place.
using LayerHook = std::function<void(std::size_t layer_index, Tensor& out)>;

// Deterministic forward pass in topological order. Requires a validated net
// with matching weights; returns the terminal layer's output.
Tensor network_forward(const NetworkSpec& net, const ShapeInfo& shapes,
                       const WeightSet& weights, const Tensor& x,
                       const LayerHook& hook = nullptr);

// Argmax over the flattened terminal output, ties to the lowest index.
// Single-value outputs are scored against an implicit zero logit, so a scalar
// head classifies by sign (positive or zero -> class 0, negative -> class 1).
int classify(const Tensor& logits);

// Throws SpecError when a weighted layer's block is missing or mis-sized.
void check_weights(const NetworkSpec& net, const ShapeInfo& shapes,
                   const WeightSet& weights);

}  // namespace pimdc
