#include "pimdc/infer.hpp"

#include <algorithm>
#include <stdexcept>

#include "pimdc/error.hpp"

namespace pimdc {

namespace {

std::int64_t out_extent(std::int64_t in, std::int64_t window, std::int64_t stride,
                        std::int64_t pad) {
  std::int64_t padded = in + 2 * pad;
  if (padded < window) throw std::invalid_argument("filter larger than padded input");
  return (padded - window) / stride + 1;
}

}  // namespace

Tensor conv_forward(const Tensor& x, const WeightBlock& w, std::int64_t stride,
                    std::int64_t pad) {
  if (w.c != x.c()) throw std::invalid_argument("conv channel mismatch");
  std::int64_t e = out_extent(x.h(), w.r, stride, pad);
  std::int64_t f = out_extent(x.w(), w.s, stride, pad);

  Tensor out(e, f, w.m);
  for (std::int64_t mo = 0; mo < w.m; ++mo) {
    for (std::int64_t oy = 0; oy < e; ++oy) {
      for (std::int64_t ox = 0; ox < f; ++ox) {
        float acc = 0.0f;
        for (std::int64_t ci = 0; ci < w.c; ++ci) {
          for (std::int64_t rr = 0; rr < w.r; ++rr) {
            std::int64_t iy = oy * stride - pad + rr;
            if (iy < 0 || iy >= x.h()) continue;
            for (std::int64_t ss = 0; ss < w.s; ++ss) {
              std::int64_t ix = ox * stride - pad + ss;
              if (ix < 0 || ix >= x.w()) continue;
              acc += x.at(iy, ix, ci) * w.at(mo, ci, rr, ss);
            }
          }
        }
        out.at(oy, ox, mo) = acc;
      }
    }
  }
  return out;
}

Tensor fc_forward(const Tensor& x, const WeightBlock& w) {
  if (w.r != x.h() || w.s != x.w()) {
    throw std::invalid_argument("fc filter must cover the whole input map");
  }
  return conv_forward(x, w, /*stride=*/1, /*pad=*/0);
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  return out;
}

Tensor maxpool(const Tensor& x, std::int64_t r, std::int64_t s, std::int64_t stride,
               std::int64_t pad) {
  std::int64_t e = out_extent(x.h(), r, stride, pad);
  std::int64_t f = out_extent(x.w(), s, stride, pad);
  Tensor out(e, f, x.c());
  for (std::int64_t oy = 0; oy < e; ++oy) {
    for (std::int64_t ox = 0; ox < f; ++ox) {
      for (std::int64_t ci = 0; ci < x.c(); ++ci) {
        bool seen = false;
        float best = 0.0f;
        for (std::int64_t rr = 0; rr < r; ++rr) {
          std::int64_t iy = oy * stride - pad + rr;
          if (iy < 0 || iy >= x.h()) continue;
          for (std::int64_t ss = 0; ss < s; ++ss) {
            std::int64_t ix = ox * stride - pad + ss;
            if (ix < 0 || ix >= x.w()) continue;
            float v = x.at(iy, ix, ci);
            if (!seen || v > best) best = v;
            seen = true;
          }
        }
        out.at(oy, ox, ci) = best;
      }
    }
  }
  return out;
}

Tensor avgpool(const Tensor& x, std::int64_t r, std::int64_t s, std::int64_t stride,
               std::int64_t pad) {
  std::int64_t e = out_extent(x.h(), r, stride, pad);
  std::int64_t f = out_extent(x.w(), s, stride, pad);
  float window = static_cast<float>(r) * static_cast<float>(s);
  Tensor out(e, f, x.c());
  for (std::int64_t oy = 0; oy < e; ++oy) {
    for (std::int64_t ox = 0; ox < f; ++ox) {
      for (std::int64_t ci = 0; ci < x.c(); ++ci) {
        float sum = 0.0f;
        for (std::int64_t rr = 0; rr < r; ++rr) {
          std::int64_t iy = oy * stride - pad + rr;
          if (iy < 0 || iy >= x.h()) continue;
          for (std::int64_t ss = 0; ss < s; ++ss) {
            std::int64_t ix = ox * stride - pad + ss;
            if (ix < 0 || ix >= x.w()) continue;
            sum += x.at(iy, ix, ci);
          }
        }
        out.at(oy, ox, ci) = sum / window;
      }
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add requires identical shapes");
  Tensor out = a;
  auto out_data = out.data();
  auto b_data = b.data();
  for (std::size_t i = 0; i < out_data.size(); ++i) out_data[i] += b_data[i];
  return out;
}

void check_weights(const NetworkSpec& net, const ShapeInfo& shapes,
                   const WeightSet& weights) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (!layer.weighted()) continue;
    auto it = weights.blocks.find(layer.id);
    if (it == weights.blocks.end()) {
      throw SpecError("missing weights for layer '" + layer.id + "'");
    }
    const auto& block = it->second;
    const auto& shape = shapes.at(i);
    if (block.m != *layer.m || block.c != shape.in_c || block.r != *layer.r ||
        block.s != *layer.s) {
      throw SpecError("weight dims mismatch for layer '" + layer.id + "'");
    }
  }
}

Tensor network_forward(const NetworkSpec& net, const ShapeInfo& shapes,
                       const WeightSet& weights, const Tensor& x,
                       const LayerHook& hook) {
  std::vector<Tensor> outputs(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    const Tensor& in = i == 0 ? x : outputs[*net.index_of(layer.inputs[0])];

    Tensor out;
    switch (layer.kind) {
      case LayerKind::conv: {
        auto it = weights.blocks.find(layer.id);
        if (it == weights.blocks.end()) {
          throw SpecError("missing weights for layer '" + layer.id + "'");
        }
        out = conv_forward(in, it->second, layer.stride_or_default(), layer.pad_or_default());
        break;
      }
      case LayerKind::fc: {
        auto it = weights.blocks.find(layer.id);
        if (it == weights.blocks.end()) {
          throw SpecError("missing weights for layer '" + layer.id + "'");
        }
        out = fc_forward(in, it->second);
        break;
      }
      case LayerKind::maxpool:
        out = maxpool(in, *layer.r, *layer.s, layer.stride_or_default(), layer.pad_or_default());
        break;
      case LayerKind::avgpool:
        out = avgpool(in, *layer.r, *layer.s, layer.stride_or_default(), layer.pad_or_default());
        break;
      case LayerKind::relu:
        out = relu(in);
        break;
      case LayerKind::add:
        out = add(in, outputs[*net.index_of(layer.inputs[1])]);
        break;
    }

    const auto& shape = shapes.at(i);
    if (out.h() != shape.out_h || out.w() != shape.out_w || out.c() != shape.out_c) {
      throw SpecError("layer '" + layer.id + "' produced an unexpected shape");
    }
    if (hook) hook(i, out);
    outputs[i] = std::move(out);
  }
  return outputs[terminal_layer_index(net)];
}

int classify(const Tensor& logits) {
  auto values = logits.data();
  if (values.size() == 1) {
    return values[0] >= 0.0f ? 0 : 1;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace pimdc
