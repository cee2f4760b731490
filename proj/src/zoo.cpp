#include "pimdc/zoo.hpp"

#include <charconv>
#include <cstdio>

#include "pimdc/error.hpp"

namespace pimdc {

namespace {

// Appends layers in topological order; chain helpers wire each layer to the
// previous one unless explicit inputs are given.
class NetBuilder {
 public:
  explicit NetBuilder(std::string name, std::int64_t h, std::int64_t w, std::int64_t c) {
    net_.name = std::move(name);
    net_.input = {h, w, c};
  }

  std::string conv(const std::string& id, std::int64_t r, std::int64_t s, std::int64_t m,
                   std::int64_t stride, std::int64_t pad, std::vector<std::string> from = {}) {
    LayerSpec layer;
    layer.id = id;
    layer.kind = LayerKind::conv;
    layer.r = r;
    layer.s = s;
    layer.m = m;
    layer.stride = stride;
    layer.pad = pad;
    layer.inputs = std::move(from);
    return append(std::move(layer));
  }

  std::string fc(const std::string& id, std::int64_t r, std::int64_t s, std::int64_t m) {
    LayerSpec layer;
    layer.id = id;
    layer.kind = LayerKind::fc;
    layer.r = r;
    layer.s = s;
    layer.m = m;
    layer.stride = 1;
    layer.pad = 0;
    return append(std::move(layer));
  }

  std::string pool(const std::string& id, LayerKind kind, std::int64_t r, std::int64_t s,
                   std::int64_t stride, std::int64_t pad) {
    LayerSpec layer;
    layer.id = id;
    layer.kind = kind;
    layer.r = r;
    layer.s = s;
    layer.stride = stride;
    layer.pad = pad;
    return append(std::move(layer));
  }

  std::string relu(const std::string& id) {
    LayerSpec layer;
    layer.id = id;
    layer.kind = LayerKind::relu;
    return append(std::move(layer));
  }

  std::string add(const std::string& id, const std::string& a, const std::string& b) {
    LayerSpec layer;
    layer.id = id;
    layer.kind = LayerKind::add;
    layer.inputs = {a, b};
    return append(std::move(layer));
  }

  const std::string& last() const { return last_; }
  NetworkSpec take() { return std::move(net_); }

 private:
  std::string append(LayerSpec layer) {
    if (!net_.layers.empty() && layer.inputs.empty()) layer.inputs = {last_};
    if (net_.layers.empty()) layer.inputs.clear();
    last_ = layer.id;
    net_.layers.push_back(std::move(layer));
    return last_;
  }

  NetworkSpec net_;
  std::string last_;
};

std::int64_t pooled(std::int64_t in, std::int64_t window, std::int64_t stride,
                    std::int64_t pad) {
  return (in + 2 * pad - window) / stride + 1;
}

// AlexNet without grouping. kernel == 0 keeps the canonical mixed filter
// sizes (11/5/3/3/3); otherwise every conv uses kernel x kernel, stride-1
// convs padded to preserve their map sizes. conv1 keeps stride 4 with pad 0,
// so variant map sizes drift slightly; the fc stage adapts via the running
// shape. The final fc has no relu.
NetworkSpec alexnet_family(const std::string& name, std::int64_t kernel) {
  NetBuilder b(name, 227, 227, 3);
  std::int64_t h = 227;

  auto k_of = [&](std::int64_t canonical) { return kernel == 0 ? canonical : kernel; };
  auto pad_same = [&](std::int64_t k) { return (k - 1) / 2; };

  std::int64_t k1 = k_of(11);
  b.conv("conv1", k1, k1, 96, 4, 0);
  b.relu("relu1");
  h = pooled(h, k1, 4, 0);
  b.pool("pool1", LayerKind::maxpool, 3, 3, 2, 0);
  h = pooled(h, 3, 2, 0);

  std::int64_t k2 = k_of(5);
  b.conv("conv2", k2, k2, 256, 1, kernel == 0 ? 2 : pad_same(k2));
  b.relu("relu2");
  b.pool("pool2", LayerKind::maxpool, 3, 3, 2, 0);
  h = pooled(h, 3, 2, 0);

  std::int64_t k3 = k_of(3);
  b.conv("conv3", k3, k3, 384, 1, kernel == 0 ? 1 : pad_same(k3));
  b.relu("relu3");
  b.conv("conv4", k3, k3, 384, 1, kernel == 0 ? 1 : pad_same(k3));
  b.relu("relu4");
  b.conv("conv5", k3, k3, 256, 1, kernel == 0 ? 1 : pad_same(k3));
  b.relu("relu5");
  b.pool("pool5", LayerKind::maxpool, 3, 3, 2, 0);
  h = pooled(h, 3, 2, 0);

  b.fc("fc6", h, h, 4096);
  b.relu("relu6");
  b.fc("fc7", 1, 1, 4096);
  b.relu("relu7");
  b.fc("fc8", 1, 1, 1000);
  return b.take();
}

NetworkSpec vgg16() {
  NetBuilder b("vgg16", 224, 224, 3);
  int conv_idx = 1;
  int block = 1;
  auto stage = [&](int convs, std::int64_t width) {
    for (int i = 0; i < convs; ++i) {
      std::string id = "conv" + std::to_string(block) + "_" + std::to_string(i + 1);
      b.conv(id, 3, 3, width, 1, 1);
      b.relu("relu" + std::to_string(conv_idx++));
    }
    b.pool("pool" + std::to_string(block), LayerKind::maxpool, 2, 2, 2, 0);
    ++block;
  };
  stage(2, 64);
  stage(2, 128);
  stage(3, 256);
  stage(3, 512);
  stage(3, 512);
  b.fc("fc6", 7, 7, 4096);
  b.relu("relu_fc6");
  b.fc("fc7", 1, 1, 4096);
  b.relu("relu_fc7");
  b.fc("fc8", 1, 1, 1000);
  return b.take();
}

struct ResNetPlan {
  std::vector<int> blocks;   // per stage
  bool bottleneck = false;
  std::int64_t width_mult = 1;  // inner 3x3 width multiplier (Wide ResNet)
};

NetworkSpec resnet_family(const std::string& name, const ResNetPlan& plan) {
  NetBuilder b(name, 224, 224, 3);
  b.conv("conv1", 7, 7, 64, 2, 3);
  b.relu("relu1");
  b.pool("pool1", LayerKind::maxpool, 3, 3, 2, 1);

  std::int64_t in_c = 64;
  const std::int64_t widths[4] = {64, 128, 256, 512};
  for (int stage = 0; stage < 4; ++stage) {
    std::int64_t width = widths[stage];
    std::int64_t out_c = plan.bottleneck ? width * 4 : width;
    std::int64_t mid_c = width * plan.width_mult;
    for (int blk = 0; blk < plan.blocks[stage]; ++blk) {
      std::int64_t stride = (stage > 0 && blk == 0) ? 2 : 1;
      std::string p = "s" + std::to_string(stage + 1) + "b" + std::to_string(blk + 1) + "_";
      std::string block_in = b.last();

      std::string main;
      if (plan.bottleneck) {
        b.conv(p + "a", 1, 1, mid_c, 1, 0);
        b.relu(p + "arelu");
        b.conv(p + "b", 3, 3, mid_c, stride, 1);
        b.relu(p + "brelu");
        main = b.conv(p + "c", 1, 1, out_c, 1, 0);
      } else {
        b.conv(p + "a", 3, 3, out_c, stride, 1);
        b.relu(p + "arelu");
        main = b.conv(p + "b", 3, 3, out_c, 1, 1);
      }

      std::string skip = block_in;
      if (stride != 1 || in_c != out_c) {
        skip = b.conv(p + "proj", 1, 1, out_c, stride, 0, {block_in});
      }
      b.add(p + "add", main, skip);
      b.relu(p + "relu");
      in_c = out_c;
    }
  }

  b.pool("gap", LayerKind::avgpool, 7, 7, 1, 0);
  b.fc("fc", 1, 1, 1000);
  return b.take();
}

// Equal-MAC pair: 16 layers at C=M=64 vs 4 layers at C=M=128 on 14x14 maps.
NetworkSpec conv_stack(const std::string& name, int depth, std::int64_t width) {
  NetBuilder b(name, 14, 14, width);
  for (int i = 0; i < depth; ++i) {
    b.conv("conv" + std::to_string(i + 1), 3, 3, width, 1, 1);
  }
  return b.take();
}

NetworkSpec toy_chain(int depth) {
  NetBuilder b("toy-chain-" + std::to_string(depth), 1, 1, 1);
  for (int i = 0; i < depth; ++i) {
    b.conv("l" + std::to_string(i + 1), 1, 1, 1, 1, 0);
  }
  return b.take();
}

NetworkSpec toy_avg(int taps) {
  NetBuilder b("toy-avg-" + std::to_string(taps), 1, taps, 1);
  b.conv("scale", 1, 1, 1, 1, 0);
  b.pool("avg", LayerKind::avgpool, 1, taps, 1, 0);
  return b.take();
}

NetworkSpec comparator_net(const std::string& name) {
  NetBuilder b(name, 1, 1, 1);
  b.conv("cmp", 1, 1, 2, 1, 0);
  return b.take();
}

bool parse_indexed(const std::string& name, const std::string& prefix, int& value) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) {
    return false;
  }
  const char* begin = name.data() + prefix.size();
  const char* end = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && value >= 1;
}

WeightBlock scalar_block(std::vector<float> values) {
  auto m = static_cast<std::int64_t>(values.size());
  return WeightBlock::make(m, 1, 1, 1, std::move(values));
}

}  // namespace

std::vector<ZooEntry> zoo_list() {
  return {
      {"alexnet", "AlexNet, 227x227x3, conv filters 11/5/3/3/3"},
      {"alexnet-k3", "AlexNet variant, every conv filter 3x3"},
      {"alexnet-k7", "AlexNet variant, every conv filter 7x7"},
      {"vgg16", "VGG-16, 13 conv + 3 fc"},
      {"resnet18", "ResNet-18, basic blocks"},
      {"resnet50", "ResNet-50, bottleneck blocks"},
      {"resnet152", "ResNet-152, bottleneck blocks"},
      {"wide-resnet", "Wide ResNet 50-2, doubled bottleneck width"},
      {"deep-narrow", "16 conv layers, 3x3, C=M=64, 14x14 maps"},
      {"shallow-wide", "4 conv layers, 3x3, C=M=128, 14x14 maps"},
      {"toy-chain-<D>", "depth-D unit chain on a scalar (e.g. toy-chain-4)"},
      {"toy-avg-<k>", "k-tap averaging head on k scalar copies (e.g. toy-avg-4)"},
  };
}

bool is_zoo_name(const std::string& name) {
  int param = 0;
  if (parse_indexed(name, "toy-chain-", param)) return true;
  if (parse_indexed(name, "toy-avg-", param)) return true;
  for (const auto& entry : zoo_list()) {
    if (entry.name == name) return true;
  }
  return false;
}

NetworkSpec zoo_network(const std::string& name) {
  if (name == "alexnet") return alexnet_family(name, 0);
  if (name == "alexnet-k3") return alexnet_family(name, 3);
  if (name == "alexnet-k7") return alexnet_family(name, 7);
  if (name == "vgg16") return vgg16();
  if (name == "resnet18") return resnet_family(name, {{2, 2, 2, 2}, false, 1});
  if (name == "resnet50") return resnet_family(name, {{3, 4, 6, 3}, true, 1});
  if (name == "resnet152") return resnet_family(name, {{3, 8, 36, 3}, true, 1});
  if (name == "wide-resnet") return resnet_family(name, {{3, 4, 6, 3}, true, 2});
  if (name == "deep-narrow") return conv_stack(name, 16, 64);
  if (name == "shallow-wide") return conv_stack(name, 4, 128);

  int param = 0;
  if (parse_indexed(name, "toy-chain-", param)) return toy_chain(param);
  if (parse_indexed(name, "toy-avg-", param)) return toy_avg(param);
  throw SpecError("unknown zoo entry '" + name + "'");
}

ToyFixture toy_chain_fixture(int depth, double margin) {
  ToyFixture fx;
  fx.net = toy_chain(depth);
  for (const auto& layer : fx.net.layers) {
    fx.weights.blocks.emplace(layer.id, scalar_block({1.0f}));
  }
  fx.data.samples.push_back(Tensor::flat({static_cast<float>(margin)}));
  fx.data.labels.push_back(0);
  return fx;
}

ToyFixture toy_avg_fixture(int taps, double margin) {
  ToyFixture fx;
  fx.net = toy_avg(taps);
  fx.weights.blocks.emplace("scale", scalar_block({1.0f}));
  fx.data.samples.push_back(
      Tensor::from_data(1, taps, 1, std::vector<float>(taps, static_cast<float>(margin))));
  fx.data.labels.push_back(0);
  return fx;
}

ToyFixture rank_sharp_fixture() {
  ToyFixture fx;
  fx.net = comparator_net("rank-sharp");
  fx.weights.blocks.emplace("cmp", scalar_block({0.9f, 1.0f}));
  fx.data.samples.push_back(Tensor::flat({1.0f}));
  fx.data.labels.push_back(1);
  return fx;
}

ToyFixture rank_blunt_fixture() {
  ToyFixture fx;
  fx.net = comparator_net("rank-blunt");
  fx.weights.blocks.emplace("cmp", scalar_block({0.0f, 1.0f}));
  fx.data.samples.push_back(Tensor::flat({1.0f}));
  fx.data.labels.push_back(1);
  fx.data.samples.push_back(Tensor::flat({-0.05f}));
  fx.data.labels.push_back(1);  // hopeless: the clean net answers class 0
  return fx;
}

bool is_fixture_name(const std::string& name) {
  int param = 0;
  return name == "rank-sharp" || name == "rank-blunt" ||
         parse_indexed(name, "toy-chain-", param) || parse_indexed(name, "toy-avg-", param);
}

ToyFixture fixture_by_name(const std::string& name, double margin) {
  int param = 0;
  if (parse_indexed(name, "toy-chain-", param)) return toy_chain_fixture(param, margin);
  if (parse_indexed(name, "toy-avg-", param)) return toy_avg_fixture(param, margin);
  if (name == "rank-sharp") return rank_sharp_fixture();
  if (name == "rank-blunt") return rank_blunt_fixture();
  throw SpecError("no fixture generator for '" + name + "'");
}

}  // namespace pimdc
