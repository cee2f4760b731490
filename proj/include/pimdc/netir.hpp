#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimdc {

enum class LayerKind { conv, fc, maxpool, avgpool, relu, add };

const char* to_string(LayerKind kind);
std::optional<LayerKind> layer_kind_from_string(std::string_view name);

// One node of the layer DAG. Filter geometry follows the usual CNN symbols:
// r/s filter height/width, m output channels; input channels and feature-map
// sizes are derived by shape inference. A fully-connected layer is a
// convolution whose filter covers the whole input map (r = H, s = W).
struct LayerSpec {
  std::string id;
  LayerKind kind = LayerKind::conv;
  std::optional<std::int64_t> r;
  std::optional<std::int64_t> s;
  std::optional<std::int64_t> m;
  std::optional<std::int64_t> stride;  // uniform in both dimensions
  std::optional<std::int64_t> pad;     // symmetric zero padding
  std::vector<std::string> inputs;     // empty = reads the network input

  bool weighted() const { return kind == LayerKind::conv || kind == LayerKind::fc; }
  bool windowed() const { return weighted() || kind == LayerKind::maxpool || kind == LayerKind::avgpool; }
  std::int64_t stride_or_default() const { return stride.value_or(1); }
  std::int64_t pad_or_default() const { return pad.value_or(0); }
};

struct InputShape {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t c = 0;
};

// Layers are listed in topological order: every input reference points to an
// earlier entry, and exactly one layer is consumed by nobody (the output).
struct NetworkSpec {
  std::string name;
  InputShape input;
  std::vector<LayerSpec> layers;

  std::optional<std::size_t> index_of(std::string_view id) const;
};

struct Violation {
  std::string layer_id;  // empty for network-level rules
  std::string message;
};

// Empty result iff the net satisfies every structural and shape invariant.
std::vector<Violation> validate(const NetworkSpec& net);

struct LayerShape {
  std::int64_t in_h = 0, in_w = 0, in_c = 0;
  std::int64_t out_h = 0, out_w = 0, out_c = 0;  // output map E x F x M
};

struct ShapeInfo {
  std::vector<LayerShape> layers;  // aligned with NetworkSpec::layers

  const LayerShape& at(std::size_t i) const { return layers.at(i); }
};

// Requires validate(net) to be empty; throws SpecError otherwise.
ShapeInfo infer_shapes(const NetworkSpec& net);

struct LayerCounts {
  std::string layer_id;
  LayerKind kind = LayerKind::conv;
  std::uint64_t num_weights = 0;
  std::uint64_t num_macs = 0;
  std::uint64_t num_input_activations = 0;
  std::uint64_t num_output_activations = 0;
};

struct CountReport {
  std::vector<LayerCounts> layers;
  LayerCounts total;  // layer_id "TOTAL"
};

// Weight/MAC/activation counters. Biases are not counted; pool/relu/add
// layers hold no weights and contribute zero MACs but do produce
// activations. Throws std::overflow_error instead of wrapping.
CountReport count(const NetworkSpec& net, const ShapeInfo& shapes);

std::string count_report_csv(const CountReport& report);

// Strict JSON spec file: {name, input:{h,w,c}, layers:[{id, kind, r?, s?,
// m?, stride?, pad?, inputs:[...]}]}. Unknown keys are rejected.
NetworkSpec parse_network_json(const std::string& text);
std::string network_to_json(const NetworkSpec& net);

std::size_t terminal_layer_index(const NetworkSpec& net);  // requires valid net

}  // namespace pimdc
