#include "pimdc/netir.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pimdc/checked.hpp"
#include "pimdc/error.hpp"

namespace pimdc {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::fc: return "fc";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::relu: return "relu";
    case LayerKind::add: return "add";
  }
  return "?";
}

std::optional<LayerKind> layer_kind_from_string(std::string_view name) {
  if (name == "conv") return LayerKind::conv;
  if (name == "fc") return LayerKind::fc;
  if (name == "maxpool") return LayerKind::maxpool;
  if (name == "avgpool") return LayerKind::avgpool;
  if (name == "relu") return LayerKind::relu;
  if (name == "add") return LayerKind::add;
  return std::nullopt;
}

std::optional<std::size_t> NetworkSpec::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].id == id) return i;
  }
  return std::nullopt;
}

namespace {

// Output map size for a windowed op under symmetric zero padding.
std::optional<std::int64_t> out_extent(std::int64_t in, std::int64_t window,
                                       std::int64_t stride, std::int64_t pad) {
  std::int64_t padded = in + 2 * pad;
  if (padded < window) return std::nullopt;
  return (padded - window) / stride + 1;
}

struct FieldRule {
  bool wants_rsm;
  bool wants_m;
};

void check_fields(const LayerSpec& layer, std::vector<Violation>& out) {
  auto bad = [&](const std::string& msg) { out.push_back({layer.id, msg}); };

  switch (layer.kind) {
    case LayerKind::conv:
    case LayerKind::fc:
      if (!layer.r || *layer.r < 1) bad("conv/fc requires r >= 1");
      if (!layer.s || *layer.s < 1) bad("conv/fc requires s >= 1");
      if (!layer.m || *layer.m < 1) bad("conv/fc requires m >= 1");
      break;
    case LayerKind::maxpool:
    case LayerKind::avgpool:
      if (!layer.r || *layer.r < 1) bad("pool requires r >= 1");
      if (!layer.s || *layer.s < 1) bad("pool requires s >= 1");
      if (layer.m) bad("pool carries no m (output channels follow the input)");
      break;
    case LayerKind::relu:
    case LayerKind::add:
      if (layer.r || layer.s || layer.m) bad("relu/add carry no r/s/m");
      if (layer.stride || layer.pad) bad("relu/add carry no stride/pad");
      break;
  }
  if (layer.windowed()) {
    if (layer.stride && *layer.stride < 1) bad("stride must be >= 1");
    if (layer.pad && *layer.pad < 0) bad("pad must be >= 0");
  }
}

// Shared by validate() and infer_shapes(): structural checks, then shape
// propagation. Shape propagation stops at the first shape violation because
// downstream dimensions would be meaningless.
std::vector<Violation> check_and_infer(const NetworkSpec& net,
                                       ShapeInfo* shapes_out) {
  std::vector<Violation> violations;

  if (net.layers.empty()) {
    violations.push_back({"", "network has no layers"});
    return violations;
  }
  if (net.input.h < 1 || net.input.w < 1 || net.input.c < 1) {
    violations.push_back({"", "network input dimensions must be >= 1"});
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (layer.id.empty()) violations.push_back({layer.id, "layer id is empty"});
    if (!index.emplace(layer.id, i).second) {
      violations.push_back({layer.id, "duplicate layer id"});
    }
  }

  std::vector<int> consumers(net.layers.size(), 0);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    check_fields(layer, violations);

    std::size_t expected = layer.kind == LayerKind::add ? 2 : 1;
    if (i == 0) {
      if (!layer.inputs.empty()) {
        violations.push_back({layer.id, "first layer reads the network input and takes no layer inputs"});
      }
    } else if (layer.inputs.size() != expected) {
      violations.push_back(
          {layer.id, layer.kind == LayerKind::add
                         ? "add requires 2 inputs"
                         : "layer requires exactly 1 input"});
    }
    for (const auto& ref : layer.inputs) {
      auto it = index.find(ref);
      if (it == index.end()) {
        violations.push_back({layer.id, "input '" + ref + "' does not exist"});
      } else if (it->second >= i) {
        violations.push_back({layer.id, "input '" + ref + "' must come earlier (topological order)"});
      } else {
        ++consumers[it->second];
      }
    }
  }

  int terminals = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (consumers[i] == 0) ++terminals;
  }
  if (terminals != 1) {
    violations.push_back({"", "network must have exactly one terminal layer, found " +
                                  std::to_string(terminals)});
  }

  if (!violations.empty()) return violations;

  // Shape propagation in list order.
  ShapeInfo shapes;
  shapes.layers.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    auto& shape = shapes.layers[i];

    if (i == 0) {
      shape.in_h = net.input.h;
      shape.in_w = net.input.w;
      shape.in_c = net.input.c;
    } else {
      const auto& first = shapes.layers[*net.index_of(layer.inputs[0])];
      shape.in_h = first.out_h;
      shape.in_w = first.out_w;
      shape.in_c = first.out_c;
      if (layer.kind == LayerKind::add) {
        const auto& second = shapes.layers[*net.index_of(layer.inputs[1])];
        if (second.out_h != shape.in_h || second.out_w != shape.in_w ||
            second.out_c != shape.in_c) {
          violations.push_back({layer.id, "add inputs must have identical shapes"});
          return violations;
        }
      }
    }

    if (layer.windowed()) {
      std::int64_t stride = layer.stride_or_default();
      std::int64_t pad = layer.pad_or_default();
      if (layer.kind == LayerKind::fc &&
          (*layer.r != shape.in_h || *layer.s != shape.in_w)) {
        violations.push_back(
            {layer.id, "fc requires r = input height and s = input width (got r=" +
                           std::to_string(*layer.r) + ", s=" + std::to_string(*layer.s) +
                           " on " + std::to_string(shape.in_h) + "x" +
                           std::to_string(shape.in_w) + " input)"});
        return violations;
      }
      auto e = out_extent(shape.in_h, *layer.r, stride, pad);
      auto f = out_extent(shape.in_w, *layer.s, stride, pad);
      if (!e || !f) {
        violations.push_back({layer.id, "filter larger than padded input"});
        return violations;
      }
      shape.out_h = *e;
      shape.out_w = *f;
      shape.out_c = layer.weighted() ? *layer.m : shape.in_c;
    } else {
      shape.out_h = shape.in_h;
      shape.out_w = shape.in_w;
      shape.out_c = shape.in_c;
    }
  }

  if (shapes_out) *shapes_out = std::move(shapes);
  return violations;
}

}  // namespace

std::vector<Violation> validate(const NetworkSpec& net) {
  return check_and_infer(net, nullptr);
}

ShapeInfo infer_shapes(const NetworkSpec& net) {
  ShapeInfo shapes;
  auto violations = check_and_infer(net, &shapes);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid network '" << net.name << "':";
    for (const auto& v : violations) {
      msg << " [" << (v.layer_id.empty() ? "net" : v.layer_id) << "] " << v.message << ";";
    }
    throw SpecError(msg.str());
  }
  return shapes;
}

std::size_t terminal_layer_index(const NetworkSpec& net) {
  std::vector<int> consumers(net.layers.size(), 0);
  for (const auto& layer : net.layers) {
    for (const auto& ref : layer.inputs) {
      if (auto idx = net.index_of(ref)) ++consumers[*idx];
    }
  }
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    if (consumers[i] == 0) return i;
  }
  throw SpecError("network has no terminal layer");
}

CountReport count(const NetworkSpec& net, const ShapeInfo& shapes) {
  CountReport report;
  report.total.layer_id = "TOTAL";

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    const auto& shape = shapes.at(i);
    LayerCounts counts;
    counts.layer_id = layer.id;
    counts.kind = layer.kind;

    std::uint64_t ef = checked_mul(static_cast<std::uint64_t>(shape.out_h),
                                   static_cast<std::uint64_t>(shape.out_w), layer.id.c_str());
    if (layer.weighted()) {
      std::uint64_t filter = checked_mul(static_cast<std::uint64_t>(*layer.r),
                                         static_cast<std::uint64_t>(*layer.s), layer.id.c_str());
      filter = checked_mul(filter, static_cast<std::uint64_t>(shape.in_c), layer.id.c_str());
      counts.num_weights = checked_mul(filter, static_cast<std::uint64_t>(*layer.m), layer.id.c_str());
      counts.num_macs = checked_mul(counts.num_weights, ef, layer.id.c_str());
    }
    std::uint64_t in_volume =
        checked_mul(checked_mul(static_cast<std::uint64_t>(shape.in_h),
                                static_cast<std::uint64_t>(shape.in_w), layer.id.c_str()),
                    static_cast<std::uint64_t>(shape.in_c), layer.id.c_str());
    std::uint64_t fanin = i == 0 ? 1 : layer.inputs.size();
    counts.num_input_activations = checked_mul(in_volume, fanin, layer.id.c_str());
    counts.num_output_activations =
        checked_mul(ef, static_cast<std::uint64_t>(shape.out_c), layer.id.c_str());

    report.total.num_weights = checked_add(report.total.num_weights, counts.num_weights, "total");
    report.total.num_macs = checked_add(report.total.num_macs, counts.num_macs, "total");
    report.total.num_input_activations =
        checked_add(report.total.num_input_activations, counts.num_input_activations, "total");
    report.total.num_output_activations =
        checked_add(report.total.num_output_activations, counts.num_output_activations, "total");
    report.layers.push_back(std::move(counts));
  }
  return report;
}

std::string count_report_csv(const CountReport& report) {
  std::string out = "layer_id,kind,num_weights,num_macs,num_input_activations,num_output_activations\n";
  char line[256];
  for (const auto& l : report.layers) {
    std::snprintf(line, sizeof line, "%s,%s,%llu,%llu,%llu,%llu\n", l.layer_id.c_str(),
                  to_string(l.kind), (unsigned long long)l.num_weights,
                  (unsigned long long)l.num_macs, (unsigned long long)l.num_input_activations,
                  (unsigned long long)l.num_output_activations);
    out += line;
  }
  const auto& t = report.total;
  std::snprintf(line, sizeof line, "TOTAL,,%llu,%llu,%llu,%llu\n",
                (unsigned long long)t.num_weights, (unsigned long long)t.num_macs,
                (unsigned long long)t.num_input_activations,
                (unsigned long long)t.num_output_activations);
  out += line;
  return out;
}

namespace {

using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw SpecError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw SpecError("key '" + std::string(key) + "' in " + where + " must be an integer");
  }
  return v.get<std::int64_t>();
}

}  // namespace

NetworkSpec parse_network_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("network spec is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SpecError("network spec must be a JSON object");
  reject_unknown_keys(root, {"name", "input", "layers"}, "network spec");

  NetworkSpec net;
  if (!root.contains("name") || !root["name"].is_string()) {
    throw SpecError("network spec requires a string 'name'");
  }
  net.name = root["name"].get<std::string>();

  if (!root.contains("input") || !root["input"].is_object()) {
    throw SpecError("network spec requires an 'input' object");
  }
  const auto& input = root["input"];
  reject_unknown_keys(input, {"h", "w", "c"}, "input");
  net.input.h = get_int(input, "h", "input");
  net.input.w = get_int(input, "w", "input");
  net.input.c = get_int(input, "c", "input");

  if (!root.contains("layers") || !root["layers"].is_array()) {
    throw SpecError("network spec requires a 'layers' array");
  }
  for (const auto& node : root["layers"]) {
    if (!node.is_object()) throw SpecError("each layer must be a JSON object");
    LayerSpec layer;
    std::string where = "layer";
    if (node.contains("id") && node["id"].is_string()) {
      layer.id = node["id"].get<std::string>();
      where = "layer '" + layer.id + "'";
    } else {
      throw SpecError("every layer requires a string 'id'");
    }
    reject_unknown_keys(node, {"id", "kind", "r", "s", "m", "stride", "pad", "inputs"}, where);

    if (!node.contains("kind") || !node["kind"].is_string()) {
      throw SpecError(where + " requires a string 'kind'");
    }
    auto kind = layer_kind_from_string(node["kind"].get<std::string>());
    if (!kind) {
      throw SpecError(where + " has unknown kind '" + node["kind"].get<std::string>() + "'");
    }
    layer.kind = *kind;

    if (node.contains("r")) layer.r = get_int(node, "r", where);
    if (node.contains("s")) layer.s = get_int(node, "s", where);
    if (node.contains("m")) layer.m = get_int(node, "m", where);
    if (node.contains("stride")) layer.stride = get_int(node, "stride", where);
    if (node.contains("pad")) layer.pad = get_int(node, "pad", where);
    if (node.contains("inputs")) {
      if (!node["inputs"].is_array()) throw SpecError(where + ": 'inputs' must be an array");
      for (const auto& ref : node["inputs"]) {
        if (!ref.is_string()) throw SpecError(where + ": 'inputs' entries must be strings");
        layer.inputs.push_back(ref.get<std::string>());
      }
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::string network_to_json(const NetworkSpec& net) {
  json root;
  root["name"] = net.name;
  root["input"] = {{"h", net.input.h}, {"w", net.input.w}, {"c", net.input.c}};
  root["layers"] = json::array();
  for (const auto& layer : net.layers) {
    json node;
    node["id"] = layer.id;
    node["kind"] = to_string(layer.kind);
    if (layer.r) node["r"] = *layer.r;
    if (layer.s) node["s"] = *layer.s;
    if (layer.m) node["m"] = *layer.m;
    if (layer.stride) node["stride"] = *layer.stride;
    if (layer.pad) node["pad"] = *layer.pad;
    node["inputs"] = layer.inputs;
    root["layers"].push_back(std::move(node));
  }
  return root.dump(2) + "\n";
}

}  // namespace pimdc
