#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pimdc/error.hpp"
#include "pimdc/netir.hpp"

using namespace pimdc;

namespace {

LayerSpec conv_layer(std::string id, std::int64_t r, std::int64_t s, std::int64_t m,
                     std::int64_t stride = 1, std::int64_t pad = 0,
                     std::vector<std::string> inputs = {}) {
  LayerSpec layer;
  layer.id = std::move(id);
  layer.kind = LayerKind::conv;
  layer.r = r;
  layer.s = s;
  layer.m = m;
  layer.stride = stride;
  layer.pad = pad;
  layer.inputs = std::move(inputs);
  return layer;
}

NetworkSpec single_conv(std::int64_t h, std::int64_t w, std::int64_t c, std::int64_t r,
                        std::int64_t s, std::int64_t m, std::int64_t stride = 1,
                        std::int64_t pad = 0) {
  NetworkSpec net;
  net.name = "single";
  net.input = {h, w, c};
  net.layers.push_back(conv_layer("c1", r, s, m, stride, pad));
  return net;
}

bool has_violation(const std::vector<Violation>& violations, const std::string& needle) {
  for (const auto& v : violations) {
    if (v.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("well-formed minimal net validates cleanly") {
  CHECK(validate(single_conv(5, 5, 2, 3, 3, 4)).empty());
}

TEST_CASE("add arity rule") {
  NetworkSpec net;
  net.name = "badadd";
  net.input = {4, 4, 1};
  net.layers.push_back(conv_layer("c1", 1, 1, 1));
  LayerSpec bad;
  bad.id = "a1";
  bad.kind = LayerKind::add;
  bad.inputs = {"c1"};
  net.layers.push_back(bad);
  CHECK(has_violation(validate(net), "add requires 2 inputs"));
}

TEST_CASE("fc must cover the whole input map") {
  NetworkSpec net;
  net.name = "badfc";
  net.input = {5, 5, 1};
  LayerSpec fc;
  fc.id = "f1";
  fc.kind = LayerKind::fc;
  fc.r = 3;
  fc.s = 5;
  fc.m = 10;
  net.layers.push_back(fc);
  CHECK(has_violation(validate(net), "fc requires r = input height"));
  CHECK_THROWS_AS(infer_shapes(net), SpecError);
}

TEST_CASE("shape inference basics") {
  auto shapes = infer_shapes(single_conv(5, 5, 2, 3, 3, 4));
  CHECK(shapes.at(0).out_h == 3);
  CHECK(shapes.at(0).out_w == 3);
  CHECK(shapes.at(0).out_c == 4);

  auto identity = infer_shapes(single_conv(9, 7, 3, 1, 1, 5));
  CHECK(identity.at(0).out_h == 9);
  CHECK(identity.at(0).out_w == 7);
  CHECK(identity.at(0).out_c == 5);

  auto big = infer_shapes(single_conv(227, 227, 3, 11, 11, 96, 4, 0));
  CHECK(big.at(0).out_h == 55);
  CHECK(big.at(0).out_w == 55);
}

TEST_CASE("filter larger than padded input is rejected") {
  auto violations = validate(single_conv(4, 4, 1, 7, 7, 2));
  CHECK(has_violation(violations, "filter larger than padded input"));
}

TEST_CASE("counts match the spec example") {
  NetworkSpec net = single_conv(5, 5, 2, 3, 3, 4);
  auto report = count(net, infer_shapes(net));
  CHECK(report.layers[0].num_weights == 72);
  CHECK(report.layers[0].num_macs == 648);
  CHECK(report.layers[0].num_output_activations == 36);
  CHECK(report.layers[0].num_input_activations == 50);

  auto oracle = oracles::loop_nest_count(5, 5, 2, 3, 3, 4, 1, 0);
  CHECK(report.layers[0].num_weights == oracle.weights);
  CHECK(report.layers[0].num_macs == oracle.macs);
  CHECK(report.layers[0].num_output_activations == oracle.out_acts);
}

TEST_CASE("fc counts as a full-map conv") {
  NetworkSpec net;
  net.name = "fcnet";
  net.input = {6, 5, 3};
  LayerSpec fc;
  fc.id = "f1";
  fc.kind = LayerKind::fc;
  fc.r = 6;
  fc.s = 5;
  fc.m = 10;
  net.layers.push_back(fc);

  auto shapes = infer_shapes(net);
  CHECK(shapes.at(0).out_h == 1);
  CHECK(shapes.at(0).out_w == 1);
  auto report = count(net, shapes);
  CHECK(report.layers[0].num_macs == 6ull * 5 * 3 * 10);
  CHECK(report.layers[0].num_macs == report.layers[0].num_weights);
}

TEST_CASE("pool, relu and add carry no weights or MACs but produce activations") {
  NetworkSpec net;
  net.name = "mixed";
  net.input = {8, 8, 2};
  net.layers.push_back(conv_layer("c1", 3, 3, 4, 1, 1));
  LayerSpec pool;
  pool.id = "p1";
  pool.kind = LayerKind::maxpool;
  pool.r = 2;
  pool.s = 2;
  pool.stride = 2;
  pool.pad = 0;
  pool.inputs = {"c1"};
  net.layers.push_back(pool);
  LayerSpec act;
  act.id = "r1";
  act.kind = LayerKind::relu;
  act.inputs = {"p1"};
  net.layers.push_back(act);
  net.layers.push_back(conv_layer("c2", 1, 1, 4, 1, 0, {"r1"}));
  LayerSpec sum;
  sum.id = "a1";
  sum.kind = LayerKind::add;
  sum.inputs = {"c2", "r1"};
  net.layers.push_back(sum);

  REQUIRE(validate(net).empty());
  auto report = count(net, infer_shapes(net));
  CHECK(report.layers[1].num_weights == 0);
  CHECK(report.layers[1].num_macs == 0);
  CHECK(report.layers[1].num_output_activations == 4ull * 4 * 4);
  CHECK(report.layers[2].num_macs == 0);
  CHECK(report.layers[4].num_weights == 0);
  // The add consumes both operands.
  CHECK(report.layers[4].num_input_activations == 2ull * 4 * 4 * 4);
  std::uint64_t out_total = 0;
  for (const auto& l : report.layers) out_total += l.num_output_activations;
  CHECK(report.total.num_output_activations == out_total);
}

TEST_CASE("randomized layers match the loop-nest enumeration oracle") {
  std::mt19937_64 rng(7);
  auto dim = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  for (int i = 0; i < 60; ++i) {
    std::int64_t h = dim(1, 8), w = dim(1, 8), c = dim(1, 8), m = dim(1, 8);
    std::int64_t pad = dim(0, 2), stride = dim(1, 3);
    std::int64_t r = dim(1, h + 2 * pad), s = dim(1, w + 2 * pad);
    NetworkSpec net = single_conv(h, w, c, r, s, m, stride, pad);
    REQUIRE(validate(net).empty());
    auto shapes = infer_shapes(net);
    auto report = count(net, shapes);
    auto oracle = oracles::loop_nest_count(h, w, c, r, s, m, stride, pad);
    CHECK(report.layers[0].num_weights == oracle.weights);
    CHECK(report.layers[0].num_macs == oracle.macs);
    CHECK(report.layers[0].num_output_activations == oracle.out_acts);
    // num_macs = num_weights * e * f
    std::uint64_t ef = static_cast<std::uint64_t>(shapes.at(0).out_h) * shapes.at(0).out_w;
    CHECK(report.layers[0].num_macs == report.layers[0].num_weights * ef);
  }
}

TEST_CASE("shape inference is invariant to layer id renaming") {
  NetworkSpec net;
  net.name = "chain";
  net.input = {10, 10, 3};
  net.layers.push_back(conv_layer("a", 3, 3, 8, 1, 1));
  net.layers.push_back(conv_layer("b", 3, 3, 16, 2, 1, {"a"}));
  net.layers.push_back(conv_layer("c", 1, 1, 4, 1, 0, {"b"}));

  NetworkSpec renamed = net;
  for (auto& layer : renamed.layers) {
    layer.id = "x_" + layer.id;
    for (auto& ref : layer.inputs) ref = "x_" + ref;
  }

  auto s1 = infer_shapes(net);
  auto s2 = infer_shapes(renamed);
  REQUIRE(s1.layers.size() == s2.layers.size());
  for (std::size_t i = 0; i < s1.layers.size(); ++i) {
    CHECK(s1.at(i).out_h == s2.at(i).out_h);
    CHECK(s1.at(i).out_w == s2.at(i).out_w);
    CHECK(s1.at(i).out_c == s2.at(i).out_c);
  }
}

TEST_CASE("structural violations are reported") {
  NetworkSpec net;
  net.name = "bad";
  net.input = {4, 4, 1};
  net.layers.push_back(conv_layer("c1", 1, 1, 1));
  net.layers.push_back(conv_layer("c1", 1, 1, 1, 1, 0, {"c1"}));
  CHECK(has_violation(validate(net), "duplicate layer id"));

  NetworkSpec fwd;
  fwd.name = "fwd";
  fwd.input = {4, 4, 1};
  fwd.layers.push_back(conv_layer("c1", 1, 1, 1));
  fwd.layers.push_back(conv_layer("c2", 1, 1, 1, 1, 0, {"c3"}));
  fwd.layers.push_back(conv_layer("c3", 1, 1, 1, 1, 0, {"c2"}));
  CHECK(has_violation(validate(fwd), "must come earlier"));

  NetworkSpec dangling;
  dangling.name = "dangling";
  dangling.input = {4, 4, 1};
  dangling.layers.push_back(conv_layer("c1", 1, 1, 1));
  dangling.layers.push_back(conv_layer("c2", 1, 1, 1, 1, 0, {"zz"}));
  CHECK(has_violation(validate(dangling), "does not exist"));

  NetworkSpec two_roots;
  two_roots.name = "roots";
  two_roots.input = {4, 4, 1};
  two_roots.layers.push_back(conv_layer("c1", 1, 1, 1));
  two_roots.layers.push_back(conv_layer("c2", 1, 1, 1));  // second 0-input layer
  auto violations = validate(two_roots);
  CHECK(has_violation(violations, "exactly 1 input"));
  CHECK(has_violation(violations, "terminal"));

  NetworkSpec pool_m;
  pool_m.name = "poolm";
  pool_m.input = {4, 4, 1};
  LayerSpec pool;
  pool.id = "p1";
  pool.kind = LayerKind::avgpool;
  pool.r = 2;
  pool.s = 2;
  pool.m = 3;
  pool_m.layers.push_back(pool);
  CHECK(has_violation(validate(pool_m), "pool carries no m"));

  NetworkSpec relu_rs;
  relu_rs.name = "relurs";
  relu_rs.input = {4, 4, 1};
  LayerSpec act;
  act.id = "r1";
  act.kind = LayerKind::relu;
  act.r = 2;
  relu_rs.layers.push_back(act);
  CHECK(has_violation(validate(relu_rs), "relu/add carry no r/s/m"));
}

TEST_CASE("count overflow is detected, not wrapped") {
  NetworkSpec net;
  net.name = "huge";
  net.input = {1, 1, 1};
  net.layers.push_back(conv_layer("c1", 1, 1, std::int64_t(1) << 62));
  net.layers.push_back(conv_layer("c2", 1, 1, std::int64_t(1) << 62, 1, 0, {"c1"}));
  REQUIRE(validate(net).empty());
  auto shapes = infer_shapes(net);
  CHECK_THROWS_AS(count(net, shapes), std::overflow_error);
}

TEST_CASE("JSON round trip preserves the network") {
  NetworkSpec net;
  net.name = "roundtrip";
  net.input = {8, 8, 3};
  net.layers.push_back(conv_layer("c1", 3, 3, 4, 2, 1));
  LayerSpec act;
  act.id = "r1";
  act.kind = LayerKind::relu;
  act.inputs = {"c1"};
  net.layers.push_back(act);

  NetworkSpec parsed = parse_network_json(network_to_json(net));
  CHECK(parsed.name == net.name);
  REQUIRE(parsed.layers.size() == net.layers.size());
  CHECK(parsed.layers[0].id == "c1");
  CHECK(parsed.layers[0].kind == LayerKind::conv);
  CHECK(parsed.layers[0].stride == 2);
  CHECK(parsed.layers[1].kind == LayerKind::relu);
  CHECK(parsed.layers[1].inputs == std::vector<std::string>{"c1"});
  // Emission is stable.
  CHECK(network_to_json(parsed) == network_to_json(net));
}

TEST_CASE("JSON schema is strict") {
  CHECK_THROWS_AS(parse_network_json("{"), SpecError);
  CHECK_THROWS_AS(parse_network_json(R"({"name":"x","input":{"h":1,"w":1,"c":1},"layers":[],"extra":1})"),
                  SpecError);
  CHECK_THROWS_AS(parse_network_json(R"({"name":"x","input":{"h":1,"w":1,"c":1,"d":2},"layers":[]})"),
                  SpecError);
  CHECK_THROWS_AS(
      parse_network_json(
          R"({"name":"x","input":{"h":1,"w":1,"c":1},"layers":[{"id":"c1","kind":"conv","groups":2}]})"),
      SpecError);
  CHECK_THROWS_AS(
      parse_network_json(
          R"({"name":"x","input":{"h":1,"w":1,"c":1},"layers":[{"id":"c1","kind":"conv","r":1.5}]})"),
      SpecError);

  try {
    parse_network_json(
        R"({"name":"x","input":{"h":1,"w":1,"c":1},"layers":[{"id":"mystery","kind":"warp"}]})");
    CHECK(false);
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("mystery") != std::string::npos);
  }
}
