#include <doctest.h>

#include <cstring>
#include <random>

#include "oracles.hpp"
#include "pimdc/error.hpp"
#include "pimdc/infer.hpp"
#include "pimdc/zoo.hpp"

using namespace pimdc;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::int64_t h, std::int64_t w, std::int64_t c) {
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  Tensor t(h, w, c);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

WeightBlock random_block(std::mt19937_64& rng, std::int64_t m, std::int64_t c,
                         std::int64_t r, std::int64_t s) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(static_cast<std::size_t>(m * c * r * s));
  for (float& v : values) v = dist(rng);
  return WeightBlock::make(m, c, r, s, std::move(values));
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("scalar and summation conv cases") {
  Tensor x = Tensor::flat({2.0f});
  WeightBlock w = WeightBlock::make(1, 1, 1, 1, {3.0f});
  Tensor y = conv_forward(x, w, 1, 0);
  CHECK(y.size() == 1);
  CHECK(y.at(0, 0, 0) == 6.0f);

  Tensor ones(3, 3, 1);
  for (float& v : ones.data()) v = 1.0f;
  WeightBlock box = WeightBlock::make(1, 1, 3, 3, std::vector<float>(9, 1.0f));
  Tensor sum = conv_forward(ones, box, 1, 0);
  CHECK(sum.size() == 1);
  CHECK(sum.at(0, 0, 0) == 9.0f);
}

TEST_CASE("conv matches the reference elementwise, exactly") {
  std::mt19937_64 rng(11);
  Tensor x = random_tensor(rng, 5, 5, 2);
  WeightBlock w = random_block(rng, 4, 2, 3, 3);

  for (std::int64_t stride : {1, 2}) {
    for (std::int64_t pad : {0, 1}) {
      Tensor got = conv_forward(x, w, stride, pad);
      Tensor want = oracles::conv_reference(x, w, stride, pad);
      CHECK(bit_equal(got, want));
    }
  }
}

TEST_CASE("elementwise and pooling ops") {
  Tensor x = Tensor::flat({-1.0f, 0.0f, 2.0f});
  Tensor r = relu(x);
  CHECK(r.at(0, 0, 0) == 0.0f);
  CHECK(r.at(0, 0, 1) == 0.0f);
  CHECK(r.at(0, 0, 2) == 2.0f);

  Tensor zero(1, 1, 3);
  CHECK(bit_equal(add(x, zero), x));
  CHECK_THROWS_AS(add(x, Tensor(1, 1, 2)), std::invalid_argument);

  Tensor square(2, 2, 1);
  square.at(0, 0, 0) = 1.0f;
  square.at(0, 1, 0) = 2.0f;
  square.at(1, 0, 0) = 3.0f;
  square.at(1, 1, 0) = 4.0f;
  Tensor mp = maxpool(square, 2, 2, 2, 0);
  CHECK(mp.size() == 1);
  CHECK(mp.at(0, 0, 0) == 4.0f);
  Tensor ap = avgpool(square, 2, 2, 2, 0);
  CHECK(ap.at(0, 0, 0) == 2.5f);

  // Padded cells are ignored by max, counted as zeros by avg; a window with
  // no in-bounds cell yields 0.
  Tensor neg(1, 1, 1);
  neg.at(0, 0, 0) = -3.0f;
  Tensor mp_pad = maxpool(neg, 1, 3, 1, 1);  // output 3x1, center covers the input
  CHECK(mp_pad.h() == 3);
  CHECK(mp_pad.at(1, 0, 0) == -3.0f);
  CHECK(mp_pad.at(0, 0, 0) == 0.0f);
  Tensor ap_pad = avgpool(neg, 1, 3, 1, 1);
  CHECK(ap_pad.at(1, 0, 0) == -1.0f);
  CHECK(ap_pad.at(0, 0, 0) == 0.0f);
}

TEST_CASE("fc is conv with a full-map filter") {
  std::mt19937_64 rng(13);
  Tensor x = random_tensor(rng, 4, 3, 2);
  WeightBlock w = random_block(rng, 5, 2, 4, 3);
  CHECK(bit_equal(fc_forward(x, w), conv_forward(x, w, 1, 0)));
  CHECK_THROWS_AS(fc_forward(random_tensor(rng, 3, 3, 2), w), std::invalid_argument);
}

TEST_CASE("network_forward composes layers in topological order") {
  auto fx = toy_chain_fixture(4, 1.5);
  auto shapes = infer_shapes(fx.net);
  Tensor logits = network_forward(fx.net, shapes, fx.weights, fx.data.samples[0]);
  CHECK(logits.size() == 1);
  CHECK(logits.at(0, 0, 0) == 1.5f);

  // Zero weights -> zero logits -> class 0 by tie-break.
  WeightSet zeros = fx.weights;
  for (auto& [id, block] : zeros.blocks) {
    for (float& v : block.data) v = 0.0f;
  }
  Tensor zlogits = network_forward(fx.net, shapes, zeros, fx.data.samples[0]);
  CHECK(zlogits.at(0, 0, 0) == 0.0f);
  CHECK(classify(zlogits) == 0);

  // Single-conv net equals conv_forward directly.
  std::mt19937_64 rng(17);
  NetworkSpec net;
  net.name = "one";
  net.input = {5, 5, 2};
  LayerSpec conv;
  conv.id = "c1";
  conv.kind = LayerKind::conv;
  conv.r = 3;
  conv.s = 3;
  conv.m = 4;
  conv.stride = 1;
  conv.pad = 0;
  net.layers.push_back(conv);
  WeightSet weights;
  weights.blocks.emplace("c1", random_block(rng, 4, 2, 3, 3));
  Tensor x = random_tensor(rng, 5, 5, 2);
  Tensor via_net = network_forward(net, infer_shapes(net), weights, x);
  Tensor direct = conv_forward(x, weights.blocks.at("c1"), 1, 0);
  CHECK(bit_equal(via_net, direct));
}

TEST_CASE("branching nets with add and pooling match shapes and the oracle") {
  // conv -> relu -> {conv, identity} -> add -> maxpool -> fc
  NetworkSpec net;
  net.name = "branchy";
  net.input = {6, 6, 2};
  auto conv = [&](std::string id, std::int64_t r, std::int64_t m, std::int64_t pad,
                  std::vector<std::string> in) {
    LayerSpec l;
    l.id = std::move(id);
    l.kind = LayerKind::conv;
    l.r = r;
    l.s = r;
    l.m = m;
    l.stride = 1;
    l.pad = pad;
    l.inputs = std::move(in);
    net.layers.push_back(l);
  };
  conv("c1", 3, 4, 1, {});
  LayerSpec act;
  act.id = "r1";
  act.kind = LayerKind::relu;
  act.inputs = {"c1"};
  net.layers.push_back(act);
  conv("c2", 3, 4, 1, {"r1"});
  LayerSpec sum;
  sum.id = "a1";
  sum.kind = LayerKind::add;
  sum.inputs = {"c2", "r1"};
  net.layers.push_back(sum);
  LayerSpec pool;
  pool.id = "p1";
  pool.kind = LayerKind::maxpool;
  pool.r = 2;
  pool.s = 2;
  pool.stride = 2;
  pool.pad = 0;
  pool.inputs = {"a1"};
  net.layers.push_back(pool);
  LayerSpec fc;
  fc.id = "f1";
  fc.kind = LayerKind::fc;
  fc.r = 3;
  fc.s = 3;
  fc.m = 3;
  fc.inputs = {"p1"};
  net.layers.push_back(fc);

  REQUIRE(validate(net).empty());
  auto shapes = infer_shapes(net);

  std::mt19937_64 rng(23);
  WeightSet weights;
  weights.blocks.emplace("c1", random_block(rng, 4, 2, 3, 3));
  weights.blocks.emplace("c2", random_block(rng, 4, 4, 3, 3));
  weights.blocks.emplace("f1", random_block(rng, 3, 4, 3, 3));
  Tensor x = random_tensor(rng, 6, 6, 2);

  Tensor logits = network_forward(net, shapes, weights, x);
  std::size_t last = net.layers.size() - 1;
  CHECK(logits.h() == shapes.at(last).out_h);
  CHECK(logits.w() == shapes.at(last).out_w);
  CHECK(logits.c() == shapes.at(last).out_c);

  // Independent composition from per-layer references.
  Tensor t1 = oracles::conv_reference(x, weights.blocks.at("c1"), 1, 1);
  Tensor t2 = relu(t1);
  Tensor t3 = oracles::conv_reference(t2, weights.blocks.at("c2"), 1, 1);
  Tensor t4 = add(t3, t2);
  Tensor t5 = maxpool(t4, 2, 2, 2, 0);
  Tensor t6 = oracles::conv_reference(t5, weights.blocks.at("f1"), 1, 0);
  CHECK(bit_equal(logits, t6));

  // Determinism: bit-identical across repeated runs.
  CHECK(bit_equal(network_forward(net, shapes, weights, x), logits));

  WeightSet missing = weights;
  missing.blocks.erase("c2");
  CHECK_THROWS_AS(network_forward(net, shapes, missing, x), SpecError);
}

TEST_CASE("randomized nets equal composed per-layer references") {
  std::mt19937_64 rng(29);
  auto dim = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  for (int iter = 0; iter < 20; ++iter) {
    std::int64_t h = dim(4, 8), w = dim(4, 8), c = dim(1, 3);
    NetworkSpec net;
    net.name = "rand" + std::to_string(iter);
    net.input = {h, w, c};
    WeightSet weights;
    Tensor x = random_tensor(rng, h, w, c);
    Tensor expect = x;

    int layer_count = static_cast<int>(dim(1, 4));
    std::string prev;
    for (int li = 0; li < layer_count; ++li) {
      std::string id = "l" + std::to_string(li);
      int choice = static_cast<int>(dim(0, 2));
      if (choice == 0 && expect.h() >= 2 && expect.w() >= 2) {
        LayerSpec pool;
        pool.id = id;
        pool.kind = LayerKind::maxpool;
        pool.r = pool.s = 2;
        pool.stride = 2;
        pool.pad = 0;
        if (li > 0) pool.inputs = {prev};
        net.layers.push_back(pool);
        expect = maxpool(expect, 2, 2, 2, 0);
      } else if (choice == 1) {
        LayerSpec act;
        act.id = id;
        act.kind = LayerKind::relu;
        if (li > 0) act.inputs = {prev};
        net.layers.push_back(act);
        expect = relu(expect);
      } else {
        std::int64_t m = dim(1, 4);
        LayerSpec conv;
        conv.id = id;
        conv.kind = LayerKind::conv;
        conv.r = conv.s = 3;
        conv.m = m;
        conv.stride = 1;
        conv.pad = 1;
        if (li > 0) conv.inputs = {prev};
        net.layers.push_back(conv);
        WeightBlock block = random_block(rng, m, expect.c(), 3, 3);
        expect = oracles::conv_reference(expect, block, 1, 1);
        weights.blocks.emplace(id, std::move(block));
      }
      prev = id;
    }

    REQUIRE(validate(net).empty());
    Tensor got = network_forward(net, infer_shapes(net), weights, x);
    CHECK(bit_equal(got, expect));
  }
}

TEST_CASE("classify follows argmax with sign semantics for scalars") {
  CHECK(classify(Tensor::flat({0.2f, 0.7f, 0.1f})) == 1);
  CHECK(classify(Tensor::flat({0.5f, 0.5f})) == 0);  // tie -> lowest index
  CHECK(classify(Tensor::flat({0.7f})) == 0);
  CHECK(classify(Tensor::flat({-0.1f})) == 1);
  CHECK(classify(Tensor::flat({0.0f})) == 0);
}

TEST_CASE("weight binding is checked against the spec") {
  auto fx = toy_chain_fixture(2, 1.0);
  auto shapes = infer_shapes(fx.net);
  CHECK_NOTHROW(check_weights(fx.net, shapes, fx.weights));

  WeightSet wrong = fx.weights;
  wrong.blocks.at("l1") = WeightBlock::make(2, 1, 1, 1, {1.0f, 1.0f});
  CHECK_THROWS_AS(check_weights(fx.net, shapes, wrong), SpecError);
}
