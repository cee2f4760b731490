#pragma once

#include <string>
#include <vector>

#include "pimdc/robustness.hpp"

namespace pimdc {

// Shape-level architecture zoo. Entries carry layer geometry only, no
// pretrained weights. Parameterized families encode their parameter in the
// name: toy-chain-<D> (depth) and toy-avg-<k> (taps).
struct ZooEntry {
  std::string name;
  std::string summary;
};

std::vector<ZooEntry> zoo_list();
bool is_zoo_name(const std::string& name);
NetworkSpec zoo_network(const std::string& name);  // throws SpecError

// Self-contained toy scenarios: network plus constructed weights and a
// labeled dataset, used by the noise/quantization experiments. `margin` is
// the clean distance of the decision statistic from the boundary.
struct ToyFixture {
  NetworkSpec net;
  WeightSet weights;
  Dataset data;
};

// Depth-D chain of unit 1x1 convolutions on a scalar; classifies by sign.
ToyFixture toy_chain_fixture(int depth, double margin);

// k copies of the scalar averaged by a k-tap pooling window; the averaging
// shrinks injected noise by sqrt(k).
ToyFixture toy_avg_fixture(int taps, double margin);

// Comparator pair for rank-change experiments. "sharp" decides between two
// nearly equal weights (0.9 vs 1.0): cleanly right, but low-precision grids
// collapse the gap and small noise flips it. "blunt" uses a wide gap (0.0 vs
// 1.0) and survives both, while carrying one hopeless sample that caps its
// clean accuracy at 0.5.
ToyFixture rank_sharp_fixture();
ToyFixture rank_blunt_fixture();

// Fixture lookup for the CLI: toy-chain-<D>, toy-avg-<k>, rank-sharp,
// rank-blunt.
ToyFixture fixture_by_name(const std::string& name, double margin);
bool is_fixture_name(const std::string& name);

}  // namespace pimdc
