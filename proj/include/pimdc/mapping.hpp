#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pimdc/format.hpp"
#include "pimdc/netir.hpp"

namespace pimdc {

// Weight-stationary mapping of a layer's R*S*C x M filter matrix onto a
// rows x cols memory array:
//   - one filter per logical column; activations stream through rows and each
//     column accumulates a dot product (intra-pass reuse across M columns);
//   - matrices exceeding the array tile into T_r x T_c sub-arrays processed
//     sequentially, edge tiles keeping their remainder dimensions;
//   - small matrices may replicate block-diagonally so rho distinct output
//     positions resolve in the same pass.
// One pass = one full array activation = one MAC per occupied cell; pass
// count is the latency proxy. Row tiling splits a filter's accumulation, so
// each extra row tile moves one partial sum per output value off-array.

struct ArraySpec {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
};

struct MappingOptions {
  bool replication = false;
};

struct LayerMapping {
  std::uint64_t row_tiles = 1;
  std::uint64_t col_tiles = 1;
  std::uint64_t replication = 1;  // > 1 only when row_tiles == col_tiles == 1
  // Cells active in a nominal full pass: all copies for a replicated layer,
  // the interior tile for a tiled one.
  std::uint64_t used_cells_per_pass = 0;
};

// Layer must be conv or fc. Throws std::invalid_argument for degenerate
// arrays and SpecError for unweighted layers.
LayerMapping map_layer(const LayerSpec& layer, const LayerShape& shape,
                       ArraySpec array, MappingOptions opts);

struct LayerCost {
  std::string layer_id;
  LayerKind kind = LayerKind::conv;
  bool weighted = false;
  LayerMapping mapping;
  std::uint64_t passes = 0;
  std::uint64_t input_reads = 0;    // activation values streamed into the array
  std::uint64_t output_writes = 0;
  std::uint64_t psum_updates = 0;   // partial sums accumulated off-array
  double utilization = 0.0;         // per-pass cell occupancy, averaged over passes
};

struct MappingReport {
  ArraySpec array;
  MappingOptions options;
  std::vector<LayerCost> layers;  // every layer; unweighted rows are all zero
  std::uint64_t total_passes = 0;
  std::uint64_t total_input_reads = 0;
  std::uint64_t total_output_writes = 0;
  std::uint64_t total_psum_updates = 0;
  double mean_utilization = 0.0;  // pass-weighted over mapped layers
};

MappingReport report(const NetworkSpec& net, const ShapeInfo& shapes,
                     ArraySpec array, MappingOptions opts);

struct SweepTable {
  std::vector<MappingReport> entries;  // one per array size, input order
};

// Evaluates sizes concurrently; result order always matches input order.
SweepTable sweep_arrays(const NetworkSpec& net, const ShapeInfo& shapes,
                        const std::vector<ArraySpec>& sizes, MappingOptions opts);

// CSV with header layer_id,rows,cols,passes,utilization,input_reads,
// output_writes,psum_updates and a TOTAL row per array size. Floats carry
// 6 significant digits; utilization totals are pass-weighted means.
std::string mapping_report_csv(const MappingReport& report);
std::string sweep_table_csv(const SweepTable& table);

}  // namespace pimdc
