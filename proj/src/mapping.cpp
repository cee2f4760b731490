#include "pimdc/mapping.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "pimdc/checked.hpp"
#include "pimdc/error.hpp"
#include "pimdc/parallel.hpp"

namespace pimdc {

namespace {

std::uint64_t filter_rows(const LayerSpec& layer, const LayerShape& shape) {
  std::uint64_t k = checked_mul(static_cast<std::uint64_t>(*layer.r),
                                static_cast<std::uint64_t>(*layer.s), layer.id.c_str());
  return checked_mul(k, static_cast<std::uint64_t>(shape.in_c), layer.id.c_str());
}

}  // namespace

LayerMapping map_layer(const LayerSpec& layer, const LayerShape& shape,
                       ArraySpec array, MappingOptions opts) {
  if (array.rows < 1 || array.cols < 1) {
    throw std::invalid_argument("array rows and cols must be >= 1");
  }
  if (!layer.weighted()) {
    throw SpecError("layer '" + layer.id + "' holds no weights and cannot be mapped");
  }

  std::uint64_t k = filter_rows(layer, shape);
  std::uint64_t m = static_cast<std::uint64_t>(*layer.m);
  std::uint64_t rows = static_cast<std::uint64_t>(array.rows);
  std::uint64_t cols = static_cast<std::uint64_t>(array.cols);

  LayerMapping mapping;
  mapping.row_tiles = ceil_div(k, rows);
  mapping.col_tiles = ceil_div(m, cols);
  mapping.replication = 1;
  if (opts.replication && mapping.row_tiles == 1 && mapping.col_tiles == 1) {
    mapping.replication = std::max<std::uint64_t>(1, std::min(rows / k, cols / m));
  }

  if (mapping.row_tiles == 1 && mapping.col_tiles == 1) {
    mapping.used_cells_per_pass =
        checked_mul(mapping.replication, checked_mul(k, m, layer.id.c_str()), layer.id.c_str());
  } else {
    mapping.used_cells_per_pass = std::min(k, rows) * std::min(m, cols);
  }
  return mapping;
}

MappingReport report(const NetworkSpec& net, const ShapeInfo& shapes,
                     ArraySpec array, MappingOptions opts) {
  MappingReport out;
  out.array = array;
  out.options = opts;

  std::uint64_t total_macs = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    const auto& shape = shapes.at(i);
    LayerCost cost;
    cost.layer_id = layer.id;
    cost.kind = layer.kind;
    cost.weighted = layer.weighted();

    if (cost.weighted) {
      cost.mapping = map_layer(layer, shape, array, opts);
      const char* id = layer.id.c_str();
      std::uint64_t k = filter_rows(layer, shape);
      std::uint64_t m = static_cast<std::uint64_t>(*layer.m);
      std::uint64_t ef = checked_mul(static_cast<std::uint64_t>(shape.out_h),
                                     static_cast<std::uint64_t>(shape.out_w), id);
      std::uint64_t tiles = checked_mul(cost.mapping.row_tiles, cost.mapping.col_tiles, id);
      cost.passes = checked_mul(ceil_div(ef, cost.mapping.replication), tiles, id);
      cost.input_reads = checked_mul(checked_mul(ef, cost.mapping.col_tiles, id), k, id);
      cost.output_writes = checked_mul(ef, m, id);
      cost.psum_updates = checked_mul(cost.output_writes, cost.mapping.row_tiles, id);

      // Every output position's MACs run on occupied cells exactly once, so
      // summed occupancy over passes equals the layer's MAC count (a final
      // replication pass simply carries fewer active copies).
      std::uint64_t macs = checked_mul(checked_mul(k, m, id), ef, id);
      double cells = static_cast<double>(array.rows) * static_cast<double>(array.cols);
      cost.utilization = static_cast<double>(macs) / (static_cast<double>(cost.passes) * cells);

      out.total_passes = checked_add(out.total_passes, cost.passes, id);
      out.total_input_reads = checked_add(out.total_input_reads, cost.input_reads, id);
      out.total_output_writes = checked_add(out.total_output_writes, cost.output_writes, id);
      out.total_psum_updates = checked_add(out.total_psum_updates, cost.psum_updates, id);
      total_macs = checked_add(total_macs, macs, id);
    }
    out.layers.push_back(std::move(cost));
  }

  if (out.total_passes > 0) {
    double cells = static_cast<double>(array.rows) * static_cast<double>(array.cols);
    out.mean_utilization =
        static_cast<double>(total_macs) / (static_cast<double>(out.total_passes) * cells);
  }
  return out;
}

SweepTable sweep_arrays(const NetworkSpec& net, const ShapeInfo& shapes,
                        const std::vector<ArraySpec>& sizes, MappingOptions opts) {
  if (sizes.empty()) throw std::invalid_argument("array sweep needs at least one size");
  SweepTable table;
  table.entries.resize(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t i) {
    table.entries[i] = report(net, shapes, sizes[i], opts);
  });
  return table;
}

namespace {

constexpr const char* kMappingHeader =
    "layer_id,rows,cols,passes,utilization,input_reads,output_writes,psum_updates\n";

void append_rows(std::string& out, const MappingReport& report) {
  char line[320];
  for (const auto& l : report.layers) {
    std::snprintf(line, sizeof line, "%s,%lld,%lld,%llu,%s,%llu,%llu,%llu\n",
                  l.layer_id.c_str(), (long long)report.array.rows, (long long)report.array.cols,
                  (unsigned long long)l.passes, format_g6(l.utilization).c_str(),
                  (unsigned long long)l.input_reads, (unsigned long long)l.output_writes,
                  (unsigned long long)l.psum_updates);
    out += line;
  }
  std::snprintf(line, sizeof line, "TOTAL,%lld,%lld,%llu,%s,%llu,%llu,%llu\n",
                (long long)report.array.rows, (long long)report.array.cols,
                (unsigned long long)report.total_passes,
                format_g6(report.mean_utilization).c_str(),
                (unsigned long long)report.total_input_reads,
                (unsigned long long)report.total_output_writes,
                (unsigned long long)report.total_psum_updates);
  out += line;
}

}  // namespace

std::string mapping_report_csv(const MappingReport& report) {
  std::string out = kMappingHeader;
  append_rows(out, report);
  return out;
}

std::string sweep_table_csv(const SweepTable& table) {
  std::string out = kMappingHeader;
  for (const auto& entry : table.entries) append_rows(out, entry);
  return out;
}

}  // namespace pimdc
