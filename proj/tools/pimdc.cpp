#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pimdc/error.hpp"
#include "pimdc/io.hpp"
#include "pimdc/mapping.hpp"
#include "pimdc/netir.hpp"
#include "pimdc/robustness.hpp"
#include "pimdc/svg.hpp"
#include "pimdc/zoo.hpp"

namespace fs = std::filesystem;
using namespace pimdc;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream stream(text);
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& token : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw SpecError(std::string("invalid ") + what + " value '" + token + "'");
    }
  }
  if (out.empty()) throw SpecError(std::string(what) + " list is empty");
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_doubles(text, what)) {
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw SpecError(std::string(what) + " values must be integers");
    }
    out.push_back(i);
  }
  return out;
}

// Size tokens: "512" (square) or "1024x256".
std::vector<ArraySpec> parse_sizes(const std::string& text) {
  std::vector<ArraySpec> sizes;
  for (const auto& token : split_list(text)) {
    ArraySpec spec;
    auto x = token.find('x');
    try {
      if (x == std::string::npos) {
        spec.rows = spec.cols = std::stoll(token);
      } else {
        spec.rows = std::stoll(token.substr(0, x));
        spec.cols = std::stoll(token.substr(x + 1));
      }
    } catch (const std::exception&) {
      throw SpecError("invalid array size '" + token + "' (use N or RxC)");
    }
    if (spec.rows < 1 || spec.cols < 1) {
      throw SpecError("array sizes must be >= 1: '" + token + "'");
    }
    sizes.push_back(spec);
  }
  if (sizes.empty()) throw SpecError("size list is empty");
  return sizes;
}

struct NetSource {
  std::string net_path;  // file path or "-" for stdin
  std::string zoo_name;

  void add_options(CLI::App* cmd) {
    auto* net = cmd->add_option("--net", net_path, "network spec JSON file ('-' for stdin)");
    auto* zoo = cmd->add_option("--zoo", zoo_name, "zoo entry name");
    net->excludes(zoo);
    zoo->excludes(net);
  }

  NetworkSpec load() const {
    if (!zoo_name.empty()) return zoo_network(zoo_name);
    if (net_path.empty()) throw SpecError("one of --net or --zoo is required");
    std::string text;
    if (net_path == "-") {
      std::ostringstream buffer;
      buffer << std::cin.rdbuf();
      text = buffer.str();
    } else {
      text = read_text_file(net_path);
    }
    return parse_network_json(text);
  }
};

NetworkSpec load_valid(const NetSource& source) {
  NetworkSpec net = source.load();
  auto violations = validate(net);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "network '" << net.name << "' is invalid:";
    for (const auto& v : violations) {
      msg << "\n  [" << (v.layer_id.empty() ? "net" : v.layer_id) << "] " << v.message;
    }
    throw SpecError(msg.str());
  }
  return net;
}

void emit_csv(const std::string& csv, const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) {
    std::cout << csv;
    return;
  }
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / name).string(), csv);
}

void write_chart(const std::string& path, const LineChart& chart) {
  write_text_file(path, chart.render());
}

LineChart eval_chart(const EvalReport& report, const std::string& title,
                     const std::string& x_label) {
  LineChart chart;
  chart.title = title;
  chart.x_label = x_label;
  chart.y_label = "accuracy";
  ChartSeries series;
  for (const auto& p : report.points) series.points.push_back({p.axis_value, p.accuracy_mean});
  chart.series.push_back(std::move(series));
  return chart;
}

int run(int argc, char** argv) {
  CLI::App app{"PIM mapping and robustness exploration toolkit"};
  app.require_subcommand(1);
  std::string out_dir;
  app.add_option("--out", out_dir, "write CSV outputs into this directory instead of stdout");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "weight/MAC/activation counts per layer");
  NetSource analyze_src;
  analyze_src.add_options(analyze);

  // map
  auto* map_cmd = app.add_subcommand("map", "map a network onto one array size");
  NetSource map_src;
  map_src.add_options(map_cmd);
  std::int64_t rows = 0, cols = 0;
  bool map_replication = false;
  map_cmd->add_option("--rows", rows, "array rows")->required();
  map_cmd->add_option("--cols", cols, "array cols")->required();
  map_cmd->add_flag("--replication", map_replication, "replicate small layers block-diagonally");

  // sweep-array
  auto* sweep_array = app.add_subcommand("sweep-array", "mapping metrics across array sizes");
  NetSource sweep_array_src;
  sweep_array_src.add_options(sweep_array);
  std::string sizes_text;
  bool sweep_replication = false;
  std::string array_svg;
  sweep_array->add_option("--sizes", sizes_text, "comma list of sizes (N or RxC)")->required();
  sweep_array->add_flag("--replication", sweep_replication, "replicate small layers block-diagonally");
  sweep_array->add_option("--svg", array_svg,
                          "chart path prefix (writes <prefix>-passes/-utilization/-reads.svg)");

  // sweep-noise
  auto* sweep_noise_cmd = app.add_subcommand("sweep-noise", "Monte Carlo accuracy under noise");
  NetSource noise_src;
  noise_src.add_options(sweep_noise_cmd);
  std::string noise_mode = "fixed", points_text, weights_path, data_path;
  std::string noise_point = "post", calibration = "per-sample", noise_svg;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  sweep_noise_cmd->add_option("--mode", noise_mode, "fixed | rescaled")
      ->check(CLI::IsMember({"fixed", "rescaled"}));
  sweep_noise_cmd->add_option("--points", points_text, "comma list of noise levels")->required();
  sweep_noise_cmd->add_option("--trials", trials, "Monte Carlo repetitions")->required();
  sweep_noise_cmd->add_option("--seed", seed, "master seed");
  sweep_noise_cmd->add_option("--weights", weights_path, "weights manifest")->required();
  sweep_noise_cmd->add_option("--data", data_path, "dataset manifest")->required();
  sweep_noise_cmd->add_option("--point", noise_point, "injection point: post | pre")
      ->check(CLI::IsMember({"post", "pre"}));
  sweep_noise_cmd->add_option("--calibration", calibration,
                              "rescaled-mode layer max: per-sample | per-dataset")
      ->check(CLI::IsMember({"per-sample", "per-dataset"}));
  sweep_noise_cmd->add_option("--svg", noise_svg, "accuracy chart path");

  // sweep-quant
  auto* sweep_quant_cmd = app.add_subcommand("sweep-quant", "accuracy across weight bit widths");
  NetSource quant_src;
  quant_src.add_options(sweep_quant_cmd);
  std::string bits_text, quant_weights, quant_data, quant_svg;
  std::uint64_t quant_seed = 0;
  sweep_quant_cmd->add_option("--bits", bits_text, "comma list of bit widths")->required();
  sweep_quant_cmd->add_option("--weights", quant_weights, "weights manifest")->required();
  sweep_quant_cmd->add_option("--data", quant_data, "dataset manifest")->required();
  sweep_quant_cmd->add_option("--seed", quant_seed, "seed to echo into the CSV");
  sweep_quant_cmd->add_option("--svg", quant_svg, "accuracy chart path");

  // zoo
  auto* zoo_cmd = app.add_subcommand("zoo", "list or emit built-in architectures");
  auto* zoo_list_cmd = zoo_cmd->add_subcommand("list", "list entries");
  auto* zoo_emit = zoo_cmd->add_subcommand("emit", "print a zoo entry as spec JSON");
  std::string emit_name;
  zoo_emit->add_option("name", emit_name, "zoo entry name")->required();
  auto* zoo_fixture = zoo_cmd->add_subcommand(
      "fixture", "write a toy scenario (net, weights, dataset) to files");
  std::string fixture_name, fixture_dir = ".";
  double fixture_margin = 1.0;
  zoo_fixture->add_option("name", fixture_name,
                          "toy-chain-<D> | toy-avg-<k> | rank-sharp | rank-blunt")
      ->required();
  zoo_fixture->add_option("--margin", fixture_margin, "decision margin of the scenario");
  zoo_fixture->add_option("--dir", fixture_dir, "output directory");
  zoo_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  if (*analyze) {
    NetworkSpec net = load_valid(analyze_src);
    ShapeInfo shapes = infer_shapes(net);
    emit_csv(count_report_csv(count(net, shapes)), out_dir, "analyze.csv");
  } else if (*map_cmd) {
    NetworkSpec net = load_valid(map_src);
    ShapeInfo shapes = infer_shapes(net);
    MappingReport rep = report(net, shapes, {rows, cols}, {map_replication});
    emit_csv(mapping_report_csv(rep), out_dir, "map.csv");
  } else if (*sweep_array) {
    NetworkSpec net = load_valid(sweep_array_src);
    ShapeInfo shapes = infer_shapes(net);
    SweepTable table = sweep_arrays(net, shapes, parse_sizes(sizes_text), {sweep_replication});
    emit_csv(sweep_table_csv(table), out_dir, "sweep-array.csv");
    if (!array_svg.empty()) {
      ChartSeries passes{net.name, {}}, util{net.name, {}}, reads{net.name, {}};
      for (const auto& entry : table.entries) {
        double x = static_cast<double>(entry.array.rows);
        passes.points.push_back({x, static_cast<double>(entry.total_passes)});
        util.points.push_back({x, entry.mean_utilization});
        reads.points.push_back({x, static_cast<double>(entry.total_input_reads)});
      }
      LineChart chart;
      chart.x_label = "array rows";
      chart.log_x = true;
      chart.title = "estimated latency (passes)";
      chart.y_label = "passes";
      chart.series = {passes};
      write_chart(array_svg + "-passes.svg", chart);
      chart.title = "mean array utilization";
      chart.y_label = "utilization";
      chart.series = {util};
      write_chart(array_svg + "-utilization.svg", chart);
      chart.title = "input activation reads";
      chart.y_label = "reads";
      chart.series = {reads};
      write_chart(array_svg + "-reads.svg", chart);
    }
  } else if (*sweep_noise_cmd) {
    NetworkSpec net = load_valid(noise_src);
    ShapeInfo shapes = infer_shapes(net);
    WeightSet weights = read_weights(weights_path);
    Dataset data = read_dataset(data_path);
    NoiseSpec spec;
    spec.mode = noise_mode == "fixed" ? NoiseMode::fixed : NoiseMode::rescaled;
    spec.point = noise_point == "post" ? NoisePoint::post_activation : NoisePoint::pre_activation;
    spec.calibration = calibration == "per-sample" ? MaxCalibration::per_sample
                                                   : MaxCalibration::per_dataset;
    EvalReport rep = sweep_noise(net, shapes, weights, data, spec,
                                 parse_doubles(points_text, "noise point"), {trials, seed});
    emit_csv(eval_report_csv(rep), out_dir, "sweep-noise.csv");
    if (!noise_svg.empty()) {
      write_chart(noise_svg, eval_chart(rep, "accuracy under " + noise_mode + " noise",
                                        noise_mode == "fixed" ? "noise std" : "noise ratio"));
    }
  } else if (*sweep_quant_cmd) {
    NetworkSpec net = load_valid(quant_src);
    ShapeInfo shapes = infer_shapes(net);
    WeightSet weights = read_weights(quant_weights);
    Dataset data = read_dataset(quant_data);
    EvalReport rep = sweep_quant(net, shapes, weights, data,
                                 parse_ints(bits_text, "bit width"), quant_seed);
    emit_csv(eval_report_csv(rep), out_dir, "sweep-quant.csv");
    if (!quant_svg.empty()) {
      write_chart(quant_svg, eval_chart(rep, "accuracy vs weight bit width", "bits"));
    }
  } else if (*zoo_cmd) {
    if (*zoo_list_cmd) {
      for (const auto& entry : zoo_list()) {
        std::cout << entry.name << "\t" << entry.summary << "\n";
      }
    } else if (*zoo_emit) {
      std::cout << network_to_json(zoo_network(emit_name));
    } else if (*zoo_fixture) {
      ToyFixture fx = fixture_by_name(fixture_name, fixture_margin);
      fs::create_directories(fixture_dir);
      fs::path base = fs::path(fixture_dir) / fixture_name;
      write_text_file(base.string() + "-net.json", network_to_json(fx.net));
      write_weights(base.string() + "-weights.json", fx.weights);
      write_dataset(base.string() + "-data.json", fx.data);
      std::cerr << "wrote " << base.string() << "-{net,weights,data}.json\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
