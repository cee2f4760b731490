#include "pimdc/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pimdc/error.hpp"
#include "pimdc/format.hpp"
#include "pimdc/parallel.hpp"

namespace pimdc {

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "axis_value,accuracy_mean,accuracy_std,trials,master_seed\n";
  char line[192];
  for (const auto& p : report.points) {
    std::snprintf(line, sizeof line, "%s,%s,%s,%lld,%llu\n",
                  format_g6(p.axis_value).c_str(), format_g6(p.accuracy_mean).c_str(),
                  format_g6(p.accuracy_std).c_str(), (long long)p.trials,
                  (unsigned long long)p.master_seed);
    out += line;
  }
  return out;
}

Tensor inject_noise(const Tensor& activations, const NoiseSpec& spec,
                    double layer_max, GaussianStream& rng) {
  if (spec.mode == NoiseMode::rescaled &&
      (!std::isfinite(layer_max) || layer_max < 0.0)) {
    throw std::invalid_argument("rescaled noise requires a defined layer max");
  }
  double stddev = spec.stddev(layer_max);
  Tensor out = activations;
  if (stddev == 0.0) return out;
  for (float& v : out.data()) {
    v = static_cast<float>(v + stddev * rng.next());
  }
  return out;
}

std::vector<std::size_t> noise_injection_sites(const NetworkSpec& net, NoisePoint point) {
  std::vector<std::size_t> sites;
  if (point == NoisePoint::pre_activation) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      if (net.layers[i].weighted()) sites.push_back(i);
    }
    return sites;
  }

  // Count consumers so a weighted layer feeding exactly one relu defers its
  // injection to that relu's output.
  std::vector<std::vector<std::size_t>> consumers(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    for (const auto& ref : net.layers[i].inputs) {
      if (auto idx = net.index_of(ref)) consumers[*idx].push_back(i);
    }
  }
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].weighted()) continue;
    if (consumers[i].size() == 1 &&
        net.layers[consumers[i][0]].kind == LayerKind::relu) {
      sites.push_back(consumers[i][0]);
    } else {
      sites.push_back(i);
    }
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

namespace {

double tensor_abs_max(const Tensor& t) {
  double best = 0.0;
  for (float v : t.data()) best = std::max(best, std::abs(static_cast<double>(v)));
  return best;
}

// Max |activation| at each injection site from a clean pass of x.
std::vector<double> clean_layer_maxima(const NetworkSpec& net, const ShapeInfo& shapes,
                                       const WeightSet& weights, const Tensor& x,
                                       const std::vector<std::size_t>& sites) {
  std::vector<double> maxima(net.layers.size(), 0.0);
  std::vector<bool> is_site(net.layers.size(), false);
  for (auto i : sites) is_site[i] = true;
  network_forward(net, shapes, weights, x, [&](std::size_t i, Tensor& out) {
    if (is_site[i]) maxima[i] = tensor_abs_max(out);
  });
  return maxima;
}

}  // namespace

Tensor noisy_forward(const NetworkSpec& net, const ShapeInfo& shapes,
                     const WeightSet& weights, const Tensor& x, const NoiseSpec& spec,
                     const NoiseStreamFactory& streams,
                     const std::vector<double>* layer_max) {
  auto sites = noise_injection_sites(net, spec.point);
  std::vector<bool> is_site(net.layers.size(), false);
  for (auto i : sites) is_site[i] = true;

  std::vector<double> maxima;
  if (spec.mode == NoiseMode::rescaled) {
    if (layer_max) {
      maxima = *layer_max;
      if (maxima.size() != net.layers.size()) {
        throw std::invalid_argument("layer_max size must match the layer count");
      }
    } else {
      maxima = clean_layer_maxima(net, shapes, weights, x, sites);
    }
  }

  return network_forward(net, shapes, weights, x, [&](std::size_t i, Tensor& out) {
    if (!is_site[i]) return;
    double m = spec.mode == NoiseMode::rescaled ? maxima[i] : 0.0;
    double stddev = spec.stddev(m);
    if (stddev == 0.0) return;
    GaussianStream rng = streams(i);
    for (float& v : out.data()) {
      v = static_cast<float>(v + stddev * rng.next());
    }
  });
}

WeightBlock quantize_block(const WeightBlock& block, QuantSpec spec) {
  if (spec.bits < 2 || spec.bits > 16) {
    throw std::invalid_argument("weight bit width must be in [2, 16]");
  }
  float amax = 0.0f;
  for (float v : block.data) amax = std::max(amax, std::abs(v));
  if (amax == 0.0f) return block;

  // Scale kept in double so requantizing a quantized tensor reproduces the
  // same grid bit-for-bit (the extreme level casts back to amax exactly).
  double qmax = static_cast<double>((1 << (spec.bits - 1)) - 1);
  double scale = static_cast<double>(amax) / qmax;
  WeightBlock out = block;
  for (float& v : out.data) {
    double level = std::round(static_cast<double>(v) / scale);  // half away from zero
    level = std::clamp(level, -qmax, qmax);
    v = static_cast<float>(level * scale);
  }
  return out;
}

WeightSet quantize_weights(const WeightSet& weights, QuantSpec spec) {
  WeightSet out;
  for (const auto& [id, block] : weights.blocks) {
    out.blocks.emplace(id, quantize_block(block, spec));
  }
  return out;
}

double evaluate_clean(const NetworkSpec& net, const ShapeInfo& shapes,
                      const WeightSet& weights, const Dataset& data) {
  if (data.samples.empty() || data.samples.size() != data.labels.size()) {
    throw std::invalid_argument("dataset must be non-empty with one label per sample");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    Tensor logits = network_forward(net, shapes, weights, data.samples[i]);
    if (classify(logits) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.samples.size());
}

EvalReport sweep_noise(const NetworkSpec& net, const ShapeInfo& shapes,
                       const WeightSet& weights, const Dataset& data,
                       const NoiseSpec& spec, const std::vector<double>& axis,
                       const EvalConfig& cfg) {
  if (data.samples.empty() || data.samples.size() != data.labels.size()) {
    throw std::invalid_argument("dataset must be non-empty with one label per sample");
  }
  if (axis.empty()) throw std::invalid_argument("sweep axis must be non-empty");
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw std::invalid_argument("sweep axis must be strictly increasing");
    }
  }
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  check_weights(net, shapes, weights);

  // Rescaled maxima do not depend on the sweep point or trial, so compute
  // them once per sample (or once for the dataset) up front.
  auto sites = noise_injection_sites(net, spec.point);
  std::vector<std::vector<double>> maxima_per_sample;
  std::vector<double> maxima_dataset(net.layers.size(), 0.0);
  if (spec.mode == NoiseMode::rescaled) {
    maxima_per_sample.resize(data.samples.size());
    for (std::size_t si = 0; si < data.samples.size(); ++si) {
      maxima_per_sample[si] =
          clean_layer_maxima(net, shapes, weights, data.samples[si], sites);
      for (std::size_t li = 0; li < maxima_dataset.size(); ++li) {
        maxima_dataset[li] = std::max(maxima_dataset[li], maxima_per_sample[si][li]);
      }
    }
  }

  EvalReport report;
  for (std::size_t ai = 0; ai < axis.size(); ++ai) {
    NoiseSpec point_spec = spec.with_level(axis[ai]);
    std::vector<double> trial_accuracy(static_cast<std::size_t>(cfg.trials), 0.0);

    parallel_for(trial_accuracy.size(), [&](std::size_t t) {
      std::size_t correct = 0;
      for (std::size_t si = 0; si < data.samples.size(); ++si) {
        NoiseStreamFactory streams = [&](std::size_t li) {
          return GaussianStream::from_tuple(
              {cfg.master_seed, ai, t, si, li});
        };
        const std::vector<double>* maxima = nullptr;
        if (spec.mode == NoiseMode::rescaled) {
          maxima = spec.calibration == MaxCalibration::per_dataset
                       ? &maxima_dataset
                       : &maxima_per_sample[si];
        }
        Tensor logits =
            noisy_forward(net, shapes, weights, data.samples[si], point_spec, streams, maxima);
        if (classify(logits) == data.labels[si]) ++correct;
      }
      trial_accuracy[t] = static_cast<double>(correct) /
                          static_cast<double>(data.samples.size());
    });

    double mean = 0.0;
    for (double a : trial_accuracy) mean += a;
    mean /= static_cast<double>(trial_accuracy.size());
    double var = 0.0;
    for (double a : trial_accuracy) var += (a - mean) * (a - mean);
    var /= static_cast<double>(trial_accuracy.size());

    report.points.push_back(
        {axis[ai], mean, std::sqrt(var), cfg.trials, cfg.master_seed});
  }
  return report;
}

EvalReport sweep_quant(const NetworkSpec& net, const ShapeInfo& shapes,
                       const WeightSet& weights, const Dataset& data,
                       const std::vector<int>& bits_axis, std::uint64_t master_seed) {
  if (bits_axis.empty()) throw std::invalid_argument("sweep axis must be non-empty");
  for (std::size_t i = 1; i < bits_axis.size(); ++i) {
    if (!(bits_axis[i] > bits_axis[i - 1])) {
      throw std::invalid_argument("sweep axis must be strictly increasing");
    }
  }
  check_weights(net, shapes, weights);

  EvalReport report;
  for (int bits : bits_axis) {
    WeightSet quantized = quantize_weights(weights, QuantSpec{bits});
    double accuracy = evaluate_clean(net, shapes, quantized, data);
    report.points.push_back({static_cast<double>(bits), accuracy, 0.0, 1, master_seed});
  }
  return report;
}

}  // namespace pimdc
