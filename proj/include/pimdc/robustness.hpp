#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pimdc/infer.hpp"
#include "pimdc/rng.hpp"

namespace pimdc {

enum class NoiseMode {
  fixed,     // std independent of activation magnitude
  rescaled,  // std proportional to the layer's max |activation|
};

// Where noise enters: post_activation injects into the relu output when a
// weighted layer feeds one directly (those are the values that move
// off-array); pre_activation injects into the conv/fc output itself.
enum class NoisePoint { post_activation, pre_activation };

// Reference for the rescaled mode's per-layer maximum: the clean forward
// pass of the sample under evaluation, or a one-time pass over the dataset.
enum class MaxCalibration { per_sample, per_dataset };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::fixed;
  double sigma = 0.0;  // fixed mode
  double ratio = 0.0;  // rescaled mode, std per unit of layer max
  NoisePoint point = NoisePoint::post_activation;
  MaxCalibration calibration = MaxCalibration::per_sample;

  double stddev(double layer_max) const {
    return mode == NoiseMode::fixed ? sigma : ratio * layer_max;
  }
  NoiseSpec with_level(double level) const {
    NoiseSpec out = *this;
    (out.mode == NoiseMode::fixed ? out.sigma : out.ratio) = level;
    return out;
  }
};

// Symmetric uniform per-tensor weight quantizer. The level grid excludes
// -2^(bits-1) so zero is exactly representable.
struct QuantSpec {
  int bits = 8;  // 2..16
};

struct EvalConfig {
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
};

struct EvalPoint {
  double axis_value = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // population std across trials
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
};

struct EvalReport {
  std::vector<EvalPoint> points;
};

std::string eval_report_csv(const EvalReport& report);

struct Dataset {
  std::vector<Tensor> samples;
  std::vector<int> labels;
};

// Adds i.i.d. zero-mean Gaussian noise; the input tensor is left untouched.
// A zero stddev returns a bit-identical copy. Rescaled mode requires a
// finite, non-negative layer_max.
Tensor inject_noise(const Tensor& activations, const NoiseSpec& spec,
                    double layer_max, GaussianStream& rng);

// Layer indices that receive noise under the given injection point:
// weighted layers, deferred to a directly following relu in post mode.
std::vector<std::size_t> noise_injection_sites(const NetworkSpec& net, NoisePoint point);

using NoiseStreamFactory = std::function<GaussianStream(std::size_t layer_index)>;

// Forward pass with noise injected at each site. In rescaled mode the
// per-layer maxima come from `layer_max` when provided (dataset
// calibration), otherwise from a clean pass of the same input.
Tensor noisy_forward(const NetworkSpec& net, const ShapeInfo& shapes,
                     const WeightSet& weights, const Tensor& x, const NoiseSpec& spec,
                     const NoiseStreamFactory& streams,
                     const std::vector<double>* layer_max = nullptr);

WeightBlock quantize_block(const WeightBlock& block, QuantSpec spec);
WeightSet quantize_weights(const WeightSet& weights, QuantSpec spec);

double evaluate_clean(const NetworkSpec& net, const ShapeInfo& shapes,
                      const WeightSet& weights, const Dataset& data);

// Monte Carlo accuracy over the noise axis. Every (point, trial, sample,
// layer) cell owns an RNG stream derived from the master seed, so results
// are independent of execution order and thread count.
EvalReport sweep_noise(const NetworkSpec& net, const ShapeInfo& shapes,
                       const WeightSet& weights, const Dataset& data,
                       const NoiseSpec& spec, const std::vector<double>& axis,
                       const EvalConfig& cfg);

// Deterministic: one clean evaluation per bit width.
EvalReport sweep_quant(const NetworkSpec& net, const ShapeInfo& shapes,
                       const WeightSet& weights, const Dataset& data,
                       const std::vector<int>& bits_axis, std::uint64_t master_seed = 0);

}  // namespace pimdc
