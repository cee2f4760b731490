#pragma once

#include <string>

#include "pimdc/robustness.hpp"

namespace pimdc {

// Weights live as a JSON manifest plus a raw blob of little-endian float32
// values. The manifest's "blob" key names the binary file relative to the
// manifest's directory; offsets and lengths count float elements:
//   {"blob": "net.bin",
//    "layers": {"conv1": {"dims": [m, c, r, s], "offset": 0, "length": 72}}}
// Datasets use the same float encoding, sample-major:
//   {"blob": "data.bin", "n_samples": 2, "dims": [h, w, c], "labels": [0, 1]}

WeightSet read_weights(const std::string& manifest_path);
void write_weights(const std::string& manifest_path, const WeightSet& weights);

Dataset read_dataset(const std::string& manifest_path);
void write_dataset(const std::string& manifest_path, const Dataset& data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace pimdc
