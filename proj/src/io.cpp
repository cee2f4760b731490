#include "pimdc/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pimdc/error.hpp"

namespace pimdc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

static_assert(sizeof(float) == 4, "float must be 32-bit");

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xff000000u) >> 24) | ((v & 0x00ff0000u) >> 8) |
         ((v & 0x0000ff00u) << 8) | ((v & 0x000000ffu) << 24);
}

std::vector<float> read_float_blob(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open blob file: " + path.string());
  in.seekg(0, std::ios::end);
  std::streamoff bytes = in.tellg();
  in.seekg(0, std::ios::beg);
  if (bytes % 4 != 0) {
    throw SpecError("blob size is not a multiple of 4 bytes: " + path.string());
  }
  std::vector<float> values(static_cast<std::size_t>(bytes / 4));
  in.read(reinterpret_cast<char*>(values.data()), bytes);
  if (!in) throw std::runtime_error("failed reading blob file: " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) {
      v = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(v)));
    }
  }
  return values;
}

void write_float_blob(const fs::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create blob file: " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (float v : values) {
      std::uint32_t le = byteswap32(std::bit_cast<std::uint32_t>(v));
      out.write(reinterpret_cast<const char*>(&le), 4);
    }
  } else {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 4));
  }
  if (!out) throw std::runtime_error("failed writing blob file: " + path.string());
}

json parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError("manifest is not valid JSON (" + path + "): " + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw SpecError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

fs::path blob_path_for(const json& manifest, const std::string& manifest_path) {
  if (!manifest.contains("blob") || !manifest["blob"].is_string()) {
    throw SpecError("manifest requires a string 'blob' entry: " + manifest_path);
  }
  return fs::path(manifest_path).parent_path() / manifest["blob"].get<std::string>();
}

void require_finite(const std::vector<float>& values, const std::string& what) {
  for (float v : values) {
    if (!std::isfinite(v)) throw SpecError(what + " contains NaN or Inf values");
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

WeightSet read_weights(const std::string& manifest_path) {
  json manifest = parse_manifest(manifest_path);
  if (!manifest.is_object()) throw SpecError("weights manifest must be a JSON object");
  reject_unknown_keys(manifest, {"blob", "layers"}, "weights manifest");
  if (!manifest.contains("layers") || !manifest["layers"].is_object()) {
    throw SpecError("weights manifest requires a 'layers' object");
  }
  std::vector<float> blob = read_float_blob(blob_path_for(manifest, manifest_path));

  WeightSet weights;
  for (auto it = manifest["layers"].begin(); it != manifest["layers"].end(); ++it) {
    const std::string& id = it.key();
    const json& entry = it.value();
    reject_unknown_keys(entry, {"dims", "offset", "length"}, "weights entry '" + id + "'");
    const auto& dims = entry.at("dims");
    if (!dims.is_array() || dims.size() != 4) {
      throw SpecError("weights entry '" + id + "' needs dims [m, c, r, s]");
    }
    std::int64_t m = dims[0].get<std::int64_t>();
    std::int64_t c = dims[1].get<std::int64_t>();
    std::int64_t r = dims[2].get<std::int64_t>();
    std::int64_t s = dims[3].get<std::int64_t>();
    std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    std::uint64_t length = entry.at("length").get<std::uint64_t>();
    if (m < 1 || c < 1 || r < 1 || s < 1 ||
        length != static_cast<std::uint64_t>(m) * c * r * s) {
      throw SpecError("weights entry '" + id + "' has inconsistent dims/length");
    }
    if (offset + length > blob.size()) {
      throw SpecError("weights entry '" + id + "' points past the end of the blob");
    }
    std::vector<float> values(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                              blob.begin() + static_cast<std::ptrdiff_t>(offset + length));
    require_finite(values, "weights entry '" + id + "'");
    weights.blocks.emplace(id, WeightBlock::make(m, c, r, s, std::move(values)));
  }
  return weights;
}

void write_weights(const std::string& manifest_path, const WeightSet& weights) {
  fs::path blob_file = fs::path(manifest_path).replace_extension(".bin");
  json manifest;
  manifest["blob"] = blob_file.filename().string();
  manifest["layers"] = json::object();

  std::vector<float> blob;
  for (const auto& [id, block] : weights.blocks) {  // map order: sorted by id
    json entry;
    entry["dims"] = {block.m, block.c, block.r, block.s};
    entry["offset"] = blob.size();
    entry["length"] = block.data.size();
    manifest["layers"][id] = std::move(entry);
    blob.insert(blob.end(), block.data.begin(), block.data.end());
  }

  write_float_blob(blob_file, blob);
  write_text_file(manifest_path, manifest.dump(2) + "\n");
}

Dataset read_dataset(const std::string& manifest_path) {
  json manifest = parse_manifest(manifest_path);
  if (!manifest.is_object()) throw SpecError("dataset manifest must be a JSON object");
  reject_unknown_keys(manifest, {"blob", "n_samples", "dims", "labels"}, "dataset manifest");
  std::int64_t n = manifest.at("n_samples").get<std::int64_t>();
  const auto& dims = manifest.at("dims");
  if (!dims.is_array() || dims.size() != 3) {
    throw SpecError("dataset manifest needs dims [h, w, c]");
  }
  std::int64_t h = dims[0].get<std::int64_t>();
  std::int64_t w = dims[1].get<std::int64_t>();
  std::int64_t c = dims[2].get<std::int64_t>();
  if (n < 1 || h < 1 || w < 1 || c < 1) {
    throw SpecError("dataset manifest has non-positive dimensions");
  }
  const auto& labels = manifest.at("labels");
  if (!labels.is_array() || static_cast<std::int64_t>(labels.size()) != n) {
    throw SpecError("dataset manifest needs one label per sample");
  }

  std::vector<float> blob = read_float_blob(blob_path_for(manifest, manifest_path));
  std::size_t volume = static_cast<std::size_t>(h) * w * c;
  if (blob.size() != volume * static_cast<std::size_t>(n)) {
    throw SpecError("dataset blob size does not match n_samples * dims");
  }
  require_finite(blob, "dataset blob");

  Dataset data;
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<float> values(blob.begin() + static_cast<std::ptrdiff_t>(i * volume),
                              blob.begin() + static_cast<std::ptrdiff_t>((i + 1) * volume));
    data.samples.push_back(Tensor::from_data(h, w, c, std::move(values)));
    data.labels.push_back(labels[static_cast<std::size_t>(i)].get<int>());
  }
  return data;
}

void write_dataset(const std::string& manifest_path, const Dataset& data) {
  if (data.samples.empty() || data.samples.size() != data.labels.size()) {
    throw std::invalid_argument("dataset must be non-empty with one label per sample");
  }
  const Tensor& first = data.samples.front();
  std::vector<float> blob;
  for (const auto& sample : data.samples) {
    if (!sample.same_shape(first)) {
      throw std::invalid_argument("all dataset samples must share one shape");
    }
    blob.insert(blob.end(), sample.data().begin(), sample.data().end());
  }

  fs::path blob_file = fs::path(manifest_path).replace_extension(".bin");
  json manifest;
  manifest["blob"] = blob_file.filename().string();
  manifest["n_samples"] = data.samples.size();
  manifest["dims"] = {first.h(), first.w(), first.c()};
  manifest["labels"] = data.labels;

  write_float_blob(blob_file, blob);
  write_text_file(manifest_path, manifest.dump(2) + "\n");
}

}  // namespace pimdc
