// Model checkpoint container. Layout, all little-endian:
//
//   bytes 0..7   magic "STBCKPT\0"
//   u32          format version
//   u64          descriptor length, then that many bytes of JSON
//   u64          weight count, then count * 4 bytes of IEEE float32
//
// The JSON descriptor carries the architecture, the train config, a tensor
// table (name/shape/offset/count per parameter block), the training curve,
// and a free-form provenance object. Weights are stored as float32; training
// happens in double, so loading a checkpoint and resuming is not bit-exact
// with the run that produced it, which is fine for an inference artifact.

#include <bit>
#include <filesystem>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "stabest/error.hpp"
#include "stabest/model.hpp"
#include "stabest/serial.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace stabest {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'B', 'C', 'K', 'P', 'T', '\0'};

void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u32(std::ostream& out, std::uint32_t v) { write_raw(out, &v, sizeof v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_raw(out, &v, sizeof v); }

void read_raw(std::istream& in, void* p, std::size_t n, const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw DataError(path + ": truncated checkpoint");
  }
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  read_raw(in, &v, sizeof v, path);
  return v;
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  read_raw(in, &v, sizeof v, path);
  return v;
}

nlohmann::json descriptor_json(const ModelCheckpoint& ckpt, const ParamTable& table) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const ParamEntry& e : table.entries) {
    tensors.push_back({{"name", e.name},
                       {"shape", e.shape},
                       {"offset", e.offset},
                       {"count", e.count}});
  }
  nlohmann::json curve = nlohmann::json::array();
  for (const TrainCurvePoint& p : ckpt.curve) {
    curve.push_back({{"epoch", p.epoch}, {"train_mse", p.train_mse}, {"val_mse", p.val_mse}});
  }
  nlohmann::json prov;
  try {
    prov = nlohmann::json::parse(ckpt.provenance_json);
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint provenance is not valid JSON");
  }
  return nlohmann::json{{"architecture", ckpt.spec},
                        {"train_config", ckpt.config},
                        {"tensors", tensors},
                        {"curve", curve},
                        {"provenance", prov}};
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& file) {
  const std::string path = file.string();
  ckpt.spec.validate();
  const ParamTable table = param_table(ckpt.spec);
  if (ckpt.params.size() != table.total) {
    throw DataError("checkpoint parameter count does not match its architecture");
  }

  const std::string json = descriptor_json(ckpt, table).dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");

  write_raw(out, kMagic, sizeof kMagic);
  write_u32(out, ModelCheckpoint::kFormatVersion);
  write_u64(out, json.size());
  write_raw(out, json.data(), json.size());

  std::vector<float> blob(ckpt.params.size());
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    blob[i] = static_cast<float>(ckpt.params[i]);
  }
  write_u64(out, blob.size());
  write_raw(out, blob.data(), blob.size() * sizeof(float));

  out.flush();
  if (!out) throw DataError("failed writing " + path);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& file) {
  const std::string path = file.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);

  char magic[8] = {};
  read_raw(in, magic, sizeof magic, path);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError(path + ": not a model checkpoint");
  }
  const std::uint32_t version = read_u32(in, path);
  if (version == 0 || version > ModelCheckpoint::kFormatVersion) {
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  }

  const std::uint64_t json_len = read_u64(in, path);
  if (json_len > (1ull << 30)) throw DataError(path + ": descriptor length implausible");
  std::string json_text(json_len, '\0');
  read_raw(in, json_text.data(), json_len, path);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad descriptor: " + e.what());
  }

  ModelCheckpoint ckpt;
  try {
    ckpt.spec = j.at("architecture").get<ArchitectureSpec>();
    ckpt.config = j.at("train_config").get<TrainConfig>();
    for (const auto& row : j.value("curve", nlohmann::json::array())) {
      ckpt.curve.push_back({row.at("epoch").get<int>(), row.at("train_mse").get<double>(),
                            row.at("val_mse").get<double>()});
    }
    ckpt.provenance_json = j.value("provenance", nlohmann::json::object()).dump();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad descriptor: " + e.what());
  }
  ckpt.spec.validate();

  const ParamTable table = param_table(ckpt.spec);
  const nlohmann::json tensors = j.value("tensors", nlohmann::json::array());
  if (tensors.size() != table.entries.size()) {
    throw DataError(path + ": tensor table does not match the architecture");
  }
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const ParamEntry& e = table.entries[i];
    const auto& row = tensors[i];
    if (row.value("name", "") != e.name ||
        row.value("offset", std::size_t{0}) != e.offset ||
        row.value("count", std::size_t{0}) != e.count ||
        row.value("shape", std::vector<int>{}) != e.shape) {
      throw DataError(path + ": tensor table does not match the architecture");
    }
  }

  const std::uint64_t n_weights = read_u64(in, path);
  if (n_weights != table.total) {
    throw DataError(path + ": weight count does not match the architecture");
  }
  std::vector<float> blob(n_weights);
  read_raw(in, blob.data(), n_weights * sizeof(float), path);

  ckpt.params.resize(n_weights);
  for (std::size_t i = 0; i < n_weights; ++i) {
    ckpt.params[i] = static_cast<double>(blob[i]);
  }
  return ckpt;
}

}  // namespace stabest
