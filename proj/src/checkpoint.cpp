#include "sat/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sat/common.hpp"

namespace sat {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'T', 'C', 'K', 'P', 'T', '1'};

void write_u64_le(std::ostream& os, uint64_t v) {
  uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t read_u64_le(std::istream& is) {
  uint8_t buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  SAT_REQUIRE_DATA(is.good(), "checkpoint: truncated length prefix");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_doubles_le(std::ostream& os, const std::vector<double>& vals) {
  std::vector<uint8_t> buf(vals.size() * 8);
  for (size_t i = 0; i < vals.size(); ++i) {
    const uint64_t bits = std::bit_cast<uint64_t>(vals[i]);
    for (int b = 0; b < 8; ++b) buf[i * 8 + static_cast<size_t>(b)] =
        static_cast<uint8_t>((bits >> (8 * b)) & 0xFF);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_doubles_le(std::istream& is, std::vector<double>& vals) {
  std::vector<uint8_t> buf(vals.size() * 8);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  SAT_REQUIRE_DATA(is.good(), "checkpoint: truncated tensor data");
  for (size_t i = 0; i < vals.size(); ++i) {
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<uint64_t>(buf[i * 8 + static_cast<size_t>(b)]) << (8 * b);
    vals[i] = std::bit_cast<double>(bits);
  }
}

nlohmann::ordered_json config_json(const ModelConfig& cfg) {
  return nlohmann::ordered_json{
      {"d", cfg.d}, {"h", cfg.h}, {"layers", cfg.layers},
      {"vocab", cfg.vocab}, {"max_seq", cfg.max_seq}};
}

ModelConfig config_from_json(const nlohmann::ordered_json& j) {
  ModelConfig cfg;
  cfg.d = j.at("d").get<int64_t>();
  cfg.h = j.at("h").get<int64_t>();
  cfg.layers = j.at("layers").get<int64_t>();
  cfg.vocab = j.at("vocab").get<int64_t>();
  cfg.max_seq = j.at("max_seq").get<int64_t>();
  return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, const TransformerParams& params) {
  nlohmann::ordered_json header;
  header["config"] = config_json(params.cfg);
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  uint64_t offset = 0;
  const auto refs = params.tensor_refs();
  for (const TensorRef& ref : refs) {
    manifest.push_back({{"name", ref.name},
                        {"shape", {ref.tensor->rows, ref.tensor->cols}},
                        {"offset", offset}});
    offset += static_cast<uint64_t>(ref.tensor->size()) * 8;
  }
  header["tensors"] = std::move(manifest);
  const std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  SAT_REQUIRE_DATA(os.is_open(), "cannot write checkpoint: " + path);
  os.write(kMagic, 8);
  write_u64_le(os, header_str.size());
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const TensorRef& ref : refs) write_doubles_le(os, ref.tensor->data);
  os.flush();
  SAT_REQUIRE_DATA(os.good(), "checkpoint write failed: " + path);
}

namespace {

nlohmann::ordered_json read_header(std::istream& is, const std::string& path) {
  char magic[8];
  is.read(magic, 8);
  SAT_REQUIRE_DATA(is.good() && std::memcmp(magic, kMagic, 8) == 0,
               "not a checkpoint file (bad magic): " + path);
  const uint64_t len = read_u64_le(is);
  SAT_REQUIRE_DATA(len > 0 && len < (uint64_t{1} << 31), "checkpoint: implausible header length");
  std::string header_str(len, '\0');
  is.read(header_str.data(), static_cast<std::streamsize>(len));
  SAT_REQUIRE_DATA(is.good(), "checkpoint: truncated header");
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(header_str, nullptr, false);
  SAT_REQUIRE_DATA(!j.is_discarded(), "checkpoint: header is not valid JSON");
  return j;
}

}  // namespace

TransformerParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  SAT_REQUIRE_DATA(is.is_open(), "cannot open checkpoint: " + path);
  const nlohmann::ordered_json header = read_header(is, path);
  const ModelConfig cfg = config_from_json(header.at("config"));
  cfg.validate();
  TransformerParams params = TransformerParams::zeros(cfg);
  auto refs = params.tensor_refs();
  const auto& manifest = header.at("tensors");
  SAT_REQUIRE_DATA(manifest.size() == refs.size(),
               "checkpoint: manifest lists " + std::to_string(manifest.size()) +
                   " tensors, expected " + std::to_string(refs.size()));
  for (size_t i = 0; i < refs.size(); ++i) {
    const auto& entry = manifest[i];
    SAT_REQUIRE_DATA(entry.at("name").get<std::string>() == refs[i].name,
                 "checkpoint: tensor order mismatch at '" + refs[i].name + "'");
    const auto shape = entry.at("shape");
    SAT_REQUIRE_DATA(shape.size() == 2 && shape[0].get<int64_t>() == refs[i].tensor->rows &&
                     shape[1].get<int64_t>() == refs[i].tensor->cols,
                 "checkpoint: shape mismatch for '" + refs[i].name + "'");
    read_doubles_le(is, refs[i].tensor->data);
    refs[i].tensor->require_finite(refs[i].name);
  }
  return params;
}

nlohmann::ordered_json checkpoint_manifest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  SAT_REQUIRE_DATA(is.is_open(), "cannot open checkpoint: " + path);
  return read_header(is, path);
}

}  // namespace sat
