#pragma once

#include <string>

#include "sat/model.hpp"

#include <nlohmann/json_fwd.hpp>

namespace sat {

// Checkpoint file layout, bit-exact on round trip:
//   bytes 0..7   magic "SATCKPT1"
//   bytes 8..15  little-endian u64 header length
//   header       JSON: {"config": {...}, "tensors": [{name, shape, offset}]}
//   data         raw little-endian 64-bit float tensors, manifest order;
//                offsets are relative to the start of the data section.

void save_checkpoint(const std::string& path, const TransformerParams& params);

/// Loads and validates: magic, shapes against the config, finiteness of
/// every tensor (NaN/Inf in the file is a hard error).
TransformerParams load_checkpoint(const std::string& path);

/// Header only (config + manifest), without reading tensor data.
nlohmann::ordered_json checkpoint_manifest(const std::string& path);

}  // namespace sat
