#pragma once

#include <string>

#include "json.hpp"

#include "stim/nn.hpp"

namespace stim {

// Single-file checkpoint: magic, a JSON header (format version, model config,
// parameter table with shapes and byte offsets), then the little-endian
// 64-bit float payload for every parameter in header order.
inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& config);

// Returns the config stored in the header. Every parameter in the store must
// be present with a matching shape.
nlohmann::json load_checkpoint(const std::string& path, ParamStore& params);

// Reads only the header config (used to rebuild the model before loading).
nlohmann::json read_checkpoint_config(const std::string& path);

}  // namespace stim
