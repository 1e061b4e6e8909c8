// SPDX-License-Identifier: Apache-2.0
/**
 * @file   checkpoint.hpp
 * @brief  Parameter checkpoints: `<prefix>.manifest` lists `name d0xd1x...`
 *         per line, `<prefix>.bin` holds little-endian float32 tensors in
 *         manifest order.
 */
#pragma once

#include <string>

#include "fastssl/sim/model.hpp"

namespace fastssl::sim {

void save_checkpoint(const std::string &prefix, const ModelParams<float> &params);

/// Rebuilds the spec from the stored shapes. Throws IoError on malformed or
/// truncated files.
ModelParams<float> load_checkpoint(const std::string &prefix);

} // namespace fastssl::sim
