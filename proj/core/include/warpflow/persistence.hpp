#pragma once

#include <string>

#include "warpflow/flow.hpp"

namespace warpflow {

inline constexpr int kCheckpointVersion = 1;

// JSON checkpoint: spec plus one state, doubles written round-trip exact.
void save_checkpoint(const std::string& path, const WarpedProductSpec& spec, const FlowState& s);
void load_checkpoint(const std::string& path, WarpedProductSpec& spec, FlowState& s);

// Binary trajectory, magic "WFTRJ001", little-endian doubles.
void save_trajectory(const std::string& path, const Trajectory& tr);
Trajectory load_trajectory(const std::string& path);

}  // namespace warpflow
