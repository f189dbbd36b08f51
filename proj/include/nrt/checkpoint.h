// nrt/checkpoint.h

// Copyright 2026  The noisy-rnnt Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NRT_CHECKPOINT_H_
#define NRT_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrt/params.h"
#include "nrt/pruning.h"
#include "nrt/tensor.h"

namespace nrt {

// Little-endian binary file:
//   "NRTCKPT\0", u32 version, u64 config digest, string config text,
//   u64 record count, then records of
//   string name, u8 dtype (0 = f64, 1 = u8), u32 ndim, u64 dims[ndim], data.
// Record names: "param/<name>", "mask/<name>" (u8 alive flags over the block
// grid), "optim/<key>", and "meta/state" (u8 JSON text).
struct Checkpoint {
  std::uint64_t config_digest = 0;
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> params;
  std::map<std::string, std::vector<std::uint8_t>> masks;
  std::map<std::string, std::vector<double>> optimizer;
  nlohmann::json state = nlohmann::json::object();
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Written to a temporary file and renamed into place.
void WriteCheckpoint(const std::string &path, const Checkpoint &ckpt);
// Missing files, bad magic, unknown versions and truncation are
// CheckpointErrors.
Checkpoint ReadCheckpoint(const std::string &path);

// Copies params (and mask flags) out of / into live objects. Loading checks
// that every name and shape matches; any difference is a CheckpointError.
void StoreParams(const ModelParams &params, Checkpoint &ckpt);
void LoadParams(const Checkpoint &ckpt, ModelParams &params);
void StoreMasks(const MaskSet &masks, Checkpoint &ckpt);
void LoadMasks(const Checkpoint &ckpt, MaskSet &masks);

}  // namespace nrt

#endif  // NRT_CHECKPOINT_H_
