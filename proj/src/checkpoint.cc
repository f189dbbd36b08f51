// nrt/src/checkpoint.cc

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

#include "nrt/checkpoint.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nrt/binary_io.h"

namespace nrt {

namespace {

constexpr char kMagic[8] = {'N', 'R', 'T', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint8_t kF64 = 0, kU8 = 1;

void WriteHeader(std::ostream &os, const std::string &name, std::uint8_t dtype,
                 const std::vector<std::uint64_t> &shape) {
  io::WriteString(os, name);
  io::WriteLE<std::uint8_t>(os, dtype);
  io::WriteLE<std::uint32_t>(os, static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) io::WriteLE<std::uint64_t>(os, d);
}

void WriteF64(std::ostream &os, const std::string &name, const std::vector<std::uint64_t> &shape,
              const double *data, std::size_t n) {
  WriteHeader(os, name, kF64, shape);
  for (std::size_t i = 0; i < n; ++i) io::WriteLE<double>(os, data[i]);
}

void WriteU8(std::ostream &os, const std::string &name, const std::vector<std::uint8_t> &data) {
  WriteHeader(os, name, kU8, {data.size()});
  os.write(reinterpret_cast<const char *>(data.data()), static_cast<std::streamsize>(data.size()));
}

bool StartsWith(const std::string &s, const std::string &prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

std::string ShapeText(const Shape &s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

Checkpoint Parse(std::istream &is, const std::string &path) {
  char magic[8];
  if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kMagic)) {
    throw CheckpointError(path + ": not a checkpoint (bad magic)");
  }
  const auto version = io::ReadLE<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config_digest = io::ReadLE<std::uint64_t>(is, "digest");
  ck.config_text = io::ReadString(is, "config text");
  const auto count = io::ReadLE<std::uint64_t>(is, "record count");
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::string name = io::ReadString(is, "record name");
    const auto dtype = io::ReadLE<std::uint8_t>(is, "dtype");
    const auto ndim = io::ReadLE<std::uint32_t>(is, "ndim");
    if (ndim > 8) throw CheckpointError(path + ": record " + name + " has " + std::to_string(ndim) + " dims");
    Shape shape;
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape.push_back(io::ReadLE<std::uint64_t>(is, "dim"));
      n *= shape.back();
    }
    if (n > (std::uint64_t{1} << 32)) throw CheckpointError(path + ": record " + name + " too large");
    if (dtype == kF64) {
      std::vector<double> v(n);
      for (auto &x : v) x = io::ReadLE<double>(is, "f64 data");
      if (StartsWith(name, "param/")) {
        ck.params.emplace_back(name.substr(6), Tensor(shape, std::move(v)));
      } else if (StartsWith(name, "optim/")) {
        ck.optimizer[name.substr(6)] = std::move(v);
      } else {
        throw CheckpointError(path + ": unexpected f64 record " + name);
      }
    } else if (dtype == kU8) {
      std::vector<std::uint8_t> v(n);
      if (n && !is.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(n))) {
        throw CheckpointError(path + ": truncated record " + name);
      }
      if (StartsWith(name, "mask/")) {
        ck.masks[name.substr(5)] = std::move(v);
      } else if (name == "meta/state") {
        try {
          ck.state = nlohmann::json::parse(std::string(v.begin(), v.end()));
        } catch (const nlohmann::json::exception &e) {
          throw CheckpointError(path + ": corrupt state record: " + e.what());
        }
      } else {
        throw CheckpointError(path + ": unexpected u8 record " + name);
      }
    } else {
      throw CheckpointError(path + ": record " + name + " has unknown dtype " + std::to_string(dtype));
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError(path + ": trailing bytes after last record");
  }
  return ck;
}

}  // namespace

void WriteCheckpoint(const std::string &path, const Checkpoint &ck) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot write checkpoint " + tmp);
    os.write(kMagic, 8);
    io::WriteLE<std::uint32_t>(os, kCheckpointVersion);
    io::WriteLE<std::uint64_t>(os, ck.config_digest);
    io::WriteString(os, ck.config_text);
    io::WriteLE<std::uint64_t>(os, ck.params.size() + ck.masks.size() + ck.optimizer.size() + 1);
    for (const auto &[name, t] : ck.params) {
      std::vector<std::uint64_t> shape(t.shape().begin(), t.shape().end());
      WriteF64(os, "param/" + name, shape, t.data().data(), t.numel());
    }
    for (const auto &[name, flags] : ck.masks) WriteU8(os, "mask/" + name, flags);
    for (const auto &[key, v] : ck.optimizer) WriteF64(os, "optim/" + key, {v.size()}, v.data(), v.size());
    const std::string state = ck.state.dump();
    WriteU8(os, "meta/state", std::vector<std::uint8_t>(state.begin(), state.end()));
    if (!os.flush()) throw CheckpointError("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

Checkpoint ReadCheckpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path);
  try {
    return Parse(is, path);
  } catch (const DataError &e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

void StoreParams(const ModelParams &params, Checkpoint &ck) {
  ck.params.clear();
  for (const auto &p : params.params()) ck.params.emplace_back(p.name, p.value.Clone());
}

void LoadParams(const Checkpoint &ck, ModelParams &params) {
  if (ck.params.size() != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ck.params.size()) +
                          " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const auto &[name, t] = ck.params[i];
    auto &p = params.params()[i];
    if (p.name != name) throw CheckpointError("checkpoint tensor " + name + " where model has " + p.name);
    if (p.value.shape() != t.shape()) {
      throw CheckpointError("checkpoint tensor " + name + " has shape " + ShapeText(t.shape()) +
                            ", model expects " + ShapeText(p.value.shape()));
    }
    std::copy(t.data().begin(), t.data().end(), p.value.data().begin());
  }
}

void StoreMasks(const MaskSet &masks, Checkpoint &ck) {
  ck.masks.clear();
  for (const auto &[name, m] : masks.masks()) ck.masks[name] = m.alive_flags();
}

void LoadMasks(const Checkpoint &ck, MaskSet &masks) {
  if (ck.masks.size() != masks.masks().size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ck.masks.size()) +
                          " masks, run expects " + std::to_string(masks.masks().size()));
  }
  for (auto &[name, m] : masks.masks()) {
    auto it = ck.masks.find(name);
    if (it == ck.masks.end()) throw CheckpointError("checkpoint has no mask for " + name);
    m.set_alive_flags(it->second);
  }
}

}  // namespace nrt
