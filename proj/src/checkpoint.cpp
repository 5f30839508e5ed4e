/*
Copyright 2026 The glip Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/


#include "glip/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace glip {

namespace {

constexpr char kMagic[4] = {'G', 'L', 'I', 'P'};
constexpr std::string_view kStep = "adam.step";
constexpr std::string_view kFirst = "adam.m/";
constexpr std::string_view kSecond = "adam.v/";

void write_entries(std::ostream& os, const NamedTensors<float>& entries) {
  le::put_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("checkpoint: name too long: " + name.substr(0, 32));
    }
    le::put_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_t4f(os, t);
  }
}

NamedTensors<float> read_entries(std::istream& is) {
  const std::uint32_t count = le::get_u32(is);
  NamedTensors<float> out;
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(le::get_u16(is), '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(name.size()))) {
      throw FormatError("checkpoint: truncated entry name");
    }
    if (!seen.insert(name).second) {
      throw FormatError("checkpoint: duplicate entry " + name);
    }
    out.emplace_back(std::move(name), read_t4f(is));
  }
  return out;
}

}  // namespace

const Tensor<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : parameters) {
    if (n == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  os.write(kMagic, 4);
  le::put_u32(os, kCheckpointVersion);
  write_entries(os, ckpt.parameters);
  write_entries(os, ckpt.optimizer);
  le::put_u32(os, static_cast<std::uint32_t>(ckpt.config_json.size()));
  os.write(ckpt.config_json.data(),
           static_cast<std::streamsize>(ckpt.config_json.size()));
  if (!os) throw FormatError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw FormatError("checkpoint: bad magic");
  }
  const std::uint32_t version = le::get_u32(is);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.parameters = read_entries(is);
  ckpt.optimizer = read_entries(is);
  ckpt.config_json.resize(le::get_u32(is));
  if (!is.read(ckpt.config_json.data(),
               static_cast<std::streamsize>(ckpt.config_json.size()))) {
    throw FormatError("checkpoint: truncated config");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_checkpoint(is);
}

NamedTensors<float> pack_adam(const AdamState<float>& state) {
  NamedTensors<float> out;
  out.emplace_back(std::string(kStep),
                   Tensor<float>::scalar(static_cast<float>(state.step)));
  for (const auto& [name, t] : state.m) out.emplace_back(std::string(kFirst) + name, t);
  for (const auto& [name, t] : state.v) out.emplace_back(std::string(kSecond) + name, t);
  return out;
}

AdamState<float> unpack_adam(const NamedTensors<float>& entries) {
  AdamState<float> state;
  for (const auto& [name, t] : entries) {
    if (name == kStep) {
      state.step = static_cast<std::int64_t>(std::llround(t.item()));
    } else if (name.starts_with(kFirst)) {
      state.m.emplace(name.substr(kFirst.size()), t.clone());
    } else if (name.starts_with(kSecond)) {
      state.v.emplace(name.substr(kSecond.size()), t.clone());
    } else {
      throw FormatError("checkpoint: unknown optimizer entry " + name);
    }
  }
  return state;
}

void load_parameters(const Checkpoint& ckpt, const NetworkWeights<float>& w) {
  const auto params = named_parameters(w);
  if (params.size() != ckpt.parameters.size()) {
    throw FormatError("checkpoint: " + std::to_string(ckpt.parameters.size()) +
                      " parameters, network expects " +
                      std::to_string(params.size()));
  }
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& [n, t] : ckpt.parameters) by_name[n] = &t;
  for (auto [name, t] : params) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("checkpoint: missing " + name);
    if (!(it->second->dims() == t.dims())) {
      throw FormatError("checkpoint: " + name + " has dims " +
                        it->second->dims().str() + ", expected " + t.dims().str());
    }
    t.mutable_values() = it->second->values();
  }
}

NamedTensors<float> snapshot_parameters(const NetworkWeights<float>& w) {
  NamedTensors<float> out;
  for (const auto& [name, t] : named_parameters(w)) out.emplace_back(name, t.clone());
  return out;
}

}  // namespace glip
