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


#include "glip/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace glip {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_file(const std::filesystem::path& p) {
  if (!std::filesystem::is_regular_file(p)) {
    throw ManifestError("manifest references missing file " + p.string());
  }
}

}  // namespace

DatasetManifest parse_manifest(const std::string& json,
                               const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.resolution = j.value("resolution", 256);
    m.split = j.value("split", std::string("train"));
    for (const auto& item : j.at("items")) {
      ManifestItem it;
      it.image = resolve(base_dir, item.at("image").get<std::string>());
      if (item.contains("mask")) {
        it.mask = resolve(base_dir, item.at("mask").get<std::string>());
      }
      if (item.contains("structure")) {
        it.structure = resolve(base_dir, item.at("structure").get<std::string>());
      }
      m.items.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }
  if (m.resolution <= 0 || m.resolution % 32 != 0) {
    throw ManifestError("manifest resolution must be a positive multiple of 32, got " +
                        std::to_string(m.resolution));
  }
  if (m.items.empty()) throw ManifestError("manifest has no items");
  for (const auto& it : m.items) {
    require_file(it.image);
    if (it.mask) require_file(*it.mask);
    if (it.structure) require_file(*it.structure);
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ManifestError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["resolution"] = m.resolution;
  j["split"] = m.split;
  j["items"] = nlohmann::json::array();
  for (const auto& it : m.items) {
    nlohmann::json item;
    item["image"] = it.image.string();
    if (it.mask) item["mask"] = it.mask->string();
    if (it.structure) item["structure"] = it.structure->string();
    j["items"].push_back(item);
  }
  std::ofstream os(path);
  if (!os) throw ManifestError("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace glip
