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


#ifndef GLIP_MANIFEST_HPP_
#define GLIP_MANIFEST_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace glip {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestItem {
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;
  std::optional<std::filesystem::path> structure;
};

// JSON: {"resolution": 256, "split": "train",
//        "items": [{"image": "a.png", "mask": "m.png"}, ...]}
// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
  int resolution = 256;
  std::string split = "train";
  std::vector<ManifestItem> items;
};

// Parses and validates: resolution a positive multiple of 32, at least one
// item, and every referenced file present.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& json,
                               const std::filesystem::path& base_dir);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

}  // namespace glip

#endif  // GLIP_MANIFEST_HPP_
