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


#include "glip/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace glip {

namespace {

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;  // interleaved
};

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Raster read_png(const std::filesystem::path& path, int channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ImageError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Raster r{static_cast<int>(image.width), static_cast<int>(image.height),
           channels, {}};
  r.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return r;
}

void write_png(const std::filesystem::path& path, const Raster& r) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width);
  image.height = static_cast<png_uint_32>(r.height);
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, r.pixels.data(), 0,
                               nullptr)) {
    throw ImageError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

// Next header token of a PNM file, skipping whitespace and comments.
std::string pnm_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
    } else if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      break;
    }
  }
  while ((ch = is.peek()) != EOF && !std::isspace(ch) && ch != '#') {
    tok.push_back(static_cast<char>(is.get()));
  }
  return tok;
}

Raster read_pnm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageError("cannot open " + path.string());
  const std::string magic = pnm_token(is);
  if (magic != "P6" && magic != "P5") {
    throw ImageError(path.string() + ": only binary P5/P6 supported");
  }
  Raster r;
  r.channels = magic == "P6" ? 3 : 1;
  try {
    r.width = std::stoi(pnm_token(is));
    r.height = std::stoi(pnm_token(is));
    const int maxval = std::stoi(pnm_token(is));
    if (maxval != 255) throw ImageError(path.string() + ": maxval must be 255");
  } catch (const std::logic_error&) {
    throw ImageError(path.string() + ": malformed header");
  }
  if (r.width <= 0 || r.height <= 0) throw ImageError(path.string() + ": bad size");
  is.get();  // single whitespace before the raster
  r.pixels.resize(static_cast<std::size_t>(r.width) * r.height * r.channels);
  if (!is.read(reinterpret_cast<char*>(r.pixels.data()),
               static_cast<std::streamsize>(r.pixels.size()))) {
    throw ImageError(path.string() + ": truncated raster");
  }
  return r;
}

void write_pnm(const std::filesystem::path& path, const Raster& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ImageError("cannot open " + path.string() + " for writing");
  os << (r.channels == 3 ? "P6" : "P5") << "\n"
     << r.width << " " << r.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(r.pixels.data()),
           static_cast<std::streamsize>(r.pixels.size()));
  if (!os) throw ImageError("write failed: " + path.string());
}

Raster read_raster(const std::filesystem::path& path, int channels) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path, channels);
  if (ext != ".ppm" && ext != ".pgm" && ext != ".pnm") {
    throw ImageError("unsupported image format: " + path.string());
  }
  Raster r = read_pnm(path);
  if (r.channels == channels) return r;
  Raster out{r.width, r.height, channels, {}};
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  out.pixels.resize(n * channels);
  for (std::size_t i = 0; i < n; ++i) {
    if (channels == 3) {
      std::fill_n(out.pixels.begin() + i * 3, 3, r.pixels[i]);
    } else {
      const double y = 0.299 * r.pixels[3 * i] + 0.587 * r.pixels[3 * i + 1] +
                       0.114 * r.pixels[3 * i + 2];
      out.pixels[i] = static_cast<std::uint8_t>(std::lround(y));
    }
  }
  return out;
}

void write_raster(const std::filesystem::path& path, const Raster& r) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, r);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return write_pnm(path, r);
  throw ImageError("unsupported image format: " + path.string());
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

Tensor<float> load_image(const std::filesystem::path& path, int resolution) {
  const Raster r = read_raster(path, 3);
  Tensor<float> t({1, 3, r.height, r.width});
  auto& v = t.mutable_values();
  const std::size_t plane = static_cast<std::size_t>(r.width) * r.height;
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      v[static_cast<Eigen::Index>(c * plane + i)] = r.pixels[i * 3 + c] / 255.0f;
    }
  }
  if (resolution > 0 && (r.height != resolution || r.width != resolution)) {
    return resize_bilinear(t, resolution, resolution);
  }
  return t;
}

void save_image(const Tensor<float>& image, const std::filesystem::path& path) {
  if (image.n() != 1 || (image.c() != 3 && image.c() != 1)) {
    throw ShapeError("save_image: expects (1, 3|1, h, w), got " + image.dims().str());
  }
  Raster r{image.w(), image.h(), image.c(), {}};
  const std::size_t plane = image.dims().plane();
  r.pixels.resize(plane * r.channels);
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < r.channels; ++c) {
      r.pixels[i * r.channels + c] =
          quantize(image.values()[static_cast<Eigen::Index>(c * plane + i)]);
    }
  }
  write_raster(path, r);
}

MaskPlane load_mask(const std::filesystem::path& path, int resolution) {
  const Raster r = read_raster(path, 1);
  MaskPlane m(r.height, r.width, false);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      m.set(y, x, r.pixels[static_cast<std::size_t>(y) * r.width + x] >= 128);
    }
  }
  if (resolution <= 0 || (r.height == resolution && r.width == resolution)) {
    return m;
  }
  MaskPlane out(resolution, resolution, false);
  for (int y = 0; y < resolution; ++y) {
    const int sy = std::min(r.height - 1, y * r.height / resolution);
    for (int x = 0; x < resolution; ++x) {
      out.set(y, x, m(sy, std::min(r.width - 1, x * r.width / resolution)));
    }
  }
  return out;
}

void save_mask(const MaskPlane& mask, const std::filesystem::path& path) {
  if (mask.batch() != 1) throw ShapeError("save_mask: expects a single plane");
  Raster r{mask.width(), mask.height(), 1, {}};
  r.pixels.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) r.pixels[i] = mask.bits()[i] ? 255 : 0;
  write_raster(path, r);
}

Tensor<float> resize_bilinear(const Tensor<float>& image, int height, int width) {
  if (height <= 0 || width <= 0) throw ShapeError("resize_bilinear: bad size");
  const Dims d = image.dims();
  Tensor<float> out({d.n, d.c, height, width});
  auto& v = out.mutable_values();
  const double sy = static_cast<double>(d.h) / height;
  const double sx = static_cast<double>(d.w) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, d.h - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, d.h - 1);
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, d.w - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, d.w - 1);
      const double ax = fx - x0;
      for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.c; ++c) {
          const double top = (1 - ax) * image(n, c, y0, x0) + ax * image(n, c, y0, x1);
          const double bot = (1 - ax) * image(n, c, y1, x0) + ax * image(n, c, y1, x1);
          v[static_cast<Eigen::Index>(out.offset(n, c, y, x))] =
              static_cast<float>((1 - ay) * top + ay * bot);
        }
      }
    }
  }
  return out;
}

}  // namespace glip
