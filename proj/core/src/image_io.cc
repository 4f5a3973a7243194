// Copyright 2026 The LEGIT Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "legit/image_io.h"

#include <png.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "legit/error.h"

namespace legit {

std::string EncodePgm(const GlyphBitmap& bitmap) {
  std::string out = "P5\n" + std::to_string(bitmap.width) + " " +
                    std::to_string(bitmap.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(bitmap.pixels.data()),
             bitmap.pixels.size());
  return out;
}

GlyphBitmap DecodePgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || width < 0 || height < 0 || maxval != 255) {
    throw Error(ErrorCode::kFormatError, "not an 8-bit P5 PGM");
  }
  in.get();
  GlyphBitmap bitmap;
  bitmap.width = width;
  bitmap.height = height;
  bitmap.pixels.resize(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(bitmap.pixels.data()),
          static_cast<std::streamsize>(bitmap.pixels.size()));
  if (static_cast<size_t>(in.gcount()) != bitmap.pixels.size()) {
    throw Error(ErrorCode::kFormatError, "truncated PGM payload");
  }
  return bitmap;
}

namespace {

void AppendToString(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void NoFlush(png_structp) {}

}  // namespace

std::string EncodePng(const GlyphBitmap& bitmap) {
  if (bitmap.width == 0 || bitmap.height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "PNG cannot encode empty image");
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "libpng initialization failed");
  }
  std::string out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, AppendToString, NoFlush);
  png_set_IHDR(png, info, bitmap.width, bitmap.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < bitmap.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bitmap.pixels.data() +
                                             static_cast<size_t>(y) *
                                                 bitmap.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void WriteFile(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace legit
