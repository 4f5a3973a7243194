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

#ifndef LEGIT_IMAGE_IO_H_
#define LEGIT_IMAGE_IO_H_

#include <string>

#include "legit/glyph_atlas.h"

namespace legit {

// Binary PGM ("P5", maxval 255). This is the byte-exact reference format.
std::string EncodePgm(const GlyphBitmap& bitmap);
GlyphBitmap DecodePgm(const std::string& bytes);

// 8-bit grayscale PNG.
std::string EncodePng(const GlyphBitmap& bitmap);

void WriteFile(const std::string& path, const std::string& bytes);
std::string ReadFile(const std::string& path);

}  // namespace legit

#endif  // LEGIT_IMAGE_IO_H_
