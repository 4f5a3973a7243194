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

#ifndef LEGIT_GLYPH_ATLAS_H_
#define LEGIT_GLYPH_ATLAS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace legit {

// Rendering parameters. Glyphs are drawn black on white, scaled from the
// 16px bitmap font by nearest-neighbor sampling and centered on the canvas.
struct FontConfig {
  std::string font_file = LEGIT_DEFAULT_FONT;
  int glyph_px = 144;
  int canvas_w = 224;
  int canvas_h = 224;

  // Throws InvalidArgument unless 16 <= glyph_px <= min(canvas_w, canvas_h).
  void Validate() const;
  bool operator==(const FontConfig&) const = default;
};

inline constexpr uint8_t kInk = 0;
inline constexpr uint8_t kPaper = 255;
inline constexpr uint8_t kBinarizeThreshold = 128;

// 8-bit grayscale raster, row-major. Pixels below kBinarizeThreshold are ink.
struct GlyphBitmap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;
  char32_t codepoint = 0;

  bool IsInk(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x] < kBinarizeThreshold;
  }
  size_t InkCount() const;
  bool operator==(const GlyphBitmap&) const = default;
};

// One glyph of a Unifont .hex file: 16 rows, 8 or 16 columns.
struct HexGlyph {
  int width = 8;
  std::array<uint16_t, 16> rows{};

  bool Bit(int x, int y) const {
    return (rows[y] >> (width - 1 - x)) & 1u;
  }
};

// Parsed Unifont .hex font ("XXXX:HEXDIGITS" per line).
class HexFont {
 public:
  static HexFont Load(const std::string& path);
  static HexFont Parse(std::string_view text);

  const HexGlyph* Find(char32_t cp) const;
  size_t size() const { return glyphs_.size(); }
  // All codepoints present in the font, ascending.
  std::vector<char32_t> Codepoints() const;

 private:
  std::unordered_map<char32_t, HexGlyph> glyphs_;
};

// Sorted list of substitution candidates: codepoints that render with ink.
class CodepointSet {
 public:
  CodepointSet() = default;
  // Sorts and deduplicates.
  explicit CodepointSet(std::vector<char32_t> codepoints);

  std::span<const char32_t> codepoints() const { return codepoints_; }
  size_t size() const { return codepoints_.size(); }
  bool empty() const { return codepoints_.empty(); }
  char32_t operator[](size_t i) const { return codepoints_[i]; }
  std::optional<size_t> IndexOf(char32_t cp) const;
  bool Contains(char32_t cp) const { return IndexOf(cp).has_value(); }
  bool operator==(const CodepointSet&) const = default;

 private:
  std::vector<char32_t> codepoints_;
};

inline constexpr char32_t kMaxSupportedCodepoint = 0x2FFF;

// Immutable after construction; all methods are const and safe to call
// concurrently.
class GlyphAtlas {
 public:
  explicit GlyphAtlas(FontConfig config);
  GlyphAtlas(FontConfig config, HexFont font);

  const FontConfig& config() const { return config_; }
  const HexFont& font() const { return font_; }
  bool HasGlyph(char32_t cp) const { return font_.Find(cp) != nullptr; }

  // Full canvas with the glyph centered. Throws Unrenderable.
  GlyphBitmap RenderGlyph(char32_t cp) const;

  // The glyph's advance cell: advance width x canvas height, glyph
  // vertically centered exactly as on the full canvas.
  GlyphBitmap RenderCell(char32_t cp) const;
  int CellWidth(char32_t cp) const;

  // Horizontal concatenation of cells. Throws Unrenderable on the first
  // character missing from the font.
  GlyphBitmap RenderString(std::u32string_view text) const;

  // Members of [first, last] that render with at least one ink pixel.
  CodepointSet BuildCodepointSet(char32_t first, char32_t last) const;

 private:
  const HexGlyph& Lookup(char32_t cp) const;
  void Blit(const HexGlyph& glyph, GlyphBitmap& out, int x0, int y0) const;

  FontConfig config_;
  HexFont font_;
};

}  // namespace legit

#endif  // LEGIT_GLYPH_ATLAS_H_
