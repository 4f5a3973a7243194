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

#include "legit/glyph_atlas.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "legit/error.h"
#include "legit/utf8.h"

namespace legit {

void FontConfig::Validate() const {
  if (glyph_px < 16 || canvas_w <= 0 || canvas_h <= 0 ||
      glyph_px > std::min(canvas_w, canvas_h)) {
    throw Error(ErrorCode::kInvalidArgument,
                "font config requires 16 <= glyph_px <= min(canvas_w, "
                "canvas_h), got glyph_px=" + std::to_string(glyph_px));
  }
}

size_t GlyphBitmap::InkCount() const {
  return std::count_if(pixels.begin(), pixels.end(),
                       [](uint8_t p) { return p < kBinarizeThreshold; });
}

HexFont HexFont::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open font file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

HexFont HexFont::Parse(std::string_view text) {
  HexFont font;
  size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const size_t colon = line.find(':');
    auto bad = [&](const char* what) {
      return Error(ErrorCode::kFormatError, "font line " +
                                                std::to_string(line_no) +
                                                ": " + what);
    };
    if (colon == std::string_view::npos) throw bad("missing ':'");
    unsigned cp = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + colon, cp, 16);
    if (ec != std::errc() || p != line.data() + colon) throw bad("bad codepoint");
    std::string_view digits = line.substr(colon + 1);
    HexGlyph glyph;
    if (digits.size() == 32) {
      glyph.width = 8;
    } else if (digits.size() == 64) {
      glyph.width = 16;
    } else {
      throw bad("expected 32 or 64 hex digits");
    }
    const size_t per_row = digits.size() / 16;
    for (size_t r = 0; r < 16; ++r) {
      unsigned value = 0;
      const char* first = digits.data() + r * per_row;
      auto [q, ec2] = std::from_chars(first, first + per_row, value, 16);
      if (ec2 != std::errc() || q != first + per_row) throw bad("bad row");
      glyph.rows[r] = static_cast<uint16_t>(value);
    }
    font.glyphs_[static_cast<char32_t>(cp)] = glyph;
  }
  return font;
}

const HexGlyph* HexFont::Find(char32_t cp) const {
  auto it = glyphs_.find(cp);
  return it == glyphs_.end() ? nullptr : &it->second;
}

std::vector<char32_t> HexFont::Codepoints() const {
  std::vector<char32_t> out;
  out.reserve(glyphs_.size());
  for (const auto& [cp, glyph] : glyphs_) out.push_back(cp);
  std::sort(out.begin(), out.end());
  return out;
}

CodepointSet::CodepointSet(std::vector<char32_t> codepoints)
    : codepoints_(std::move(codepoints)) {
  std::sort(codepoints_.begin(), codepoints_.end());
  codepoints_.erase(std::unique(codepoints_.begin(), codepoints_.end()),
                    codepoints_.end());
}

std::optional<size_t> CodepointSet::IndexOf(char32_t cp) const {
  auto it = std::lower_bound(codepoints_.begin(), codepoints_.end(), cp);
  if (it == codepoints_.end() || *it != cp) return std::nullopt;
  return static_cast<size_t>(it - codepoints_.begin());
}

GlyphAtlas::GlyphAtlas(FontConfig config)
    : GlyphAtlas(config, HexFont::Load(config.font_file)) {}

GlyphAtlas::GlyphAtlas(FontConfig config, HexFont font)
    : config_(std::move(config)), font_(std::move(font)) {
  config_.Validate();
}

const HexGlyph& GlyphAtlas::Lookup(char32_t cp) const {
  const HexGlyph* glyph = font_.Find(cp);
  if (glyph == nullptr) {
    throw Error(ErrorCode::kUnrenderable,
                "no glyph for " + FormatCodepoint(cp));
  }
  return *glyph;
}

int GlyphAtlas::CellWidth(char32_t cp) const {
  return Lookup(cp).width * config_.glyph_px / 16;
}

// Box is glyph_px tall and width*glyph_px/16 wide; each destination pixel
// samples the source bit at floor(d * 16 / glyph_px).
void GlyphAtlas::Blit(const HexGlyph& glyph, GlyphBitmap& out, int x0,
                      int y0) const {
  const int box_h = config_.glyph_px;
  const int box_w = glyph.width * config_.glyph_px / 16;
  for (int y = 0; y < box_h; ++y) {
    const int sy = y * 16 / box_h;
    for (int x = 0; x < box_w; ++x) {
      const int sx = x * glyph.width / box_w;
      if (glyph.Bit(sx, sy)) {
        out.pixels[static_cast<size_t>(y0 + y) * out.width + (x0 + x)] = kInk;
      }
    }
  }
}

GlyphBitmap GlyphAtlas::RenderGlyph(char32_t cp) const {
  const HexGlyph& glyph = Lookup(cp);
  GlyphBitmap out;
  out.width = config_.canvas_w;
  out.height = config_.canvas_h;
  out.codepoint = cp;
  out.pixels.assign(static_cast<size_t>(out.width) * out.height, kPaper);
  const int box_w = glyph.width * config_.glyph_px / 16;
  Blit(glyph, out, (config_.canvas_w - box_w) / 2,
       (config_.canvas_h - config_.glyph_px) / 2);
  return out;
}

GlyphBitmap GlyphAtlas::RenderCell(char32_t cp) const {
  const HexGlyph& glyph = Lookup(cp);
  GlyphBitmap out;
  out.width = glyph.width * config_.glyph_px / 16;
  out.height = config_.canvas_h;
  out.codepoint = cp;
  out.pixels.assign(static_cast<size_t>(out.width) * out.height, kPaper);
  Blit(glyph, out, 0, (config_.canvas_h - config_.glyph_px) / 2);
  return out;
}

GlyphBitmap GlyphAtlas::RenderString(std::u32string_view text) const {
  std::vector<GlyphBitmap> cells;
  cells.reserve(text.size());
  int width = 0;
  for (char32_t cp : text) {
    cells.push_back(RenderCell(cp));
    width += cells.back().width;
  }
  GlyphBitmap out;
  out.width = width;
  out.height = config_.canvas_h;
  out.codepoint = text.empty() ? 0 : text.front();
  out.pixels.assign(static_cast<size_t>(width) * out.height, kPaper);
  int x0 = 0;
  for (const GlyphBitmap& cell : cells) {
    for (int y = 0; y < cell.height; ++y) {
      std::copy_n(cell.pixels.begin() + static_cast<size_t>(y) * cell.width,
                  cell.width,
                  out.pixels.begin() + static_cast<size_t>(y) * width + x0);
    }
    x0 += cell.width;
  }
  return out;
}

CodepointSet GlyphAtlas::BuildCodepointSet(char32_t first,
                                           char32_t last) const {
  if (first > last || last > kMaxSupportedCodepoint) {
    throw Error(ErrorCode::kInvalidArgument,
                "codepoint range must lie within U+0000..U+2FFF");
  }
  std::vector<char32_t> members;
  for (char32_t cp = first; cp <= last; ++cp) {
    const HexGlyph* glyph = font_.Find(cp);
    if (glyph == nullptr) continue;
    // Ink survives integer upscaling, so the 16px bitmap decides.
    if (std::any_of(glyph->rows.begin(), glyph->rows.end(),
                    [](uint16_t row) { return row != 0; })) {
      members.push_back(cp);
    }
  }
  return CodepointSet(std::move(members));
}

}  // namespace legit
