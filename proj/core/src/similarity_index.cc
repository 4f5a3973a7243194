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

#include "legit/similarity_index.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/utf8.h"

namespace legit {

void EmbeddingMatrix::Validate() const {
  if (values.size() != codepoints.size() * dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding matrix holds " + std::to_string(values.size()) +
                    " values, expected " +
                    std::to_string(codepoints.size() * dim));
  }
  for (size_t i = 0; i < rows(); ++i) {
    auto row = Row(i);
    if (std::all_of(row.begin(), row.end(), [](float v) { return v == 0.0f; })) {
      throw Error(ErrorCode::kZeroVector,
                  "zero embedding for " + FormatCodepoint(codepoints[i]));
    }
  }
}

std::vector<float> ImgDotEmbed(const GlyphBitmap& bitmap) {
  std::vector<float> out(bitmap.pixels.size());
  bool any = false;
  for (size_t i = 0; i < out.size(); ++i) {
    const bool ink = bitmap.pixels[i] < kBinarizeThreshold;
    out[i] = ink ? 1.0f : 0.0f;
    any |= ink;
  }
  if (!any) {
    throw Error(ErrorCode::kZeroVector,
                "blank bitmap for " + FormatCodepoint(bitmap.codepoint));
  }
  return out;
}

double CosineFromDot(double dot, double norm_sq_u, double norm_sq_v) {
  const double d = 1.0 - dot / (std::sqrt(norm_sq_u) * std::sqrt(norm_sq_v));
  return std::clamp(d, 0.0, 2.0);
}

double CosineDistance(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vectors of length " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine distance of a zero vector");
  }
  return CosineFromDot(dot, uu, vv);
}

// ---------------------------------------------------------------------------
// GlyphLattice

namespace {

struct Placement {
  int x0, box_w;
  int glyph_w;
};

// Boundaries of the constant-source runs of one placement along an axis.
void AddBoundaries(int origin, int box, int source, std::set<int>& out) {
  int prev = -1;
  for (int d = 0; d < box; ++d) {
    const int s = d * source / box;
    if (s != prev) out.insert(origin + d);
    prev = s;
  }
  out.insert(origin + box);
}

int SourceIndex(int pos, int origin, int box, int source) {
  if (pos < origin || pos >= origin + box) return -1;
  return (pos - origin) * source / box;
}

}  // namespace

GlyphLattice::GlyphLattice(const FontConfig& config) : config_(config) {
  config_.Validate();
  const int g = config_.glyph_px;
  const int y0 = (config_.canvas_h - g) / 2;
  const Placement placements[2] = {
      {(config_.canvas_w - 8 * g / 16) / 2, 8 * g / 16, 8},
      {(config_.canvas_w - g) / 2, g, 16},
  };
  std::set<int> xs, ys;
  for (const Placement& p : placements) AddBoundaries(p.x0, p.box_w, p.glyph_w, xs);
  AddBoundaries(y0, g, 16, ys);

  std::vector<int> xb(xs.begin(), xs.end());
  std::vector<int> yb(ys.begin(), ys.end());
  for (size_t yi = 0; yi + 1 < yb.size(); ++yi) {
    for (size_t xi = 0; xi + 1 < xb.size(); ++xi) {
      Cell cell{xb[xi], xb[xi + 1], yb[yi], yb[yi + 1],
                static_cast<uint64_t>(xb[xi + 1] - xb[xi]) *
                    static_cast<uint64_t>(yb[yi + 1] - yb[yi])};
      cells_.push_back(cell);
    }
  }
  std::stable_sort(cells_.begin(), cells_.end(),
                   [](const Cell& a, const Cell& b) { return a.area < b.area; });
  // Each group starts on a word boundary so popcounts never mix areas.
  size_t i = 0;
  while (i < cells_.size()) {
    size_t j = i;
    while (j < cells_.size() && cells_[j].area == cells_[i].area) ++j;
    const size_t count = j - i;
    groups_.push_back({cells_[i].area, words_, (count + 63) / 64});
    words_ += (count + 63) / 64;
    i = j;
  }
}

BinaryGlyph GlyphLattice::Encode(const HexGlyph& glyph) const {
  const int g = config_.glyph_px;
  const int box_w = glyph.width * g / 16;
  const int x0 = (config_.canvas_w - box_w) / 2;
  const int y0 = (config_.canvas_h - g) / 2;
  BinaryGlyph out;
  out.bits.assign(words_, 0);
  size_t cell = 0;
  for (const Group& group : groups_) {
    for (size_t k = 0; cell < cells_.size() && cells_[cell].area == group.area;
         ++k, ++cell) {
      const Cell& c = cells_[cell];
      const int sx = SourceIndex(c.x_begin, x0, box_w, glyph.width);
      const int sy = SourceIndex(c.y_begin, y0, g, 16);
      if (sx < 0 || sy < 0 || !glyph.Bit(sx, sy)) continue;
      out.bits[group.word_begin + k / 64] |= uint64_t{1} << (k % 64);
      out.ink += c.area;
    }
  }
  return out;
}

uint64_t GlyphLattice::Dot(const BinaryGlyph& a, const BinaryGlyph& b) const {
  uint64_t dot = 0;
  for (const Group& group : groups_) {
    uint64_t shared = 0;
    for (size_t w = group.word_begin; w < group.word_begin + group.word_count;
         ++w) {
      shared += std::popcount(a.bits[w] & b.bits[w]);
    }
    dot += shared * group.area;
  }
  return dot;
}

// ---------------------------------------------------------------------------
// Character distance spaces

ImgDotSpace::ImgDotSpace(const GlyphAtlas& atlas) : lattice_(atlas.config()) {
  for (char32_t cp : atlas.font().Codepoints()) {
    glyphs_.emplace(cp, lattice_.Encode(*atlas.font().Find(cp)));
  }
}

const BinaryGlyph& ImgDotSpace::Glyph(char32_t cp) const {
  auto it = glyphs_.find(cp);
  if (it == glyphs_.end()) {
    throw Error(ErrorCode::kUnknownCodepoint,
                "no glyph for " + FormatCodepoint(cp));
  }
  return it->second;
}

double ImgDotSpace::Distance(char32_t a, char32_t b) const {
  if (a == b) return 0.0;
  const BinaryGlyph& ga = Glyph(a);
  const BinaryGlyph& gb = Glyph(b);
  if (ga.ink == 0 || gb.ink == 0) {
    throw Error(ErrorCode::kZeroVector,
                "blank glyph in " + FormatCodepoint(a) + "/" + FormatCodepoint(b));
  }
  return CosineFromDot(static_cast<double>(lattice_.Dot(ga, gb)),
                       static_cast<double>(ga.ink), static_cast<double>(gb.ink));
}

EmbeddingSpace::EmbeddingSpace(EmbeddingMatrix matrix)
    : matrix_(std::move(matrix)) {
  matrix_.Validate();
  norm_sq_.resize(matrix_.rows());
  for (size_t i = 0; i < matrix_.rows(); ++i) {
    double s = 0.0;
    for (float v : matrix_.Row(i)) s += static_cast<double>(v) * v;
    norm_sq_[i] = s;
    rows_.emplace(matrix_.codepoints[i], i);
  }
}

double EmbeddingSpace::Distance(char32_t a, char32_t b) const {
  if (a == b) return 0.0;
  auto ia = rows_.find(a);
  auto ib = rows_.find(b);
  if (ia == rows_.end() || ib == rows_.end()) {
    throw Error(ErrorCode::kMissingCodepoints,
                "no embedding for " +
                    FormatCodepoint(ia == rows_.end() ? a : b) + " in model " +
                    matrix_.model_id);
  }
  auto u = matrix_.Row(ia->second);
  auto v = matrix_.Row(ib->second);
  double dot = 0.0;
  for (size_t i = 0; i < u.size(); ++i) dot += static_cast<double>(u[i]) * v[i];
  return CosineFromDot(dot, norm_sq_[ia->second], norm_sq_[ib->second]);
}

// ---------------------------------------------------------------------------
// NeighborTable

NeighborTable::NeighborTable(std::string model_id, CodepointSet set,
                             std::vector<std::vector<Neighbor>> lists)
    : model_id_(std::move(model_id)),
      set_(std::move(set)),
      lists_(std::move(lists)) {
  if (lists_.size() != set_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "neighbor table needs one list per codepoint");
  }
}

std::span<const Neighbor> NeighborTable::Neighbors(char32_t cp) const {
  auto index = set_.IndexOf(cp);
  if (!index) {
    throw Error(ErrorCode::kUnknownCodepoint,
                FormatCodepoint(cp) + " is not in neighbor table '" +
                    model_id_ + "'");
  }
  return lists_[*index];
}

const Neighbor& NeighborTable::Kth(char32_t cp, int k) const {
  auto list = Neighbors(cp);
  if (list.empty()) {
    throw Error(ErrorCode::kUnknownCodepoint,
                FormatCodepoint(cp) + " has no neighbors");
  }
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "neighbor rank must be >= 1");
  }
  const size_t index = std::min(static_cast<size_t>(k), list.size()) - 1;
  return list[index];
}

std::string NeighborTable::ToJsonl() const {
  std::string out;
  for (size_t i = 0; i < set_.size(); ++i) {
    nlohmann::json nbrs = nlohmann::json::array();
    for (const Neighbor& n : lists_[i]) {
      nbrs.push_back({FormatCodepoint(n.codepoint), n.distance});
    }
    nlohmann::json line = {{"cp", FormatCodepoint(set_[i])}, {"nbrs", nbrs}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

NeighborTable NeighborTable::FromJsonl(std::string_view text,
                                       std::string model_id) {
  std::vector<std::pair<char32_t, std::vector<Neighbor>>> rows;
  size_t line_no = 0;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::vector<Neighbor> list;
      for (const auto& entry : j.at("nbrs")) {
        list.push_back({ParseCodepoint(entry.at(0).get<std::string>()),
                        entry.at(1).get<double>()});
      }
      rows.emplace_back(ParseCodepoint(j.at("cp").get<std::string>()),
                        std::move(list));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, "neighbor table line " +
                                               std::to_string(line_no) + ": " +
                                               e.what());
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<char32_t> cps;
  std::vector<std::vector<Neighbor>> lists;
  for (auto& [cp, list] : rows) {
    if (!cps.empty() && cps.back() == cp) {
      throw Error(ErrorCode::kFormatError,
                  "duplicate row for " + FormatCodepoint(cp));
    }
    cps.push_back(cp);
    lists.push_back(std::move(list));
  }
  return NeighborTable(std::move(model_id), CodepointSet(std::move(cps)),
                       std::move(lists));
}

void NeighborTable::Save(const std::string& path) const {
  WriteFile(path, ToJsonl());
}

NeighborTable NeighborTable::Load(const std::string& path,
                                  std::string model_id) {
  return FromJsonl(ReadFile(path), std::move(model_id));
}

// ---------------------------------------------------------------------------
// Table construction

namespace {

bool NeighborLess(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.codepoint < b.codepoint;
}

class DenseKernel : public DistanceKernel {
 public:
  DenseKernel(const EmbeddingMatrix& emb, const CodepointSet& set)
      : emb_(emb), set_(set), norm_sq_(emb.rows()) {
    for (size_t i = 0; i < emb.rows(); ++i) {
      double s = 0.0;
      for (float v : emb.Row(i)) s += static_cast<double>(v) * v;
      norm_sq_[i] = s;
    }
  }
  const CodepointSet& codepoints() const override { return set_; }
  double Distance(size_t i, size_t j) const override {
    auto u = emb_.Row(i);
    auto v = emb_.Row(j);
    double dot = 0.0;
    for (size_t d = 0; d < u.size(); ++d) dot += static_cast<double>(u[d]) * v[d];
    return CosineFromDot(dot, norm_sq_[i], norm_sq_[j]);
  }

 private:
  const EmbeddingMatrix& emb_;
  const CodepointSet& set_;
  std::vector<double> norm_sq_;
};

class ImgDotKernel : public DistanceKernel {
 public:
  ImgDotKernel(const GlyphAtlas& atlas, const CodepointSet& set)
      : lattice_(atlas.config()), set_(set) {
    glyphs_.reserve(set.size());
    for (char32_t cp : set.codepoints()) {
      const HexGlyph* glyph = atlas.font().Find(cp);
      if (glyph == nullptr) {
        throw Error(ErrorCode::kUnrenderable, "no glyph for " + FormatCodepoint(cp));
      }
      glyphs_.push_back(lattice_.Encode(*glyph));
      if (glyphs_.back().ink == 0) {
        throw Error(ErrorCode::kZeroVector,
                    "blank glyph for " + FormatCodepoint(cp));
      }
    }
  }
  const CodepointSet& codepoints() const override { return set_; }
  double Distance(size_t i, size_t j) const override {
    return CosineFromDot(static_cast<double>(lattice_.Dot(glyphs_[i], glyphs_[j])),
                         static_cast<double>(glyphs_[i].ink),
                         static_cast<double>(glyphs_[j].ink));
  }

 private:
  GlyphLattice lattice_;
  const CodepointSet& set_;
  std::vector<BinaryGlyph> glyphs_;
};

}  // namespace

NeighborTable BuildNeighborTable(const DistanceKernel& kernel,
                                 std::string model_id,
                                 const IndexOptions& options) {
  const CodepointSet& set = kernel.codepoints();
  const size_t n = set.size();
  const size_t keep = (options.top == 0 || n == 0)
                          ? (n == 0 ? 0 : n - 1)
                          : std::min(options.top, n - 1);
  CodepointSet row_set = options.rows.empty() ? set : CodepointSet(options.rows);
  std::vector<size_t> row_index;
  row_index.reserve(row_set.size());
  for (char32_t cp : row_set.codepoints()) {
    const auto idx = set.IndexOf(cp);
    if (!idx) {
      throw Error(ErrorCode::kUnknownCodepoint,
                  FormatCodepoint(cp) + " is not in the indexed set");
    }
    row_index.push_back(*idx);
  }
  const size_t rows = row_index.size();
  std::vector<std::vector<Neighbor>> lists(rows);
  unsigned workers = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<size_t>(workers, std::max<size_t>(rows, 1)));

  // Rows are independent; each worker takes a fixed stride.
  auto work = [&](unsigned worker) {
    std::vector<Neighbor> row;
    for (size_t r = worker; r < rows; r += workers) {
      const size_t i = row_index[r];
      row.clear();
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        row.push_back({set[j], kernel.Distance(i, j)});
      }
      std::partial_sort(row.begin(), row.begin() + keep, row.end(), NeighborLess);
      lists[r].assign(row.begin(), row.begin() + keep);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return NeighborTable(std::move(model_id), std::move(row_set), std::move(lists));
}

NeighborTable BuildNeighborTable(const EmbeddingMatrix& emb,
                                 const CodepointSet& set,
                                 const IndexOptions& options) {
  emb.Validate();
  if (!std::equal(emb.codepoints.begin(), emb.codepoints.end(),
                  set.codepoints().begin(), set.codepoints().end())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding rows are not aligned with the codepoint set");
  }
  DenseKernel kernel(emb, set);
  return BuildNeighborTable(kernel, emb.model_id, options);
}

NeighborTable BuildImgDotTable(const GlyphAtlas& atlas, const CodepointSet& set,
                               const IndexOptions& options) {
  ImgDotKernel kernel(atlas, set);
  return BuildNeighborTable(kernel, "imgdot", options);
}

EmbeddingMatrix ImgDotEmbeddings(const GlyphAtlas& atlas,
                                 const CodepointSet& set) {
  EmbeddingMatrix emb;
  emb.model_id = "imgdot";
  emb.dim = static_cast<size_t>(atlas.config().canvas_w) * atlas.config().canvas_h;
  emb.values.reserve(emb.dim * set.size());
  for (char32_t cp : set.codepoints()) {
    auto row = ImgDotEmbed(atlas.RenderGlyph(cp));
    emb.values.insert(emb.values.end(), row.begin(), row.end());
    emb.codepoints.push_back(cp);
  }
  return emb;
}

// ---------------------------------------------------------------------------
// Embedding files

namespace {

std::vector<std::string_view> SplitSpaces(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view token, size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kFormatError,
                "embedding line " + std::to_string(line_no) + ": bad number '" +
                    std::string(token) + "'");
  }
  return value;
}

}  // namespace

EmbeddingMatrix ParseEmbeddings(std::string_view text, const CodepointSet& set) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kFormatError, "empty embedding file");

  auto header = SplitSpaces(lines[0]);
  if (header.size() != 3) {
    throw Error(ErrorCode::kFormatError,
                "embedding header must be 'model_id dim count'");
  }
  EmbeddingMatrix emb;
  emb.model_id = std::string(header[0]);
  emb.dim = ParseNumber<size_t>(header[1], 1);
  const size_t count = ParseNumber<size_t>(header[2], 1);
  if (lines.size() - 1 != count) {
    throw Error(ErrorCode::kFormatError,
                "header declares " + std::to_string(count) + " rows, found " +
                    std::to_string(lines.size() - 1));
  }

  std::vector<std::vector<float>> rows(set.size());
  for (size_t l = 1; l < lines.size(); ++l) {
    auto tokens = SplitSpaces(lines[l]);
    if (tokens.empty()) {
      throw Error(ErrorCode::kFormatError, "blank embedding row " + std::to_string(l + 1));
    }
    const char32_t cp = ParseCodepoint(tokens[0]);
    if (tokens.size() - 1 != emb.dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  FormatCodepoint(cp) + " has " + std::to_string(tokens.size() - 1) +
                      " values, header says " + std::to_string(emb.dim));
    }
    auto index = set.IndexOf(cp);
    if (!index) continue;  // rows outside the set are ignored
    if (!rows[*index].empty()) {
      throw Error(ErrorCode::kFormatError, "duplicate row for " + FormatCodepoint(cp));
    }
    rows[*index].reserve(emb.dim);
    for (size_t d = 1; d < tokens.size(); ++d) {
      rows[*index].push_back(ParseNumber<float>(tokens[d], l + 1));
    }
  }

  std::string missing;
  size_t missing_count = 0;
  for (size_t i = 0; i < set.size(); ++i) {
    if (rows[i].empty() && emb.dim > 0) {
      if (missing_count++ < 32) missing += " " + FormatCodepoint(set[i]);
    }
  }
  if (missing_count > 0) {
    throw Error(ErrorCode::kMissingCodepoints,
                std::to_string(missing_count) + " codepoints missing from '" +
                    emb.model_id + "' embeddings:" + missing);
  }
  emb.codepoints.assign(set.codepoints().begin(), set.codepoints().end());
  emb.values.reserve(emb.dim * set.size());
  for (auto& row : rows) emb.values.insert(emb.values.end(), row.begin(), row.end());
  emb.Validate();
  return emb;
}

EmbeddingMatrix LoadEmbeddings(const std::string& path, const CodepointSet& set) {
  return ParseEmbeddings(ReadFile(path), set);
}

std::string FormatEmbeddings(const EmbeddingMatrix& emb) {
  std::string out = emb.model_id + " " + std::to_string(emb.dim) + " " +
                    std::to_string(emb.rows()) + "\n";
  char buf[64];
  for (size_t i = 0; i < emb.rows(); ++i) {
    out += FormatCodepoint(emb.codepoints[i]);
    for (float v : emb.Row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void SaveEmbeddings(const std::string& path, const EmbeddingMatrix& emb) {
  WriteFile(path, FormatEmbeddings(emb));
}

}  // namespace legit
