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

#ifndef LEGIT_SIMILARITY_INDEX_H_
#define LEGIT_SIMILARITY_INDEX_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "legit/glyph_atlas.h"

namespace legit {

// One embedding row per CodepointSet member, in set order. Rows are stored
// as 32-bit floats; all arithmetic on them accumulates in double.
struct EmbeddingMatrix {
  std::string model_id;
  size_t dim = 0;
  std::vector<char32_t> codepoints;
  std::vector<float> values;

  size_t rows() const { return codepoints.size(); }
  std::span<const float> Row(size_t i) const {
    return {values.data() + i * dim, dim};
  }
  // Shape checks plus "no zero rows". Throws DimensionMismatch/ZeroVector.
  void Validate() const;
  bool operator==(const EmbeddingMatrix&) const = default;
};

// Flattened, binarized bitmap (1 = ink). Throws ZeroVector on a blank glyph.
std::vector<float> ImgDotEmbed(const GlyphBitmap& bitmap);

// 1 - dot / (|u| |v|), clamped to [0, 2]. Inputs are squared norms.
double CosineFromDot(double dot, double norm_sq_u, double norm_sq_v);

// Throws DimensionMismatch or ZeroVector.
double CosineDistance(std::span<const float> u, std::span<const float> v);

// Distance between two characters under some embedding model.
class CharDistance {
 public:
  virtual ~CharDistance() = default;
  virtual std::string_view model_id() const = 0;
  // Identical codepoints are at distance 0 regardless of embedding.
  virtual double Distance(char32_t a, char32_t b) const = 0;
  virtual bool Covers(char32_t cp) const = 0;
};

// A glyph in compressed ImgDot form. The canvas is split into rectangles
// on which every scaled glyph is constant; `bits` marks inked rectangles,
// grouped by rectangle area so that dot products reduce to popcounts.
struct BinaryGlyph {
  std::vector<uint64_t> bits;
  uint64_t ink = 0;  // number of inked canvas pixels
};

class GlyphLattice {
 public:
  explicit GlyphLattice(const FontConfig& config);

  BinaryGlyph Encode(const HexGlyph& glyph) const;
  // Equals the integer dot product of the two full-canvas ImgDot vectors.
  uint64_t Dot(const BinaryGlyph& a, const BinaryGlyph& b) const;

  size_t cell_count() const { return cells_.size(); }

 private:
  struct Cell {
    int x_begin, x_end, y_begin, y_end;
    uint64_t area;
  };
  struct Group {
    uint64_t area;
    size_t word_begin, word_count;
  };
  FontConfig config_;
  std::vector<Cell> cells_;  // sorted by area, then position
  std::vector<Group> groups_;
  size_t words_ = 0;
};

// ImgDot distances for any glyph in the atlas font.
class ImgDotSpace : public CharDistance {
 public:
  explicit ImgDotSpace(const GlyphAtlas& atlas);

  std::string_view model_id() const override { return "imgdot"; }
  double Distance(char32_t a, char32_t b) const override;
  bool Covers(char32_t cp) const override { return glyphs_.count(cp) > 0; }

  const BinaryGlyph& Glyph(char32_t cp) const;  // throws UnknownCodepoint
  const GlyphLattice& lattice() const { return lattice_; }

 private:
  GlyphLattice lattice_;
  std::unordered_map<char32_t, BinaryGlyph> glyphs_;
};

// Distances over an ingested embedding matrix.
class EmbeddingSpace : public CharDistance {
 public:
  explicit EmbeddingSpace(EmbeddingMatrix matrix);

  std::string_view model_id() const override { return matrix_.model_id; }
  // Throws MissingCodepoints when either side has no row.
  double Distance(char32_t a, char32_t b) const override;
  bool Covers(char32_t cp) const override { return rows_.count(cp) > 0; }
  const EmbeddingMatrix& matrix() const { return matrix_; }

 private:
  EmbeddingMatrix matrix_;
  std::vector<double> norm_sq_;
  std::unordered_map<char32_t, size_t> rows_;
};

struct Neighbor {
  char32_t codepoint = 0;
  double distance = 0.0;
  bool operator==(const Neighbor&) const = default;
};

// Per-codepoint candidate lists sorted by (distance, codepoint), self
// excluded. Immutable once built.
class NeighborTable {
 public:
  NeighborTable() = default;
  NeighborTable(std::string model_id, CodepointSet set,
                std::vector<std::vector<Neighbor>> lists);

  const std::string& model_id() const { return model_id_; }
  const CodepointSet& codepoints() const { return set_; }
  bool Contains(char32_t cp) const { return set_.Contains(cp); }

  // Throws UnknownCodepoint.
  std::span<const Neighbor> Neighbors(char32_t cp) const;
  // k is 1-based; ranks past the end clamp to the last entry.
  const Neighbor& Kth(char32_t cp, int k) const;
  char32_t KthNeighbor(char32_t cp, int k) const { return Kth(cp, k).codepoint; }

  // One JSON object per line: {"cp":"U+XXXX","nbrs":[["U+YYYY",d],...]}.
  std::string ToJsonl() const;
  static NeighborTable FromJsonl(std::string_view text, std::string model_id);
  void Save(const std::string& path) const;
  static NeighborTable Load(const std::string& path, std::string model_id);

  bool operator==(const NeighborTable&) const = default;

 private:
  std::string model_id_;
  CodepointSet set_;
  std::vector<std::vector<Neighbor>> lists_;
};

struct IndexOptions {
  size_t top = 100;  // 0 keeps every other member
  unsigned threads = 0;  // 0 = hardware concurrency
  // Query rows to build; empty builds every member. Candidates always
  // range over the whole set, so a row subset gives full-quality lists.
  std::vector<char32_t> rows;
};

// Pairwise distance oracle over an indexed set of codepoints.
class DistanceKernel {
 public:
  virtual ~DistanceKernel() = default;
  virtual const CodepointSet& codepoints() const = 0;
  virtual double Distance(size_t i, size_t j) const = 0;
};

NeighborTable BuildNeighborTable(const DistanceKernel& kernel,
                                 std::string model_id,
                                 const IndexOptions& options = {});

// Rows of `emb` must align with `set`.
NeighborTable BuildNeighborTable(const EmbeddingMatrix& emb,
                                 const CodepointSet& set,
                                 const IndexOptions& options = {});

NeighborTable BuildImgDotTable(const GlyphAtlas& atlas, const CodepointSet& set,
                               const IndexOptions& options = {});

// Full-canvas ImgDot rows. Memory is |set| * canvas_w * canvas_h floats, so
// this is meant for small sets and for cross-checking the compressed path.
EmbeddingMatrix ImgDotEmbeddings(const GlyphAtlas& atlas,
                                 const CodepointSet& set);

// Text format: "model_id dim count" then "U+XXXX v1 ... vdim" per line.
EmbeddingMatrix ParseEmbeddings(std::string_view text, const CodepointSet& set);
EmbeddingMatrix LoadEmbeddings(const std::string& path, const CodepointSet& set);
std::string FormatEmbeddings(const EmbeddingMatrix& emb);
void SaveEmbeddings(const std::string& path, const EmbeddingMatrix& emb);

}  // namespace legit

#endif  // LEGIT_SIMILARITY_INDEX_H_
