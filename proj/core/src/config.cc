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

#include "legit/config.h"

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "legit/error.h"
#include "legit/glyph_atlas.h"
#include "legit/image_io.h"

namespace legit {
namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void Bad(size_t line, const std::string& what) {
  throw Error(ErrorCode::kFormatError, "config line " + std::to_string(line) + ": " + what);
}

// Strips a trailing comment outside quotes and unquotes the value.
std::string ParseValue(std::string_view raw, size_t line) {
  raw = Trim(raw);
  if (!raw.empty() && raw[0] == '"') {
    std::string out;
    size_t i = 1;
    for (; i < raw.size() && raw[i] != '"'; ++i) {
      if (raw[i] == '\\' && i + 1 < raw.size()) {
        const char c = raw[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += raw[i];
      }
    }
    if (i >= raw.size()) Bad(line, "unterminated string");
    const auto rest = Trim(raw.substr(i + 1));
    if (!rest.empty() && rest[0] != '#') Bad(line, "text after string value");
    return out;
  }
  if (!raw.empty() && raw[0] == '\'') {  // literal string, no escapes
    const size_t close = raw.find('\'', 1);
    if (close == std::string_view::npos) Bad(line, "unterminated string");
    const auto rest = Trim(raw.substr(close + 1));
    if (!rest.empty() && rest[0] != '#') Bad(line, "text after string value");
    return std::string(raw.substr(1, close - 1));
  }
  if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
  raw = Trim(raw);
  if (raw.empty()) Bad(line, "missing value");
  if (raw[0] == '[' || raw[0] == '{') Bad(line, "arrays and tables are not supported");
  return std::string(raw);
}

bool ValidKey(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      return false;
    }
  }
  return true;
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::kInvalidArgument, "config '" + key + "': cannot parse '" + v + "'");
  }
  return out;
}

}  // namespace

Config Config::Parse(std::string_view text) {
  Config c;
  std::string section;
  size_t start = 0, line_no = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = Trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) Bad(line_no, "unterminated section header");
      section = std::string(Trim(line.substr(1, close - 1)));
      if (!ValidKey(section)) Bad(line_no, "bad section name");
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) Bad(line_no, "expected key = value");
      const std::string key(Trim(line.substr(0, eq)));
      if (!ValidKey(key)) Bad(line_no, "bad key '" + key + "'");
      c.values_[section.empty() ? key : section + "." + key] =
          ParseValue(line.substr(eq + 1), line_no);
    }
    if (end == text.size()) break;
  }
  return c;
}

Config Config::Load(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("LEGIT_CONFIG"); env != nullptr) p = env;
  }
  if (p.empty()) return Config();
  return Parse(ReadFile(p));
}

Config Config::Defaults() {
  Config c;
  c.values_ = {
      {"seed", "0"},
      {"threads", "0"},
      {"font.file", LEGIT_DEFAULT_FONT},
      {"font.glyph_px", "144"},
      {"font.canvas_w", "224"},
      {"font.canvas_h", "224"},
      {"codepoints.first", "U+0000"},
      {"codepoints.last", "U+2FFF"},
      {"index.top", "100"},
      {"paths.table", ""},
      {"paths.embeddings", ""},
      {"paths.model", ""},
      {"paths.data", ""},
      {"perturb.mu_k", "25"},
      {"perturb.var_k", "10"},
      {"perturb.mu_n", "0.5"},
      {"perturb.var_n", "0.2"},
      {"train.kind", "mlp"},
      {"train.hidden", "16"},
      {"train.dropout", "0.1"},
      {"train.learning_rate", "0.01"},
      {"train.batch_size", "32"},
      {"train.max_epochs", "50"},
      {"train.patience", "5"},
      {"train.weight_decay", "0.0001"},
      {"attack.threshold", "0"},
      {"attack.max_resamples", "10"},
      {"attack.mu_k", "15"},
      {"attack.var_k", "7"},
      {"attack.max_k", "30"},
      {"serve.host", "127.0.0.1"},
      {"serve.port", "8080"},
      {"serve.admin_token", ""},
      {"serve.log", "annotation-events.jsonl"},
      {"serve.vocab", ""},
      {"serve.gold", ""},
      {"serve.gold_rate", "0.05"},
      {"serve.min_gold_attempts", "10"},
      {"serve.min_gold_accuracy", "0.7"},
      {"serve.batch_size", "20"},
      {"serve.words_per_round", "0"},
  };
  return c;
}

void Config::Merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string Config::GetString(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kInvalidArgument, "missing config key '" + key + "'");
  return it->second;
}

int64_t Config::GetInt(const std::string& key) const {
  return ParseNumber<int64_t>(key, GetString(key));
}

uint64_t Config::GetUint(const std::string& key) const {
  return ParseNumber<uint64_t>(key, GetString(key));
}

double Config::GetDouble(const std::string& key) const {
  const std::string v = GetString(key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw Error(ErrorCode::kInvalidArgument, "config '" + key + "': cannot parse '" + v + "'");
  }
  return d;
}

bool Config::GetBool(const std::string& key) const {
  const std::string v = GetString(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::kInvalidArgument, "config '" + key + "': expected a boolean");
}

std::vector<std::string> Config::UnknownKeys() const {
  const Config d = Defaults();
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!d.Has(k)) out.push_back(k);
  }
  return out;
}

std::string Config::ToString() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k + " = \"";
    for (char c : v) {
      if (c == '"' || c == '\\') out += '\\';
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out += c;
    }
    out += "\"\n";
  }
  return out;
}

}  // namespace legit
