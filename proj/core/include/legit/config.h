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

#ifndef LEGIT_CONFIG_H_
#define LEGIT_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace legit {

// Flat key/value configuration read from a TOML-style file:
//
//   # comment
//   seed = 7
//   [font]
//   file = "assets/fonts/unifont.hex"   -> key "font.file"
//
// Values are bare words, numbers, booleans or double-quoted strings.
// Arrays and inline tables are not supported.
class Config {
 public:
  // Throws FormatError with the line number.
  static Config Parse(std::string_view text);
  // Reads `path`; an empty path falls back to $LEGIT_CONFIG, and no path
  // at all gives the defaults.
  static Config Load(const std::string& path = "");
  // Built-in defaults for every known key.
  static Config Defaults();

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  void Set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  // Later values win.
  void Merge(const Config& other);

  // Typed access; throws InvalidArgument for a missing key or a value that
  // does not parse.
  std::string GetString(const std::string& key) const;
  int64_t GetInt(const std::string& key) const;
  uint64_t GetUint(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  bool GetBool(const std::string& key) const;

  // Keys not in Defaults().
  std::vector<std::string> UnknownKeys() const;
  // Sorted "key = value" lines, parseable by Parse.
  std::string ToString() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace legit

#endif  // LEGIT_CONFIG_H_
