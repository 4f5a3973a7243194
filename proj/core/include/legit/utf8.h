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

#ifndef LEGIT_UTF8_H_
#define LEGIT_UTF8_H_

#include <string>
#include <string_view>

namespace legit {

// Decodes UTF-8 into Unicode scalar values. Throws FormatError on
// malformed input (overlongs, surrogates and truncated sequences included).
std::u32string DecodeUtf8(std::string_view text);

std::string EncodeUtf8(std::u32string_view text);
std::string EncodeUtf8(char32_t cp);

// "U+0041" style names used by the embedding and neighbor-table files.
std::string FormatCodepoint(char32_t cp);
char32_t ParseCodepoint(std::string_view text);

bool IsAsciiLetter(char32_t cp);
char32_t AsciiLower(char32_t cp);
// Lowercases ASCII letters only; other bytes are copied.
std::string AsciiLower(std::string_view text);

}  // namespace legit

#endif  // LEGIT_UTF8_H_
