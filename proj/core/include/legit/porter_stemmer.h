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

#ifndef LEGIT_PORTER_STEMMER_H_
#define LEGIT_PORTER_STEMMER_H_

#include <string>
#include <string_view>

namespace legit {

// Porter (1980) suffix stripper, following the reference ANSI C release.
// Words that are not entirely lowercase ASCII letters, and words of two
// letters or fewer, are returned unchanged.
std::string PorterStem(std::string_view word);

}  // namespace legit

#endif  // LEGIT_PORTER_STEMMER_H_
