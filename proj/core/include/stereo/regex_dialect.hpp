// Copyright 2026 The STEREO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <boost/regex.hpp>

namespace stereo {

// Rules are persisted in the Python-style dialect, with named groups written
// `(?P<name>...)` and back-references `(?P=name)`. Boost.Regex understands the
// Perl spelling, so sources are rewritten before compiling. Escapes and
// character classes are left untouched.
std::string translate_named_groups(std::string_view source);

// Names of the named capture groups in a persisted pattern, in order of
// appearance. Both `(?P<name>` and `(?<name>` spellings are recognised.
std::vector<std::string> named_groups(std::string_view source);

struct RegexDiagnostic {
  std::string message;
  // Offset into the original (untranslated) source; -1 when unknown.
  long position = -1;
};

// Compiles a persisted pattern. On failure returns false and fills `diag`.
bool compile_pattern(std::string_view source, boost::regex& out, RegexDiagnostic& diag);

}  // namespace stereo
