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

#include <gtest/gtest.h>

#include "stereo/regex_dialect.hpp"

namespace stereo {
namespace {

TEST(RegexDialect, TranslatesNamedGroupsAndBackrefs) {
  EXPECT_EQ(translate_named_groups(R"((?P<pval>\d+))"), R"((?<pval>\d+))");
  EXPECT_EQ(translate_named_groups(R"((?P<a>x)(?P=a))"), R"((?<a>x)\k<a>)");
}

TEST(RegexDialect, LeavesEscapesAndClassesAlone) {
  EXPECT_EQ(translate_named_groups(R"(\(?P<x>)"), R"(\(?P<x>)");
  EXPECT_EQ(translate_named_groups(R"([(?P<]x)"), R"([(?P<]x)");
  EXPECT_EQ(translate_named_groups(R"([]](?P<n>1))"), R"([]](?<n>1))");
}

TEST(RegexDialect, NamedGroupsInOrder) {
  auto names = named_groups(R"((?P<ttest>t\((?P<doF>\d+)\)) (?<pval>\d))");
  EXPECT_EQ(names, (std::vector<std::string>{"ttest", "doF", "pval"}));
  EXPECT_TRUE(named_groups(R"((?<=a)(?<!b)\d)").empty());
}

TEST(RegexDialect, CompilesPersistedPythonStyleRule) {
  boost::regex re;
  RegexDiagnostic diag;
  ASSERT_TRUE(compile_pattern(R"((?P<ttest>\(t\s?\(\d+\)\s?=\s?-?\d+\.\d+))", re, diag)) << diag.message;
  boost::smatch m;
  std::string s = "x (t(29) = -1.85, p";
  ASSERT_TRUE(boost::regex_search(s, m, re));
  EXPECT_EQ(m["ttest"].str(), "(t(29) = -1.85");
}

TEST(RegexDialect, DiagnosticPositionRefersToSource) {
  boost::regex re;
  RegexDiagnostic diag;
  EXPECT_FALSE(compile_pattern("(", re, diag));
  EXPECT_FALSE(diag.message.empty());
  EXPECT_GE(diag.position, 0);
  EXPECT_LE(diag.position, 1);

  // The error sits after a translated group; the offset must still point
  // into the untranslated text.
  RegexDiagnostic d2;
  EXPECT_FALSE(compile_pattern(R"((?P<abc>x)[)", re, d2));
  EXPECT_GE(d2.position, 10);
}

}  // namespace
}  // namespace stereo
