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

#include "stereo/conllu.hpp"
#include "stereo/error.hpp"
#include "test_support.hpp"

namespace stereo::gbce {
namespace {

const char* kTree =
    "# doc_id = d7\n"
    "# sentence_index = 3\n"
    "# text = Older adults slept.\n"
    "1\tOlder\told\tADJ\tJJR\t_\t2\tamod\t_\t_\n"
    "2\tadults\tadult\tNOUN\tNNS\t_\t3\tnsubj\t_\t_\n"
    "3\tslept\tsleep\tVERB\tVBD\t_\t0\troot\t_\tSpaceAfter=No\n"
    "4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n"
    "\n";

TEST(Conllu, ParsesMetadataAndTree) {
  auto sents = parse_conllu(kTree);
  ASSERT_EQ(sents.size(), 1u);
  const auto& s = sents[0];
  EXPECT_EQ(s.doc_id, "d7");
  EXPECT_EQ(s.sentence_index, 3u);
  EXPECT_EQ(s.text, "Older adults slept.");
  EXPECT_EQ(s.root, 3u);
  EXPECT_EQ(s.token(2).lemma, "adult");
  EXPECT_EQ(s.children(3), (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(s.subtree(2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(s.render(1, 4), "Older adults slept.");
}

TEST(Conllu, SkipsMultiwordAndEmptyNodes) {
  std::string text =
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\tVBP\t_\t3\taux\t_\t_\n"
      "2\tn't\tnot\tPART\tRB\t_\t3\tadvmod\t_\t_\n"
      "2.1\tx\tx\tX\tX\t_\t_\t_\t_\t_\n"
      "3\tgo\tgo\tVERB\tVB\t_\t0\troot\t_\t_\n\n";
  auto s = parse_conllu(text);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].tokens.size(), 3u);
}

TEST(Conllu, RejectsNonTrees) {
  auto two_roots = "1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n2\tb\tb\tX\tX\t_\t0\troot\t_\t_\n\n";
  auto cycle = "1\ta\ta\tX\tX\t_\t2\tdep\t_\t_\n2\tb\tb\tX\tX\t_\t1\tdep\t_\t_\n3\tc\tc\tX\tX\t_\t0\troot\t_\t_\n\n";
  auto gap = "1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n3\tb\tb\tX\tX\t_\t1\tdep\t_\t_\n\n";
  auto range = "1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n2\tb\tb\tX\tX\t_\t9\tdep\t_\t_\n\n";
  auto columns = "1\ta\ta\tX\n\n";
  for (const char* bad : {two_roots, cycle, gap, range, columns}) EXPECT_THROW(parse_conllu(bad), ParseError) << bad;
}

TEST(Conllu, FixtureFileIndexesByReference) {
  auto index = index_by_sentence(load_conllu(testing::data_path("gbce_fixtures.conllu")));
  EXPECT_EQ(index.size(), 20u);
  ASSERT_TRUE(index.count({"gbce-10", 0}));
  EXPECT_EQ(index.at({"gbce-10", 0}).render(1, index.at({"gbce-10", 0}).tokens.size()),
            "Outcomes differed in groups A, B, and C");
  EXPECT_THROW(load_conllu(testing::data_path("missing.conllu")), Error);
}

}  // namespace
}  // namespace stereo::gbce
