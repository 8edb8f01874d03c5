#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "qarank/corpus.h"
#include "qarank/text.h"
#include "test_util.h"

namespace qarank {
namespace {

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Who founded the City-of E?"),
            (std::vector<std::string>{"who", "founded", "the", "city", "of", "e"}));
  EXPECT_TRUE(tokenize("  ...  ").empty());
}

TEST(Tokenize, KeepsMultibyteCharactersInsideTokens) {
  EXPECT_EQ(tokenize("Zürich 1291"), (std::vector<std::string>{"zürich", "1291"}));
}

TEST(Tokenize, OffsetsPointAtSourceBytes) {
  const std::string s = "Hello, World!";
  auto t = tokenize_with_offsets(s);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(s.substr(t[1].begin, t[1].end - t[1].begin), "World");
  EXPECT_EQ(t[1].text, "world");
}

TEST(Hashing, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hashing, EachUnigramFollowedByItsBigram) {
  auto b = hashed_ngrams({"a", "b", "c"}, 1000);
  ASSERT_EQ(b.size(), 5u);
  for (auto x : b) EXPECT_LT(x, 1000u);
  EXPECT_EQ(b[0], fnv1a64("a") % 1000);
  EXPECT_EQ(b[1], fnv1a64("a b") % 1000);
  EXPECT_EQ(b[3], fnv1a64("b c") % 1000);
  EXPECT_EQ(b[4], fnv1a64("c") % 1000);
  EXPECT_TRUE(hashed_ngrams({}, 10).empty());
}

TEST(Paragraphs, SplitOnBlankLinesAndDropEmpty) {
  Document d{"d1", "T", "first line\nstill first\n\n  \n\nsecond\n\n"};
  auto p = split_paragraphs(d);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].para_id, 0);
  EXPECT_EQ(p[0].text, "first line\nstill first");
  EXPECT_EQ(p[1].para_id, 1);
  EXPECT_EQ(p[1].text, "second");
  EXPECT_EQ(p[1].doc_id, "d1");
}

TEST(CorpusValidation, RejectsBadCorpora) {
  EXPECT_THROW(validate_corpus({}), Error);
  EXPECT_THROW(validate_corpus({{"", "t", "b"}}), Error);
  EXPECT_THROW(validate_corpus({{"a", "", ""}}), Error);
  try {
    validate_corpus({{"a", "t", "b"}, {"a", "t2", "b2"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate doc_id: a"), std::string::npos);
  }
}

TEST(CorpusIo, RoundTripAndLookup) {
  test::TempDir dir;
  std::vector<Document> docs = {{"a", "Alpha", "one\n\ntwo"}, {"b", "", "three"}};
  save_corpus(docs, dir.file("c.jsonl"));
  auto back = load_corpus(dir.file("c.jsonl"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].body, "one\n\ntwo");
  Corpus c(back);
  EXPECT_EQ(c.paragraphs("a").size(), 2u);
  EXPECT_EQ(c.paragraph("a", 1)->text, "two");
  EXPECT_EQ(c.paragraph("a", 2), nullptr);
  EXPECT_EQ(c.paragraph("zz", 0), nullptr);
  EXPECT_EQ(c.find("b")->body, "three");
}

TEST(CorpusIo, MalformedLineReportsLineNumber) {
  test::TempDir dir;
  test::write_file(dir.file("bad.jsonl"),
                   "{\"doc_id\":\"a\",\"title\":\"t\",\"body\":\"b\"}\n{not json}\n");
  try {
    load_corpus(dir.file("bad.jsonl"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_corpus(dir.file("missing.jsonl")), Error);
}

}  // namespace
}  // namespace qarank
