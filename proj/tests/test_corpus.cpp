#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "promises/corpus.hpp"
#include "support/tempdir.hpp"

using namespace promises::corpus;

TEST(LoadCorpus, EmptyDirectoryYieldsNoDocs) {
  TempDir dir;
  EXPECT_TRUE(load_corpus(dir.path()).empty());
}

TEST(LoadCorpus, SingleFile) {
  TempDir dir;
  dir.write("AAA/1999.txt", "will");
  auto c = load_corpus(dir.path());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.docs[0].entity, "AAA");
  EXPECT_EQ(c.docs[0].year, 1999);
  EXPECT_EQ(c.docs[0].text, "will");
  EXPECT_EQ(c.docs[0].source_file, "AAA/1999.txt");
}

TEST(LoadCorpus, DuplicateKeyAcrossExtensions) {
  TempDir dir;
  dir.write("AAA/1999.txt", "a");
  dir.write("AAA/1999.htm", "<p>b</p>");
  try {
    load_corpus(dir.path());
    FAIL() << "expected duplicate error";
  } catch (const CorpusError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("duplicate"), std::string::npos);
    EXPECT_NE(msg.find("AAA/1999.htm"), std::string::npos);
    EXPECT_NE(msg.find("AAA/1999.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, MissingRoot) {
  TempDir dir;
  try {
    load_corpus(dir.path() / "nope");
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("corpus root not found"), std::string::npos);
  }
}

TEST(LoadCorpus, NonIntegerYearNamesFile) {
  TempDir dir;
  dir.write("AAA/19x9.txt", "a");
  try {
    load_corpus(dir.path());
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("AAA/19x9.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, CanonicalOrderAndHtmlStripping) {
  TempDir dir;
  dir.write("BBB/2001.txt", "b1");
  dir.write("AAA/2000.HTM", "<html><b>we will</b> &amp; more</html>");
  dir.write("AAA/1999.txt", "a0");
  dir.write("AAA/notes.md", "ignored");
  dir.write(".hidden/1999.txt", "ignored");
  auto c = load_corpus(dir.path());
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.docs[0].year, 1999);
  EXPECT_EQ(c.docs[1].text, "we will & more");
  EXPECT_EQ(c.docs[2].entity, "BBB");
}

TEST(LoadCorpus, InvalidUtf8IsReplacedAndCounted) {
  TempDir dir;
  dir.write("AAA/1999.txt", std::string("ok \xff\xfe will \xc3\xa9"));
  auto c = load_corpus(dir.path());
  EXPECT_EQ(c.docs[0].replaced_bytes, 2u);
  EXPECT_EQ(c.docs[0].text, "ok \xEF\xBF\xBD\xEF\xBF\xBD will \xc3\xa9");
}

TEST(LoadCorpus, DeterministicManifest) {
  TempDir dir;
  dir.write("AAA/1999.txt", "caf\xc3\xa9 will");
  dir.write("ZZZ/2003.html", "<p>x</p>");
  std::ostringstream a, b;
  write_manifest(a, load_corpus(dir.path()));
  write_manifest(b, load_corpus(dir.path()));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(),
            "entity,year,chars,source_file\n"
            "AAA,1999,9,AAA/1999.txt\n"
            "ZZZ,2003,1,ZZZ/2003.html\n");
}

TEST(SanitizeUtf8, RejectsOverlongAndSurrogates) {
  std::size_t n = 0;
  EXPECT_EQ(sanitize_utf8("\xc0\xaf", &n), "\xEF\xBF\xBD\xEF\xBF\xBD");
  EXPECT_EQ(n, 2u);
  EXPECT_EQ(sanitize_utf8("\xed\xa0\x80", &n), "\xEF\xBF\xBD\xEF\xBF\xBD\xEF\xBF\xBD");
  EXPECT_EQ(n, 3u);
  EXPECT_EQ(sanitize_utf8("\xf0\x9f\x98\x80", &n), "\xf0\x9f\x98\x80");
  EXPECT_EQ(n, 0u);
}

TEST(StripMarkup, Examples) {
  EXPECT_EQ(strip_markup("a <b>will</b> c"), "a will c");
  EXPECT_EQ(strip_markup("A &amp; B"), "A & B");
  EXPECT_EQ(strip_markup("plain text"), "plain text");
}

TEST(StripMarkup, EntityTable) {
  EXPECT_EQ(strip_markup("&lt;&gt;&quot;&apos;&nbsp;"), "<>\"' ");
  EXPECT_EQ(strip_markup("x&#8217;y&copy;z"), "x y z");
  EXPECT_EQ(strip_markup("AT&T and & alone"), "AT&T and & alone");
}

TEST(StripMarkup, UnterminatedTagDropsRest) {
  auto r = strip_markup_checked("keep <div class=");
  EXPECT_EQ(r.text, "keep ");
  EXPECT_EQ(r.unterminated_tags, 1u);
  EXPECT_EQ(strip_markup_checked("<a>x</a>").unterminated_tags, 0u);
}

// Random strings over an alphabet rich in markup characters. Entity-encoded
// angle brackets and ampersands are left out: decoding them manufactures new
// markup, which a second pass would strip.
TEST(StripMarkup, IdempotentProperty) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pieces = {"<", ">", "&", ";", "amp", "nbsp", "quot", "a", "b",
                                           " ", "will", "&quot;", "&nbsp;", "&x;", "<p>", "</p>",
                                           "&#160;", "\n", "=", "\""};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (int i = len(rng); i > 0; --i) s += pieces[pick(rng)];
    const std::string once = strip_markup(s);
    ASSERT_EQ(strip_markup(once), once) << "input: " << s;
    ASSERT_EQ(once.find('<'), std::string::npos) << "input: " << s;
  }
}

TEST(SegmentBySpeaker, Examples) {
  auto a = segment_by_speaker("BUSH: We will win.\nKERRY: We shall see.");
  EXPECT_EQ(a, (std::map<std::string, std::string>{{"BUSH", "We will win."},
                                                   {"KERRY", "We shall see."}}));
  auto b = segment_by_speaker("no labels here");
  EXPECT_EQ(b, (std::map<std::string, std::string>{{"", "no labels here"}}));
}

TEST(SegmentBySpeaker, ModeratorLabelRegression) {
  auto m = segment_by_speaker("MR. LEHRER: Welcome.\nBUSH: Thanks.");
  EXPECT_EQ(m, (std::map<std::string, std::string>{{"MR. LEHRER", "Welcome."},
                                                   {"BUSH", "Thanks."}}));
}

TEST(SegmentBySpeaker, RepeatedTurnsAndContinuationLines) {
  auto m = segment_by_speaker(
      "Transcript of the debate\r\n"
      "BUSH: First.\r\n"
      "Still Bush.\r\n"
      "KERRY: Reply.\n"
      "BUSH: Again.\n"
      "Not a label: lowercase words\n"
      "FOUR WORD LABEL HERE: stays in turn\n");
  EXPECT_EQ(m.at(""), "Transcript of the debate");
  EXPECT_EQ(m.at("BUSH"),
            "First.\nStill Bush.\nAgain.\nNot a label: lowercase words\n"
            "FOUR WORD LABEL HERE: stays in turn");
  EXPECT_EQ(m.at("KERRY"), "Reply.");
  EXPECT_EQ(m.size(), 3u);
}

namespace {

std::string non_space_sorted(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\n' && c != '\t' && c != '\r') out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// Every non-label, non-whitespace character of the transcript reappears in
// exactly one segment.
TEST(SegmentBySpeaker, RecoversAllNonLabelCharactersProperty) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> labels = {"BUSH", "KERRY", "MR. LEHRER", "MS. IFILL", "GORE"};
  const std::vector<std::string> words = {"we", "will", "Win", "the", "day.", "Shall", "x:", "A"};
  std::uniform_int_distribution<std::size_t> pick_label(0, labels.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_word(0, words.size() - 1);
  std::uniform_int_distribution<int> lines(0, 12), nwords(0, 6), coin(0, 2);
  for (int trial = 0; trial < 500; ++trial) {
    std::string transcript, expected;
    for (int l = lines(rng); l > 0; --l) {
      if (coin(rng) == 0) transcript += labels[pick_label(rng)] + ": ";
      for (int w = nwords(rng); w > 0; --w) {
        std::string word = words[pick_word(rng)];
        transcript += word + " ";
        expected += word;
      }
      transcript += "\n";
    }
    std::string got;
    for (const auto& [speaker, text] : segment_by_speaker(transcript)) got += text;
    ASSERT_EQ(non_space_sorted(got), non_space_sorted(expected)) << transcript;
  }
}
