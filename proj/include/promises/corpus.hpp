#pragma once

// Document ingestion: directory-tree corpora of annual filings, lexical
// markup stripping, and speaker segmentation of debate transcripts.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "promises/csv.hpp"
#include "promises/io.hpp"

namespace promises::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FilingDoc {
  std::string entity;
  int year = 0;
  std::string text;
  std::string source_file;  // relative to the corpus root
  std::size_t replaced_bytes = 0;
  std::size_t unterminated_tags = 0;
};

struct Corpus {
  std::vector<FilingDoc> docs;

  std::size_t size() const { return docs.size(); }
  bool empty() const { return docs.empty(); }
};

inline bool canonical_less(const FilingDoc& a, const FilingDoc& b) {
  return std::tie(a.entity, a.year) < std::tie(b.entity, b.year);
}

inline void sort_canonical(Corpus& corpus) {
  std::stable_sort(corpus.docs.begin(), corpus.docs.end(), canonical_less);
}

// Replaces every byte that is not part of a well-formed UTF-8 sequence with
// U+FFFD. Overlong forms and surrogates count as malformed.
inline std::string sanitize_utf8(std::string_view in, std::size_t* replaced = nullptr) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  std::size_t bad = 0;
  std::size_t i = 0;
  while (i < in.size()) {
    auto b0 = static_cast<unsigned char>(in[i]);
    if (b0 < 0x80) {
      out.push_back(static_cast<char>(b0));
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (b0 >= 0xC2 && b0 <= 0xDF) {
      len = 2;
      cp = b0 & 0x1F;
    } else if (b0 >= 0xE0 && b0 <= 0xEF) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xF0 && b0 <= 0xF4) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len != 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      auto b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (ok) {
      if ((len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) ||
          (len == 4 && (cp < 0x10000 || cp > 0x10FFFF))) {
        ok = false;
      }
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++bad;
      ++i;
    }
  }
  if (replaced) *replaced = bad;
  return out;
}

struct StripResult {
  std::string text;
  std::size_t unterminated_tags = 0;
};

namespace detail {

inline bool is_entity_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '#';
}

}  // namespace detail

// Removes `<...>` spans, then decodes the common named entities in what is
// left. Unknown entities become a single space. An unterminated `<` swallows
// the rest of the input and is counted in `unterminated_tags`. Running the two
// steps in that order means a tag cannot hide the inside of an entity, which
// keeps the function idempotent on input without entity-encoded `&`, `<`, `>`.
inline StripResult strip_markup_checked(std::string_view raw) {
  static constexpr std::size_t kMaxEntity = 32;
  static const std::pair<std::string_view, std::string_view> kEntities[] = {
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"nbsp", " "}, {"quot", "\""}, {"apos", "'"},
  };
  StripResult result;
  std::string untagged;
  untagged.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    if (raw[i] == '<') {
      auto close = raw.find('>', i + 1);
      if (close == std::string_view::npos) {
        ++result.unterminated_tags;
        break;
      }
      i = close + 1;
      continue;
    }
    untagged.push_back(raw[i++]);
  }

  result.text.reserve(untagged.size());
  for (std::size_t i = 0; i < untagged.size();) {
    if (untagged[i] == '&') {
      std::size_t j = i + 1;
      while (j < untagged.size() && j - i <= kMaxEntity && detail::is_entity_char(untagged[j])) ++j;
      if (j > i + 1 && j < untagged.size() && untagged[j] == ';') {
        std::string_view name = std::string_view(untagged).substr(i + 1, j - i - 1);
        std::string_view decoded = " ";
        for (const auto& [entity, text] : kEntities) {
          if (entity == name) {
            decoded = text;
            break;
          }
        }
        result.text.append(decoded);
        i = j + 1;
        continue;
      }
    }
    result.text.push_back(untagged[i++]);
  }
  return result;
}

inline std::string strip_markup(std::string_view raw) { return strip_markup_checked(raw).text; }

namespace detail {

inline std::string lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

inline bool parse_year(std::string_view stem, int& year) {
  if (stem.empty()) return false;
  auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), year);
  return ec == std::errc{} && ptr == stem.data() + stem.size();
}

}  // namespace detail

// Loads `<root>/<entity>/<year>.{txt,htm,html}`. Other files and dot-entries
// are ignored. HTML files pass through strip_markup; all text is UTF-8
// sanitized.
inline Corpus load_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw CorpusError("corpus root not found: " + root.string());
  }
  Corpus corpus;
  std::vector<fs::path> entity_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().front() != '.') {
      entity_dirs.push_back(entry.path());
    }
  }
  std::sort(entity_dirs.begin(), entity_dirs.end());
  for (const auto& dir : entity_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::string name = file.filename().string();
      if (name.front() == '.') continue;
      std::string ext = detail::lower_ascii(file.extension().string());
      bool html = ext == ".htm" || ext == ".html";
      if (!html && ext != ".txt") continue;
      std::string rel = fs::relative(file, root).generic_string();
      FilingDoc doc;
      doc.entity = dir.filename().string();
      if (!detail::parse_year(file.stem().string(), doc.year)) {
        throw CorpusError("non-integer year in file name: " + rel);
      }
      doc.source_file = rel;
      std::string raw = io::read_file(file);
      if (html) {
        auto stripped = strip_markup_checked(raw);
        doc.unterminated_tags = stripped.unterminated_tags;
        raw = std::move(stripped.text);
      }
      doc.text = sanitize_utf8(raw, &doc.replaced_bytes);
      corpus.docs.push_back(std::move(doc));
    }
  }
  sort_canonical(corpus);
  for (std::size_t i = 1; i < corpus.docs.size(); ++i) {
    const auto& a = corpus.docs[i - 1];
    const auto& b = corpus.docs[i];
    if (a.entity == b.entity && a.year == b.year) {
      throw CorpusError("duplicate document for (" + a.entity + ", " + std::to_string(a.year) +
                        "): " + a.source_file + " and " + b.source_file);
    }
  }
  return corpus;
}

inline std::size_t count_code_points(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

// Manifest CSV: entity,year,chars,source_file. `chars` counts code points of
// the ingested (stripped) text.
inline void write_manifest(std::ostream& out, const Corpus& corpus) {
  out << "entity,year,chars,source_file\n";
  for (const auto& doc : corpus.docs) {
    out << csv::join({doc.entity, std::to_string(doc.year),
                      std::to_string(count_code_points(doc.text)), doc.source_file})
        << '\n';
  }
}

namespace detail {

// Recognizes a line-initial speaker label: one to three uppercase words
// (letters, '.', '\'', '-') separated by single spaces and ending in ':'.
// Returns the label length including the colon, or 0.
inline std::size_t match_label(std::string_view line, std::string& speaker) {
  std::size_t i = 0;
  int words = 0;
  while (true) {
    if (i >= line.size() || !(line[i] >= 'A' && line[i] <= 'Z')) return 0;
    std::size_t start = i;
    while (i < line.size() && ((line[i] >= 'A' && line[i] <= 'Z') || line[i] == '.' ||
                               line[i] == '\'' || line[i] == '-')) {
      ++i;
    }
    if (i == start) return 0;
    ++words;
    if (i < line.size() && line[i] == ':') {
      speaker = std::string(line.substr(0, i));
      return i + 1;
    }
    if (words == 3 || i >= line.size() || line[i] != ' ') return 0;
    ++i;
  }
}

}  // namespace detail

// Splits a transcript into per-speaker text. Turns by the same speaker are
// joined with '\n'; text before the first label goes under "" and is omitted
// when empty.
inline std::map<std::string, std::string> segment_by_speaker(std::string_view transcript) {
  std::map<std::string, std::string> segments;
  std::string current;  // speaker of the open turn
  std::string turn;
  bool has_turn = false;  // false only for the preamble
  auto flush = [&] {
    while (!turn.empty() && (turn.back() == '\n' || turn.back() == ' ' || turn.back() == '\t')) {
      turn.pop_back();
    }
    if (!has_turn && turn.empty()) return;
    auto [it, inserted] = segments.try_emplace(current, turn);
    if (!inserted) {
      it->second.push_back('\n');
      it->second += turn;
    }
  };
  std::size_t pos = 0;
  bool first_line = true;
  while (pos <= transcript.size()) {
    auto nl = transcript.find('\n', pos);
    std::string_view line =
        transcript.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string speaker;
    std::size_t label = detail::match_label(line, speaker);
    if (label) {
      flush();
      current = std::move(speaker);
      has_turn = true;
      std::size_t body = label;
      while (body < line.size() && (line[body] == ' ' || line[body] == '\t')) ++body;
      turn.assign(line.substr(body));
    } else {
      if (!first_line) turn.push_back('\n');
      turn.append(line);
    }
    first_line = false;
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return segments;
}

}  // namespace promises::corpus
