#pragma once

// Future-tense marker counting: "will", "shall" and the bigram "going to".
//
// Tokens are maximal runs of ASCII letters with internal apostrophes (ASCII
// ' or U+2019), case-folded. Everything else, including hyphens, digits and
// non-ASCII bytes, separates tokens. Sentences end at '.', '!' or '?' when
// followed by whitespace or end of input; there is no abbreviation list.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "promises/corpus.hpp"
#include "promises/csv.hpp"

namespace promises::futuretense {

struct Sentence {
  std::vector<std::string> tokens;

  bool operator==(const Sentence&) const = default;
};

struct FutureCounts {
  std::uint64_t will = 0;
  std::uint64_t shall = 0;
  std::uint64_t going_to = 0;
  std::uint64_t future_sentences = 0;

  std::uint64_t total() const { return will + shall + going_to; }

  FutureCounts& operator+=(const FutureCounts& o) {
    will += o.will;
    shall += o.shall;
    going_to += o.going_to;
    future_sentences += o.future_sentences;
    return *this;
  }
  friend FutureCounts operator+(FutureCounts a, const FutureCounts& b) { return a += b; }
  bool operator==(const FutureCounts&) const = default;
};

namespace detail {

inline bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of an apostrophe at `i` (1 for ASCII, 3 for U+2019), else 0.
inline std::size_t apostrophe_at(std::string_view text, std::size_t i) {
  if (text[i] == '\'') return 1;
  if (text.compare(i, 3, "\xE2\x80\x99") == 0) return 3;
  return 0;
}

// Walks `text` sentence by sentence, calling `emit(tokens)` for every
// sentence with at least one token. The token buffer is reused.
template <typename Emit>
void for_each_sentence(std::string_view text, Emit&& emit) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (is_letter(c)) {
      std::string token;
      while (i < n) {
        if (is_letter(text[i])) {
          char l = text[i];
          token.push_back(l >= 'A' && l <= 'Z' ? static_cast<char>(l - 'A' + 'a') : l);
          ++i;
          continue;
        }
        std::size_t apos = apostrophe_at(text, i);
        if (apos && i + apos < n && is_letter(text[i + apos])) {
          token.push_back('\'');
          i += apos;
          continue;
        }
        break;
      }
      tokens.push_back(std::move(token));
      continue;
    }
    if (is_terminator(c) && (i + 1 == n || is_space(text[i + 1]))) {
      if (!tokens.empty()) {
        emit(static_cast<const std::vector<std::string>&>(tokens));
        tokens.clear();
      }
    }
    ++i;
  }
  if (!tokens.empty()) emit(static_cast<const std::vector<std::string>&>(tokens));
}

}  // namespace detail

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  detail::for_each_sentence(text, [&](const std::vector<std::string>& tokens) {
    out.insert(out.end(), tokens.begin(), tokens.end());
  });
  return out;
}

inline std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  detail::for_each_sentence(
      text, [&](const std::vector<std::string>& tokens) { out.push_back(Sentence{tokens}); });
  return out;
}

inline FutureCounts count_tokens(const std::vector<std::string>& tokens) {
  FutureCounts c;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& t = tokens[k];
    if (t == "will") {
      ++c.will;
    } else if (t == "shall") {
      ++c.shall;
    } else if (t == "going" && k + 1 < tokens.size() && tokens[k + 1] == "to") {
      ++c.going_to;
    }
  }
  return c;
}

inline FutureCounts count_future(std::string_view text) {
  FutureCounts total;
  detail::for_each_sentence(text, [&](const std::vector<std::string>& tokens) {
    FutureCounts s = count_tokens(tokens);
    if (s.total() > 0) s.future_sentences = 1;
    total += s;
  });
  return total;
}

struct CountRow {
  std::string entity;
  int year = 0;
  FutureCounts counts;

  bool operator==(const CountRow&) const = default;
};

// One row per document, in the corpus' canonical order.
inline std::vector<CountRow> aggregate_counts(const corpus::Corpus& corpus) {
  std::vector<CountRow> rows;
  rows.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    rows.push_back(CountRow{doc.entity, doc.year, count_future(doc.text)});
  }
  return rows;
}

inline FutureCounts grand_total(const std::vector<CountRow>& rows) {
  FutureCounts t;
  for (const auto& r : rows) t += r.counts;
  return t;
}

inline constexpr std::string_view kTotalEntity = "TOTAL";

// CSV: entity,year,will,shall,going_to,future_sentences. The optional grand
// total row has entity TOTAL and an empty year.
inline void write_counts_csv(std::ostream& out, const std::vector<CountRow>& rows,
                             bool with_total = false) {
  out << "entity,year,will,shall,going_to,future_sentences\n";
  auto line = [&](std::string entity, std::string year, const FutureCounts& c) {
    out << csv::join({std::move(entity), std::move(year), std::to_string(c.will),
                      std::to_string(c.shall), std::to_string(c.going_to),
                      std::to_string(c.future_sentences)})
        << '\n';
  };
  for (const auto& r : rows) line(r.entity, std::to_string(r.year), r.counts);
  if (with_total) line(std::string(kTotalEntity), "", grand_total(rows));
}

inline std::vector<CountRow> read_counts_csv(std::istream& in, const std::string& source) {
  auto table = csv::Table::read(in, source);
  const auto ce = table.column("entity"), cy = table.column("year"), cw = table.column("will"),
             cs = table.column("shall"), cg = table.column("going_to"),
             cf = table.column("future_sentences");
  std::vector<CountRow> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    if (rec[ce] == kTotalEntity && rec[cy].empty()) continue;
    auto where = table.where(i);
    auto count = [&](std::size_t col) {
      auto v = csv::to_int(rec[col], where);
      if (v < 0) throw csv::CsvError(where + ": negative count");
      return static_cast<std::uint64_t>(v);
    };
    rows.push_back(CountRow{rec[ce], static_cast<int>(csv::to_int(rec[cy], where)),
                            FutureCounts{count(cw), count(cs), count(cg), count(cf)}});
  }
  return rows;
}

}  // namespace promises::futuretense
