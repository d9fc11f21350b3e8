#include "asag/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "asag/errors.hpp"
#include "asag/utf8.hpp"

namespace asag {

namespace {

using CodeSeq = std::vector<char32_t>;

struct MatchBlock {
  std::size_t a_begin;
  std::size_t b_begin;
  std::size_t length;
};

// Longest matching block in a[alo,ahi) x b[blo,bhi); ties prefer the earliest
// start in a, then the earliest start in b.
MatchBlock longest_match(const CodeSeq& a, const CodeSeq& b, std::size_t alo, std::size_t ahi,
                         std::size_t blo, std::size_t bhi) {
  MatchBlock best{alo, blo, 0};
  std::vector<std::size_t> lengths(bhi - blo, 0);      // match lengths ending at previous i
  std::vector<std::size_t> new_lengths(bhi - blo, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    std::fill(new_lengths.begin(), new_lengths.end(), 0);
    for (std::size_t j = blo; j < bhi; ++j) {
      if (a[i] != b[j]) continue;
      const std::size_t k = (j > blo ? lengths[j - blo - 1] : 0) + 1;
      new_lengths[j - blo] = k;
      if (k > best.length) {
        best = {i - k + 1, j - k + 1, k};
      }
    }
    lengths.swap(new_lengths);
  }
  return best;
}

std::size_t matched_total(const CodeSeq& a, const CodeSeq& b, std::size_t alo, std::size_t ahi,
                          std::size_t blo, std::size_t bhi) {
  const MatchBlock m = longest_match(a, b, alo, ahi, blo, bhi);
  if (m.length == 0) return 0;
  return m.length + matched_total(a, b, alo, m.a_begin, blo, m.b_begin) +
         matched_total(a, b, m.a_begin + m.length, ahi, m.b_begin + m.length, bhi);
}

// Cheap ratio upper bound from length difference alone.
double length_bound(std::size_t la, std::size_t lb) {
  if (la + lb == 0) return 1.0;
  return 2.0 * static_cast<double>(std::min(la, lb)) / static_cast<double>(la + lb);
}

// Tighter upper bound: matched characters cannot exceed the multiset overlap.
double multiset_bound(const CodeSeq& a, const CodeSeq& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::map<char32_t, std::size_t> counts;
  for (char32_t c : a) ++counts[c];
  std::size_t overlap = 0;
  for (char32_t c : b) {
    auto it = counts.find(c);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(a.size() + b.size());
}

std::string map_token(const std::map<std::string, std::string>& m, const std::string& token) {
  const auto it = m.find(token);
  return it == m.end() ? token : it->second;
}

std::string trimmed_line(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace

void LexiconSet::validate() const {
  for (const auto* m : {&slang_map, &lemma_map}) {
    for (const auto& [k, v] : *m) {
      if (k.empty() || v.empty()) throw DataError("lexicon map has empty key or value");
    }
  }
  for (const auto& w : stopwords) {
    if (w.empty()) throw DataError("empty stopword");
    if (w != utf8::ascii_lower(w)) throw DataError("stopword not lowercase: " + w);
  }
  for (const auto& w : reference_vocab) {
    if (w.empty()) throw DataError("empty vocabulary word");
  }
}

void PrepConfig::validate() const {
  if (!(typo_cutoff > 0.0 && typo_cutoff <= 1.0))
    throw DataError("typo_cutoff must lie in (0, 1]");
}

TokenList tokenize(const std::string& text) {
  const CodeSeq codepoints = utf8::decode(utf8::ascii_lower(text));
  TokenList tokens;
  std::size_t i = 0;
  const std::size_t n = codepoints.size();
  while (i < n) {
    while (i < n && utf8::is_ascii_space(codepoints[i])) ++i;
    std::size_t j = i;
    while (j < n && !utf8::is_ascii_space(codepoints[j])) ++j;
    if (j > i) {
      std::size_t b = i, e = j;
      while (b < e && !utf8::is_word_char(codepoints[b])) ++b;
      while (e > b && !utf8::is_word_char(codepoints[e - 1])) --e;
      if (e > b) tokens.push_back(utf8::encode(CodeSeq(codepoints.begin() + b, codepoints.begin() + e)));
    }
    i = j;
  }
  return tokens;
}

double similarity(const std::string& query, const std::string& candidate) {
  const CodeSeq a = utf8::decode(query);
  const CodeSeq b = utf8::decode(candidate);
  if (a.empty() && b.empty()) return 1.0;
  const std::size_t m = matched_total(a, b, 0, a.size(), 0, b.size());
  return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

TokenList correct_typos(const TokenList& tokens, const LexiconSet& lex, double cutoff) {
  if (lex.reference_vocab.empty())
    throw DataError("typo correction requires a nonempty reference vocabulary");
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw DataError("typo cutoff must lie in (0, 1]");

  TokenList out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (lex.reference_vocab.count(token)) {
      out.push_back(token);
      continue;
    }
    const CodeSeq query = utf8::decode(token);
    std::string best_word;
    double best_ratio = -1.0;
    // std::set iterates lexicographically, so a strict improvement rule keeps
    // the lexicographically smallest word among ties.
    for (const auto& word : lex.reference_vocab) {
      const CodeSeq cand = utf8::decode(word);
      const double needed = std::max(cutoff, best_ratio);
      if (length_bound(query.size(), cand.size()) < needed) continue;
      if (multiset_bound(query, cand) < needed) continue;
      const std::size_t m = matched_total(query, cand, 0, query.size(), 0, cand.size());
      const double ratio = query.empty() && cand.empty()
                               ? 1.0
                               : 2.0 * static_cast<double>(m) /
                                     static_cast<double>(query.size() + cand.size());
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best_word = word;
      }
    }
    if (best_ratio >= cutoff) out.push_back(best_word);
    else out.push_back(token);
  }
  return out;
}

TokenList normalize_slang(const TokenList& tokens, const LexiconSet& lex) {
  if (lex.slang_map.empty()) throw DataError("slang normalization requires a nonempty map");
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(map_token(lex.slang_map, t));
  return out;
}

TokenList lemmatize(const TokenList& tokens, const LexiconSet& lex) {
  if (lex.lemma_map.empty()) throw DataError("lemmatization requires a nonempty map");
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(map_token(lex.lemma_map, t));
  return out;
}

TokenList remove_stopwords(const TokenList& tokens, const LexiconSet& lex) {
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!lex.stopwords.count(t)) out.push_back(t);
  }
  return out;
}

TokenList preprocess(const std::string& text, const LexiconSet& lex, const PrepConfig& config) {
  config.validate();
  TokenList tokens = tokenize(text);
  if (config.use_slang_norm) tokens = normalize_slang(tokens, lex);
  if (config.use_typo_correction) tokens = correct_typos(tokens, lex, config.typo_cutoff);
  if (config.use_lemmatize) tokens = lemmatize(tokens, lex);
  if (config.use_stopword_removal) tokens = remove_stopwords(tokens, lex);
  return tokens;
}

std::map<std::string, std::string> load_word_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trimmed_line(line);
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected TAB separator");
    const std::string key = utf8::ascii_lower(trimmed_line(line.substr(0, tab)));
    const std::string value = utf8::ascii_lower(trimmed_line(line.substr(tab + 1)));
    if (key.empty() || value.empty())
      throw DataError(path + ": line " + std::to_string(line_no) + ": empty key or value");
    out[key] = value;
  }
  return out;
}

std::set<std::string> load_word_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon file: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trimmed_line(line);
    if (line.empty() || line[0] == '#') continue;
    out.insert(utf8::ascii_lower(line));
  }
  return out;
}

}  // namespace asag
