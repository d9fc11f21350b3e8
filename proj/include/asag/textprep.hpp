#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace asag {

// Ordered lowercase tokens; never empty strings, never embedded whitespace.
using TokenList = std::vector<std::string>;

struct LexiconSet {
  std::map<std::string, std::string> slang_map;  // colloquial form -> formal form
  std::map<std::string, std::string> lemma_map;  // surface form -> lemma
  std::set<std::string> stopwords;
  std::set<std::string> reference_vocab;  // typo-correction targets

  void validate() const;
};

struct PrepConfig {
  bool use_slang_norm = false;
  bool use_typo_correction = false;
  double typo_cutoff = 0.6;
  bool use_lemmatize = false;
  bool use_stopword_removal = false;

  void validate() const;
  bool operator==(const PrepConfig&) const = default;
};

// Lowercases, splits on whitespace, strips leading/trailing punctuation per
// token, drops tokens that become empty. Intra-word hyphens survive.
TokenList tokenize(const std::string& text);

// Ratcliff/Obershelp ratio 2*M/(|a|+|b|) over codepoints, where M sums the
// matched characters found by recursive longest-matching-block extraction.
// Argument order is (query, candidate); two empty strings compare as 1.0.
double similarity(const std::string& query, const std::string& candidate);

// Replaces each out-of-vocabulary token by the closest reference word when its
// similarity reaches the cutoff; ties pick the lexicographically smallest word.
TokenList correct_typos(const TokenList& tokens, const LexiconSet& lex, double cutoff);

TokenList normalize_slang(const TokenList& tokens, const LexiconSet& lex);
TokenList lemmatize(const TokenList& tokens, const LexiconSet& lex);
TokenList remove_stopwords(const TokenList& tokens, const LexiconSet& lex);

// Fixed stage order: tokenize, slang normalization, typo correction,
// lemmatization, stopword removal; each optional stage gated by its flag.
TokenList preprocess(const std::string& text, const LexiconSet& lex, const PrepConfig& config);

// Lexicon file loaders. Map files are TSV (surface<TAB>replacement); word-set
// files hold one word per line. Everything is lowercased on load.
std::map<std::string, std::string> load_word_map(const std::string& path);
std::set<std::string> load_word_set(const std::string& path);

}  // namespace asag
