#pragma once

#include <iosfwd>
#include <string>

#include "morphtag/schema.hpp"

namespace morphtag {

// Training mixture layout for the low-resource simulation: all HRL
// sentences plus the first tgt_size LRL sentences repeated upsample_factor
// times.
struct SplitConfig {
  int tgt_size = 100;
  int upsample_factor = 1;
  std::string hrl_language;
  std::string lrl_language;
};

// Parses CoNLL-U text into a Corpus. Every token keeps its surface form
// verbatim; UPOS becomes tag "POS" (label title-cased, ADJ -> Adj) and each
// FEATS Key=Value pair becomes a tag. Comment lines, multiword ranges
// (1-2) and empty nodes (3.1) are skipped. Malformed token lines raise
// with their line number; empty input yields an empty corpus.
Corpus parse_conllu(std::istream& in, const std::string& language_id);
Corpus parse_conllu(const std::string& text, const std::string& language_id);
Corpus parse_conllu_file(const std::string& path, const std::string& language_id);

// Writes sentences in CoNLL-U: predicted (or gold) POS in the UPOS column
// (upper-cased), remaining non-NULL tags in FEATS sorted by key. When
// assignments is non-null it must hold one TagAssignment list per sentence.
void write_conllu(std::ostream& out, const Corpus& corpus,
                  const std::vector<std::vector<TagAssignment>>* assignments,
                  const TagSchema* schema);

std::string to_conllu(const Corpus& corpus,
                      const std::vector<std::vector<TagAssignment>>* assignments = nullptr,
                      const TagSchema* schema = nullptr);

// Builds the cross-lingual training corpus. Selection is the first
// tgt_size LRL sentences in file order; throws when fewer are available.
Corpus make_training_mixture(const Corpus& hrl, const Corpus& lrl,
                             const SplitConfig& cfg);

// Seed-controlled alternative to first-K selection (CLI flag).
Corpus make_training_mixture_random(const Corpus& hrl, const Corpus& lrl,
                                    const SplitConfig& cfg, uint64_t seed);

}  // namespace morphtag
