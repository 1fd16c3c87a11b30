#pragma once

#include <string>
#include <vector>

#include "morphtag/bp.hpp"
#include "morphtag/schema.hpp"

namespace morphtag {

// MBR decoding under Hamming loss over tags: per variable the label with
// maximal belief, ties broken toward the lowest label index (NULL first).
std::vector<TagAssignment> mbr_decode(const BeliefState& beliefs,
                                      const TagSchema& schema);

// Fraction of tokens whose full M-vector exactly matches gold (NULLs
// included). Throws on shape mismatch or when there are no tokens.
double token_accuracy(const std::vector<std::vector<TagAssignment>>& pred,
                      const std::vector<std::vector<TagAssignment>>& gold);

struct TypeScore {
  std::string name;
  long long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool in_gold = false;  // tag type occurs non-NULL in gold
};

struct F1Result {
  double macro = 0.0;  // unweighted mean over tag types occurring in gold
  double micro = 0.0;  // pooled TP/FP/FN
  std::vector<TypeScore> per_type;
};

// Tag-by-tag partial credit: per type, TP = pred = gold != NULL,
// FP = pred != NULL and pred != gold, FN = gold != NULL and pred != gold;
// 0/0 ratios are 0. Gold entries may hold kUnknownLabel.
F1Result f1_scores(const std::vector<std::vector<TagAssignment>>& pred,
                   const std::vector<std::vector<TagAssignment>>& gold,
                   const TagSchema& schema);

// Sentinel for a gold label outside the schema's domain: never equal to any
// prediction, non-NULL for the F1 counts.
inline constexpr int kUnknownLabel = -2;

// Lenient gold mapping for evaluation (training uses complete_assignment,
// which throws instead). Unknown labels of known tag types become
// kUnknownLabel; an unknown tag type sets out_of_schema, which vetoes
// exact-match credit but leaves the per-type F1 counts untouched.
struct GoldToken {
  TagAssignment labels;
  bool out_of_schema = false;
};

GoldToken gold_for_eval(const PartialAnnotation& partial,
                        const TagSchema& schema);

struct EvalReport {
  double token_accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  std::vector<TypeScore> per_type;
  size_t num_tokens = 0;
  size_t num_sentences = 0;
};

// Schema indices rendered back to (tag, label) pairs; NULL entries omitted.
std::vector<PartialAnnotation> to_annotations(
    const std::vector<TagAssignment>& assignment, const TagSchema& schema);

// Corpus-level evaluation comparing surface annotations, so gold labels or
// tag types outside any training schema still count (they can only hurt).
// Exact match compares the full tag dictionaries; per-type counts run over
// the union of tag names seen in either side; macro averages tag types
// occurring in gold.
EvalReport evaluate_annotations(
    const std::vector<std::vector<PartialAnnotation>>& pred,
    const Corpus& gold);

// Same, for model predictions expressed as schema indices.
EvalReport evaluate(const std::vector<std::vector<TagAssignment>>& pred,
                    const Corpus& gold, const TagSchema& schema);

// Render the report as aligned text for the eval CLI.
std::string format_report(const EvalReport& report);

}  // namespace morphtag
