#pragma once

#include <set>
#include <string>
#include <vector>

#include "morphtag/baseline.hpp"
#include "morphtag/bp.hpp"
#include "morphtag/training.hpp"

namespace morphtag {

struct Prediction {
  std::vector<TagAssignment> assignment;
  bool bp_converged = true;
  int bp_iterations = 0;
};

// Emitter -> BP -> MBR for one sentence under the model's topology. The
// tag-wise model is the same path with all factor families disabled.
Prediction predict_fcrf(const FcrfModel& model, const Sentence& sentence,
                        const BpConfig& bp);

// Parallel whole-corpus prediction; results are index-aligned with the
// corpus. nonconverged (optional) counts sentences at the BP iteration cap.
std::vector<std::vector<TagAssignment>> predict_corpus_fcrf(
    const FcrfModel& model, const Corpus& corpus, const BpConfig& bp,
    int workers, int* nonconverged = nullptr);

std::vector<std::vector<TagAssignment>> predict_corpus_baseline(
    const BaselineModel& model, const Corpus& corpus, int workers);

// Rewrites language ids that are not among `known` to `fallback` so unseen
// test languages reuse another language's head. Throws when the fallback
// itself is unknown; empty fallback leaves the corpus untouched.
void apply_language_fallback(Corpus* corpus, const std::set<std::string>& known,
                             const std::string& fallback);

}  // namespace morphtag
