#pragma once

#include <map>
#include <vector>

#include "morphtag/emitter.hpp"
#include "morphtag/schema.hpp"
#include "morphtag/training.hpp"

namespace morphtag {

// The distinct full tag assignments observed in training (first-appearance
// order), i.e. the closed output space of the tag-set baseline.
class TagSetVocabulary {
 public:
  TagSetVocabulary() = default;
  explicit TagSetVocabulary(std::vector<TagAssignment> tagsets);

  static TagSetVocabulary from_training(
      const std::vector<std::vector<TagAssignment>>& gold);

  int size() const { return static_cast<int>(tagsets_.size()); }
  const TagAssignment& tagset(int k) const { return tagsets_[k]; }
  const std::vector<TagAssignment>& tagsets() const { return tagsets_; }
  int index_of(const TagAssignment& assignment) const;  // -1 when unseen

 private:
  std::vector<TagAssignment> tagsets_;
  std::map<TagAssignment, int> index_;
};

// Per-token softmax over the tag-set vocabulary on the shared emitter
// architecture; structurally unable to predict tag sets outside it.
struct BaselineModel {
  TagSchema schema;
  TagSetVocabulary tagsets;
  EmitterParams emitter;  // output_dim = |vocabulary|
};

struct BaselineTrainResult {
  BaselineModel model;
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
};

// Cross-entropy training of the tag-set classifier. Reuses TrainConfig;
// callers default the optimizer to SGD. Errors as in train().
BaselineTrainResult baseline_train(const Corpus& corpus, const TagSchema& schema,
                                   const TrainConfig& cfg,
                                   const Corpus* dev = nullptr,
                                   const EpochCallback& callback = nullptr);

// Per-token argmax class, ties toward the lowest index; the result is
// always a member of the training tag-set vocabulary.
std::vector<TagAssignment> baseline_predict(const BaselineModel& model,
                                            const Sentence& sentence);

}  // namespace morphtag
