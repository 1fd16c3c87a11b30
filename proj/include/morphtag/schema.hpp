#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace morphtag {

// The distinguished label meaning "attribute unannotated for this token".
inline constexpr const char* kNullLabel = "NULL";

// One (tag name, label) pair as read from data, e.g. ("Gender", "Masc").
using TagPair = std::pair<std::string, std::string>;

// Raw annotation of one token: the set of tags explicitly present.
using PartialAnnotation = std::vector<TagPair>;

// One annotation dimension (POS, Gender, ...) with its label domain.
// labels[0] is always NULL, so a zero-score argmax falls back to NULL.
struct TagType {
  std::string name;
  std::vector<std::string> labels;

  int label_index(const std::string& label) const;  // -1 if absent
  int size() const { return static_cast<int>(labels.size()); }
};

// The full annotation universe: M tag types with their domains. Immutable
// after construction, safe to share across threads.
class TagSchema {
 public:
  TagSchema() = default;
  explicit TagSchema(std::vector<TagType> tag_types);

  int num_tag_types() const { return static_cast<int>(tag_types_.size()); }
  const TagType& tag_type(int m) const { return tag_types_[m]; }
  const std::vector<TagType>& tag_types() const { return tag_types_; }

  int tag_index(const std::string& name) const;  // -1 if absent

  // Sum of label-domain sizes; the emitter's output width.
  int total_labels() const { return total_labels_; }
  // Start of tag type m's segment in the concatenated score vector.
  int segment_offset(int m) const { return offsets_[m]; }

 private:
  std::vector<TagType> tag_types_;
  std::vector<int> offsets_;
  int total_labels_ = 0;
};

// A full length-M label assignment for one token (indices into each tag
// type's label list). Unannotated tags hold the NULL index (0).
struct TagAssignment {
  std::vector<int> labels;

  bool operator==(const TagAssignment& other) const = default;
  bool operator<(const TagAssignment& other) const {
    return labels < other.labels;
  }
};

struct Sentence {
  std::vector<std::string> tokens;  // UTF-8 surface forms, used verbatim
  std::string language_id;
  // Gold annotations, one per token, when present. An annotated token with
  // no explicit tags is an empty vector (maps to all-NULL).
  std::optional<std::vector<PartialAnnotation>> gold;

  int length() const { return static_cast<int>(tokens.size()); }
};

struct Corpus {
  std::vector<Sentence> sentences;

  std::set<std::string> languages() const;
  size_t num_tokens() const;
  bool empty() const { return sentences.empty(); }
};

// Builds the schema from a training corpus: tag types are the union of tag
// names seen anywhere, each domain the union of observed labels plus NULL.
// Tag types are ordered lexicographically by name and labels
// lexicographically after NULL, so the result is invariant under sentence
// order. Throws on an empty corpus.
TagSchema build_schema(const Corpus& corpus);

// Expands a partial annotation to a full length-M assignment; tags absent
// from the annotation get NULL. Throws naming the offending pair when a tag
// name or label is not in the schema.
TagAssignment complete_assignment(const PartialAnnotation& partial,
                                  const TagSchema& schema);

// complete_assignment over every token of every annotated sentence.
// Sentences without gold get an empty entry.
std::vector<std::vector<TagAssignment>> complete_corpus(const Corpus& corpus,
                                                        const TagSchema& schema);

}  // namespace morphtag
