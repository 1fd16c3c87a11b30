#include "morphtag/schema.hpp"

#include <algorithm>
#include <stdexcept>

namespace morphtag {

int TagType::label_index(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

TagSchema::TagSchema(std::vector<TagType> tag_types)
    : tag_types_(std::move(tag_types)) {
  offsets_.reserve(tag_types_.size());
  for (const auto& tt : tag_types_) {
    offsets_.push_back(total_labels_);
    total_labels_ += tt.size();
  }
}

int TagSchema::tag_index(const std::string& name) const {
  for (size_t i = 0; i < tag_types_.size(); ++i) {
    if (tag_types_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::set<std::string> Corpus::languages() const {
  std::set<std::string> out;
  for (const auto& s : sentences) out.insert(s.language_id);
  return out;
}

size_t Corpus::num_tokens() const {
  size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

TagSchema build_schema(const Corpus& corpus) {
  if (corpus.empty()) {
    throw std::runtime_error("build_schema: no training data");
  }
  // Sorted containers give a deterministic, sentence-order-independent
  // schema; NULL is prepended to every domain afterwards.
  std::map<std::string, std::set<std::string>> observed;
  for (const auto& sentence : corpus.sentences) {
    if (!sentence.gold) continue;
    for (const auto& annotation : *sentence.gold) {
      for (const auto& [tag, label] : annotation) {
        observed[tag].insert(label);
      }
    }
  }
  if (observed.empty()) {
    throw std::runtime_error("build_schema: no training data");
  }
  std::vector<TagType> tag_types;
  tag_types.reserve(observed.size());
  for (const auto& [name, labels] : observed) {
    TagType tt;
    tt.name = name;
    tt.labels.push_back(kNullLabel);
    for (const auto& label : labels) {
      if (label != kNullLabel) tt.labels.push_back(label);
    }
    tag_types.push_back(std::move(tt));
  }
  return TagSchema(std::move(tag_types));
}

TagAssignment complete_assignment(const PartialAnnotation& partial,
                                  const TagSchema& schema) {
  TagAssignment out;
  out.labels.assign(schema.num_tag_types(), 0);  // NULL index is 0
  for (const auto& [tag, label] : partial) {
    int m = schema.tag_index(tag);
    if (m < 0) {
      throw std::runtime_error("complete_assignment: unknown tag type '" + tag +
                               "' (label '" + label + "')");
    }
    int idx = schema.tag_type(m).label_index(label);
    if (idx < 0) {
      throw std::runtime_error("complete_assignment: unknown label '" + label +
                               "' for tag type '" + tag + "'");
    }
    out.labels[m] = idx;
  }
  return out;
}

std::vector<std::vector<TagAssignment>> complete_corpus(const Corpus& corpus,
                                                        const TagSchema& schema) {
  std::vector<std::vector<TagAssignment>> out;
  out.reserve(corpus.sentences.size());
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const auto& sentence = corpus.sentences[i];
    std::vector<TagAssignment> gold;
    if (sentence.gold) {
      gold.reserve(sentence.gold->size());
      for (size_t t = 0; t < sentence.gold->size(); ++t) {
        try {
          gold.push_back(complete_assignment((*sentence.gold)[t], schema));
        } catch (const std::exception& e) {
          throw std::runtime_error(std::string(e.what()) + " at sentence " +
                                   std::to_string(i) + ", token " +
                                   std::to_string(t));
        }
      }
    }
    out.push_back(std::move(gold));
  }
  return out;
}

}  // namespace morphtag
