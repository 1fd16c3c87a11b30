#include "morphtag/conllu.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "morphtag/rng.hpp"

namespace morphtag {

namespace {

constexpr int kConlluColumns = 10;

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// "1" -> word, "1-2" -> multiword range, "3.1" -> empty node.
bool is_word_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == '-' || c == '.') return false;
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_skippable_id(const std::string& id) {
  if (id.empty()) return false;
  bool digits = false;
  for (char c : id) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = true;
    } else if (c != '-' && c != '.') {
      return false;
    }
  }
  return digits;
}

// ADJ -> Adj, PUNCT -> Punct. FEATS values are kept as-is.
std::string title_case(const std::string& s) {
  std::string out = s;
  for (size_t i = 0; i < out.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(out[i]);
    out[i] = static_cast<char>(i == 0 ? std::toupper(c) : std::tolower(c));
  }
  return out;
}

std::string upper_case(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

PartialAnnotation parse_annotation(const std::string& upos, const std::string& feats,
                                   int line_no) {
  PartialAnnotation annotation;
  if (upos != "_" && !upos.empty()) {
    annotation.emplace_back("POS", title_case(upos));
  }
  if (feats != "_" && !feats.empty()) {
    for (const auto& feat : split(feats, '|')) {
      size_t eq = feat.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": malformed FEATS entry '" + feat + "'");
      }
      // Multi-valued features (Case=Acc,Nom) stay one atomic label.
      annotation.emplace_back(feat.substr(0, eq), feat.substr(eq + 1));
    }
  }
  return annotation;
}

Corpus select_mixture(const Corpus& hrl, const Corpus& lrl, const SplitConfig& cfg,
                      const std::vector<size_t>& lrl_pick) {
  Corpus out;
  out.sentences.reserve(hrl.sentences.size() +
                        lrl_pick.size() * static_cast<size_t>(cfg.upsample_factor));
  for (const auto& s : hrl.sentences) out.sentences.push_back(s);
  for (int rep = 0; rep < cfg.upsample_factor; ++rep) {
    for (size_t idx : lrl_pick) out.sentences.push_back(lrl.sentences[idx]);
  }
  return out;
}

void check_mixture_preconditions(const Corpus& hrl, const Corpus& lrl,
                                 const SplitConfig& cfg) {
  if (hrl.empty()) {
    throw std::runtime_error("make_training_mixture: HRL corpus is empty");
  }
  if (cfg.tgt_size < 0) {
    throw std::runtime_error("make_training_mixture: tgt_size must be >= 0");
  }
  if (cfg.upsample_factor < 1) {
    throw std::runtime_error("make_training_mixture: upsample_factor must be >= 1");
  }
  if (static_cast<size_t>(cfg.tgt_size) > lrl.sentences.size()) {
    throw std::runtime_error(
        "make_training_mixture: tgt_size " + std::to_string(cfg.tgt_size) +
        " exceeds available LRL sentences (" +
        std::to_string(lrl.sentences.size()) + ")");
  }
}

}  // namespace

Corpus parse_conllu(std::istream& in, const std::string& language_id) {
  Corpus corpus;
  Sentence current;
  current.language_id = language_id;
  std::vector<PartialAnnotation> annotations;

  auto flush = [&] {
    if (!current.tokens.empty()) {
      current.gold = std::move(annotations);
      corpus.sentences.push_back(std::move(current));
    }
    current = Sentence{};
    current.language_id = language_id;
    annotations.clear();
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (static_cast<int>(cols.size()) != kConlluColumns) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected 10 tab-separated columns, got " +
                               std::to_string(cols.size()));
    }
    const std::string& id = cols[0];
    if (!is_word_id(id)) {
      if (is_skippable_id(id)) continue;  // multiword range or empty node
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": malformed token ID '" + id + "'");
    }
    if (cols[1].empty()) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": empty FORM column");
    }
    current.tokens.push_back(cols[1]);
    annotations.push_back(parse_annotation(cols[3], cols[5], line_no));
  }
  flush();
  return corpus;
}

Corpus parse_conllu(const std::string& text, const std::string& language_id) {
  std::istringstream in(text);
  return parse_conllu(in, language_id);
}

Corpus parse_conllu_file(const std::string& path, const std::string& language_id) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open CoNLL-U file: " + path);
  }
  return parse_conllu(in, language_id);
}

void write_conllu(std::ostream& out, const Corpus& corpus,
                  const std::vector<std::vector<TagAssignment>>* assignments,
                  const TagSchema* schema) {
  if (assignments && !schema) {
    throw std::runtime_error("write_conllu: assignments require a schema");
  }
  if (assignments && assignments->size() != corpus.sentences.size()) {
    throw std::runtime_error("write_conllu: assignment/sentence count mismatch");
  }
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& sentence = corpus.sentences[i];
    for (size_t t = 0; t < sentence.tokens.size(); ++t) {
      std::string upos = "_";
      std::string feats = "_";
      if (assignments) {
        const TagAssignment& a = (*assignments)[i][t];
        std::map<std::string, std::string> kv;
        for (int m = 0; m < schema->num_tag_types(); ++m) {
          if (a.labels[m] == 0) continue;  // NULL
          const TagType& tt = schema->tag_type(m);
          const std::string& label = tt.labels[a.labels[m]];
          if (tt.name == "POS") {
            upos = upper_case(label);
          } else {
            kv[tt.name] = label;
          }
        }
        if (!kv.empty()) {
          std::string joined;
          for (const auto& [k, v] : kv) {
            if (!joined.empty()) joined += '|';
            joined += k + "=" + v;
          }
          feats = joined;
        }
      } else if (sentence.gold) {
        std::map<std::string, std::string> kv;
        for (const auto& [k, v] : (*sentence.gold)[t]) {
          if (k == "POS") {
            upos = upper_case(v);
          } else {
            kv[k] = v;
          }
        }
        if (!kv.empty()) {
          std::string joined;
          for (const auto& [k, v] : kv) {
            if (!joined.empty()) joined += '|';
            joined += k + "=" + v;
          }
          feats = joined;
        }
      }
      out << (t + 1) << '\t' << sentence.tokens[t] << "\t_\t" << upos
          << "\t_\t" << feats << "\t_\t_\t_\t_\n";
    }
    out << '\n';
  }
}

std::string to_conllu(const Corpus& corpus,
                      const std::vector<std::vector<TagAssignment>>* assignments,
                      const TagSchema* schema) {
  std::ostringstream out;
  write_conllu(out, corpus, assignments, schema);
  return out.str();
}

Corpus make_training_mixture(const Corpus& hrl, const Corpus& lrl,
                             const SplitConfig& cfg) {
  check_mixture_preconditions(hrl, lrl, cfg);
  std::vector<size_t> pick(static_cast<size_t>(cfg.tgt_size));
  for (size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  return select_mixture(hrl, lrl, cfg, pick);
}

Corpus make_training_mixture_random(const Corpus& hrl, const Corpus& lrl,
                                    const SplitConfig& cfg, uint64_t seed) {
  check_mixture_preconditions(hrl, lrl, cfg);
  std::vector<size_t> all(lrl.sentences.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  Rng rng(seed);
  rng.shuffle(all);
  all.resize(static_cast<size_t>(cfg.tgt_size));
  std::sort(all.begin(), all.end());
  return select_mixture(hrl, lrl, cfg, all);
}

}  // namespace morphtag
