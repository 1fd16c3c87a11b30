#include "morphtag/decode.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace morphtag {

namespace {

double ratio(long long num, long long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double precision, double recall) {
  double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

void check_shapes(const std::vector<std::vector<TagAssignment>>& pred,
                  const std::vector<std::vector<TagAssignment>>& gold) {
  if (pred.size() != gold.size()) {
    throw std::runtime_error("eval: prediction/gold sentence counts differ");
  }
  for (size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != gold[s].size()) {
      throw std::runtime_error("eval: sentence " + std::to_string(s) +
                               " length differs between prediction and gold");
    }
  }
}

F1Result f1_from_counts(std::vector<TypeScore> per_type) {
  F1Result result;
  long long tp = 0, fp = 0, fn = 0;
  double macro_sum = 0.0;
  int macro_n = 0;
  for (auto& ts : per_type) {
    ts.precision = ratio(ts.tp, ts.tp + ts.fp);
    ts.recall = ratio(ts.tp, ts.tp + ts.fn);
    ts.f1 = f1_of(ts.precision, ts.recall);
    tp += ts.tp;
    fp += ts.fp;
    fn += ts.fn;
    if (ts.in_gold) {
      macro_sum += ts.f1;
      ++macro_n;
    }
  }
  double micro_p = ratio(tp, tp + fp);
  double micro_r = ratio(tp, tp + fn);
  result.micro = f1_of(micro_p, micro_r);
  result.macro = macro_n == 0 ? 0.0 : macro_sum / macro_n;
  result.per_type = std::move(per_type);
  return result;
}

}  // namespace

std::vector<TagAssignment> mbr_decode(const BeliefState& beliefs,
                                      const TagSchema& schema) {
  std::vector<TagAssignment> out(beliefs.var_beliefs.size());
  for (size_t t = 0; t < beliefs.var_beliefs.size(); ++t) {
    out[t].labels.resize(schema.num_tag_types());
    for (int m = 0; m < schema.num_tag_types(); ++m) {
      const Eigen::VectorXd& b = beliefs.var_beliefs[t][m];
      int best = 0;
      for (int l = 1; l < b.size(); ++l) {
        if (b(l) > b(best)) best = l;
      }
      out[t].labels[m] = best;
    }
  }
  return out;
}

double token_accuracy(const std::vector<std::vector<TagAssignment>>& pred,
                      const std::vector<std::vector<TagAssignment>>& gold) {
  check_shapes(pred, gold);
  long long total = 0, correct = 0;
  for (size_t s = 0; s < pred.size(); ++s) {
    for (size_t t = 0; t < pred[s].size(); ++t) {
      ++total;
      if (pred[s][t] == gold[s][t]) ++correct;
    }
  }
  if (total == 0) throw std::runtime_error("token_accuracy: no tokens");
  return ratio(correct, total);
}

F1Result f1_scores(const std::vector<std::vector<TagAssignment>>& pred,
                   const std::vector<std::vector<TagAssignment>>& gold,
                   const TagSchema& schema) {
  check_shapes(pred, gold);
  std::vector<TypeScore> per_type(schema.num_tag_types());
  for (int m = 0; m < schema.num_tag_types(); ++m) {
    per_type[m].name = schema.tag_type(m).name;
  }
  for (size_t s = 0; s < pred.size(); ++s) {
    for (size_t t = 0; t < pred[s].size(); ++t) {
      for (int m = 0; m < schema.num_tag_types(); ++m) {
        int p = pred[s][t].labels[m];
        int g = gold[s][t].labels[m];
        TypeScore& ts = per_type[m];
        if (g != 0) ts.in_gold = true;
        if (p == g && g != 0) {
          ++ts.tp;
        } else if (p != g) {
          if (p != 0) ++ts.fp;
          if (g != 0) ++ts.fn;
        }
      }
    }
  }
  return f1_from_counts(std::move(per_type));
}

GoldToken gold_for_eval(const PartialAnnotation& partial,
                        const TagSchema& schema) {
  GoldToken out;
  out.labels.labels.assign(schema.num_tag_types(), 0);
  for (const auto& [name, label] : partial) {
    int m = schema.tag_index(name);
    if (m < 0) {
      out.out_of_schema = true;
      continue;
    }
    int l = schema.tag_type(m).label_index(label);
    out.labels.labels[m] = l < 0 ? kUnknownLabel : l;
  }
  return out;
}

std::vector<PartialAnnotation> to_annotations(
    const std::vector<TagAssignment>& assignment, const TagSchema& schema) {
  std::vector<PartialAnnotation> out(assignment.size());
  for (size_t t = 0; t < assignment.size(); ++t) {
    for (int m = 0; m < schema.num_tag_types(); ++m) {
      int l = assignment[t].labels[m];
      if (l != 0) {
        out[t].emplace_back(schema.tag_type(m).name,
                            schema.tag_type(m).labels[l]);
      }
    }
  }
  return out;
}

EvalReport evaluate_annotations(
    const std::vector<std::vector<PartialAnnotation>>& pred,
    const Corpus& gold) {
  if (pred.size() != gold.sentences.size()) {
    throw std::runtime_error("eval: prediction/gold sentence counts differ");
  }
  struct Counts {
    long long tp = 0, fp = 0, fn = 0;
    bool in_gold = false;
  };
  std::map<std::string, Counts> by_name;
  long long total = 0, exact = 0;

  for (size_t s = 0; s < gold.sentences.size(); ++s) {
    const Sentence& sentence = gold.sentences[s];
    if (!sentence.gold) {
      throw std::runtime_error("eval: gold sentence " + std::to_string(s) +
                               " has no annotations");
    }
    if (pred[s].size() != sentence.gold->size()) {
      throw std::runtime_error("eval: sentence " + std::to_string(s) +
                               " length differs between prediction and gold");
    }
    for (size_t t = 0; t < sentence.gold->size(); ++t) {
      std::map<std::string, std::string> p(pred[s][t].begin(), pred[s][t].end());
      std::map<std::string, std::string> g((*sentence.gold)[t].begin(),
                                           (*sentence.gold)[t].end());
      ++total;
      if (p == g) ++exact;
      for (const auto& [name, gv] : g) {
        Counts& c = by_name[name];
        c.in_gold = true;
        auto it = p.find(name);
        if (it != p.end() && it->second == gv) {
          ++c.tp;
        } else {
          ++c.fn;
          if (it != p.end()) ++c.fp;
        }
      }
      for (const auto& [name, pv] : p) {
        if (!g.count(name)) ++by_name[name].fp;  // gold NULL, pred non-NULL
      }
    }
  }
  if (total == 0) throw std::runtime_error("eval: no tokens");

  std::vector<TypeScore> per_type;
  for (const auto& [name, c] : by_name) {
    TypeScore ts;
    ts.name = name;
    ts.tp = c.tp;
    ts.fp = c.fp;
    ts.fn = c.fn;
    ts.in_gold = c.in_gold;
    per_type.push_back(std::move(ts));
  }
  F1Result f1 = f1_from_counts(std::move(per_type));

  EvalReport report;
  report.token_accuracy = ratio(exact, total);
  report.f1_macro = f1.macro;
  report.f1_micro = f1.micro;
  report.per_type = std::move(f1.per_type);
  report.num_tokens = static_cast<size_t>(total);
  report.num_sentences = pred.size();
  return report;
}

EvalReport evaluate(const std::vector<std::vector<TagAssignment>>& pred,
                    const Corpus& gold, const TagSchema& schema) {
  std::vector<std::vector<PartialAnnotation>> annotations(pred.size());
  for (size_t s = 0; s < pred.size(); ++s) {
    annotations[s] = to_annotations(pred[s], schema);
  }
  return evaluate_annotations(annotations, gold);
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "sentences:      " << report.num_sentences << "\n";
  out << "tokens:         " << report.num_tokens << "\n";
  out << "token accuracy: " << report.token_accuracy << "\n";
  out << "F1 micro:       " << report.f1_micro << "\n";
  out << "F1 macro:       " << report.f1_macro << "\n";
  out << "per tag type (precision / recall / F1):\n";
  size_t width = 8;
  for (const auto& ts : report.per_type) width = std::max(width, ts.name.size());
  for (const auto& ts : report.per_type) {
    out << "  " << std::left << std::setw(static_cast<int>(width)) << ts.name
        << std::right << "  " << ts.precision << "  " << ts.recall << "  "
        << ts.f1;
    if (!ts.in_gold) out << "  (absent from gold)";
    out << "\n";
  }
  return out.str();
}

}  // namespace morphtag
