#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "morphtag/schema.hpp"

namespace morphtag {

// Transition and pairwise log-potential tables: one general table per tag
// type / tag pair, plus per-language tables of the same shape in
// cross-lingual mode. The effective log-potential is their sum; weights
// live in log space throughout and start at zero (uniform potentials).
struct FactorWeights {
  // transition[m]: (|Y_m|, |Y_m|); rows = label at t, cols = label at t+1.
  std::vector<Eigen::MatrixXd> transition_gen;
  // pairwise[p]: (|Y_i|, |Y_j|) for the p-th canonical pair (i, j), i < j.
  std::vector<Eigen::MatrixXd> pairwise_gen;
  std::map<std::string, std::vector<Eigen::MatrixXd>> transition_lang;
  std::map<std::string, std::vector<Eigen::MatrixXd>> pairwise_lang;
  int num_tags = 0;

  bool has_language_tables() const { return !transition_lang.empty(); }
  int pair_count() const { return static_cast<int>(pairwise_gen.size()); }
};

// Zero-initialized tables shaped by the schema. languages with fewer than
// two entries yields a general-only (monolingual) parameterization.
FactorWeights init_factor_weights(const TagSchema& schema,
                                  const std::vector<std::string>& languages);

// lambda_T,gen[m][a,b] + lambda_T,lang[m][lang][a,b]; the factor potential
// is exp() of this value. Throws for a language without tables when
// language tables exist.
double transition_log_potential(const FactorWeights& weights, int m,
                                const std::string& language, int a, int b);

// Same for the cotemporal pair (i, j); callers must pass i < j.
double pairwise_log_potential(const FactorWeights& weights, int i, int j,
                              const std::string& language, int a, int b);

// Summed gen+lang tables for one language, assembled once per sentence for
// the BP inner loop. Monolingual weights return copies of the general
// tables.
std::vector<Eigen::MatrixXd> combined_transition(const FactorWeights& weights,
                                                 const std::string& language);
std::vector<Eigen::MatrixXd> combined_pairwise(const FactorWeights& weights,
                                               const std::string& language);

// Applies fn to every weight table in a fixed order shared by optimizers,
// serialization and gradient checks (maps iterate in key order).
template <typename Fn>
void for_each_table(FactorWeights& weights, Fn&& fn) {
  for (size_t m = 0; m < weights.transition_gen.size(); ++m) {
    fn("transition.gen." + std::to_string(m), weights.transition_gen[m]);
  }
  for (size_t p = 0; p < weights.pairwise_gen.size(); ++p) {
    fn("pairwise.gen." + std::to_string(p), weights.pairwise_gen[p]);
  }
  for (auto& [lang, tables] : weights.transition_lang) {
    for (size_t m = 0; m < tables.size(); ++m) {
      fn("transition." + lang + "." + std::to_string(m), tables[m]);
    }
  }
  for (auto& [lang, tables] : weights.pairwise_lang) {
    for (size_t p = 0; p < tables.size(); ++p) {
      fn("pairwise." + lang + "." + std::to_string(p), tables[p]);
    }
  }
}

}  // namespace morphtag
