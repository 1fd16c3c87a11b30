#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "morphtag/training.hpp"

namespace morphtag {

struct WeightSelection {
  Eigen::MatrixXd values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

// Picks one weight matrix for inspection. what: "transition" (one tag name,
// rows = label at t, cols = label at t+1) or "pairwise" (two distinct tag
// names in any order; rows follow the first). scope: "gen", "lang:<id>" or
// "sum:<id>" (gen + language table). Errors list the available tags or
// languages.
WeightSelection select_weights(const FcrfModel& model, const std::string& what,
                               const std::vector<std::string>& tags,
                               const std::string& scope);

// Labeled CSV with the label strings as header row/column; numeric cells
// use shortest-round-trip formatting so parsing recovers the matrix
// exactly. Labels containing delimiters are quoted RFC-4180 style.
std::string to_csv(const WeightSelection& selection);

WeightSelection parse_weights_csv(const std::string& csv);

}  // namespace morphtag
