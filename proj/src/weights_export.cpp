#include "morphtag/weights_export.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace morphtag {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

int resolve_tag(const TagSchema& schema, const std::string& name) {
  int m = schema.tag_index(name);
  if (m < 0) {
    std::vector<std::string> available;
    for (const auto& tt : schema.tag_types()) available.push_back(tt.name);
    throw std::runtime_error("unknown tag '" + name +
                             "'; available: " + join(available));
  }
  return m;
}

// Returns (gen table, language table or nullptr) for the requested scope.
template <typename Tables, typename LangTables>
Eigen::MatrixXd scoped_table(const Tables& gen, const LangTables& lang_tables,
                             int index, const std::string& scope) {
  if (scope == "gen") return gen[index];
  auto split = scope.find(':');
  if (split == std::string::npos ||
      (scope.compare(0, split, "lang") != 0 && scope.compare(0, split, "sum") != 0)) {
    throw std::runtime_error("unknown scope '" + scope +
                             "'; expected gen, lang:<id> or sum:<id>");
  }
  std::string language = scope.substr(split + 1);
  if (lang_tables.empty()) {
    throw std::runtime_error(
        "model has no language-specific tables (trained monolingually)");
  }
  auto it = lang_tables.find(language);
  if (it == lang_tables.end()) {
    std::vector<std::string> available;
    for (const auto& [lang, _] : lang_tables) available.push_back(lang);
    throw std::runtime_error("unknown language '" + language +
                             "'; available: " + join(available));
  }
  if (scope.compare(0, split, "lang") == 0) return it->second[index];
  return gen[index] + it->second[index];
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::logic_error("double formatting failed");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

WeightSelection select_weights(const FcrfModel& model, const std::string& what,
                               const std::vector<std::string>& tags,
                               const std::string& scope) {
  const TagSchema& schema = model.schema;
  WeightSelection out;
  if (what == "transition") {
    if (tags.size() != 1) {
      throw std::runtime_error("transition export takes exactly one tag name");
    }
    int m = resolve_tag(schema, tags[0]);
    out.values = scoped_table(model.factor.transition_gen,
                              model.factor.transition_lang, m, scope);
    out.row_labels = schema.tag_type(m).labels;
    out.col_labels = schema.tag_type(m).labels;
    return out;
  }
  if (what != "pairwise") {
    throw std::runtime_error("unknown weight family '" + what +
                             "'; expected transition or pairwise");
  }
  if (tags.size() != 2) {
    throw std::runtime_error("pairwise export takes exactly two tag names");
  }
  int i = resolve_tag(schema, tags[0]);
  int j = resolve_tag(schema, tags[1]);
  if (i == j) {
    throw std::runtime_error("pairwise export needs two distinct tags");
  }
  if (model.factor.pair_count() == 0) {
    throw std::runtime_error("model has no pairwise tables");
  }
  int a = std::min(i, j), b = std::max(i, j);
  Eigen::MatrixXd table =
      scoped_table(model.factor.pairwise_gen, model.factor.pairwise_lang,
                   FactorGraph::pair_index(a, b, schema.num_tag_types()), scope);
  if (i > j) table.transposeInPlace();  // rows follow the first-named tag
  out.values = std::move(table);
  out.row_labels = schema.tag_type(i).labels;
  out.col_labels = schema.tag_type(j).labels;
  return out;
}

std::string to_csv(const WeightSelection& selection) {
  std::ostringstream out;
  for (const auto& label : selection.col_labels) {
    out << ',' << csv_field(label);
  }
  out << '\n';
  for (Eigen::Index r = 0; r < selection.values.rows(); ++r) {
    out << csv_field(selection.row_labels[r]);
    for (Eigen::Index c = 0; c < selection.values.cols(); ++c) {
      out << ',' << format_double(selection.values(r, c));
    }
    out << '\n';
  }
  return out.str();
}

WeightSelection parse_weights_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  WeightSelection out;
  auto header = split_csv_line(line);
  out.col_labels.assign(header.begin() + 1, header.end());

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("CSV row has " + std::to_string(fields.size()) +
                               " fields, expected " +
                               std::to_string(header.size()));
    }
    out.row_labels.push_back(fields[0]);
    std::vector<double> values;
    for (size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      const char* begin = fields[c].data();
      const char* end = begin + fields[c].size();
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end) {
        throw std::runtime_error("CSV cell '" + fields[c] + "' is not a number");
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(out.col_labels.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return out;
}

}  // namespace morphtag
