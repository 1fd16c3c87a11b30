#include <doctest.h>

#include <stdexcept>

#include "morphtag/training.hpp"
#include "morphtag/weights_export.hpp"
#include "synthetic.hpp"

using namespace morphtag;

namespace {

FcrfModel model_with_languages(std::vector<std::string> languages,
                               uint64_t seed) {
  Corpus corpus;
  Sentence s;
  s.tokens = {"ab"};
  s.language_id = languages[0];
  s.gold = std::vector<PartialAnnotation>{{{"POS", "Noun"},
                                           {"POS", "Verb"},
                                           {"Tense", "Past"},
                                           {"Tense", "Pres"},
                                           {"Case", "Acc,Nom"}}};
  corpus.sentences.push_back(s);
  TagSchema schema = build_schema(corpus);  // Case, POS, Tense

  FcrfModel model;
  model.schema = schema;
  model.factor = init_factor_weights(schema, languages);
  EmitterConfig cfg;
  cfg.char_dim = 3;
  cfg.hidden_dim = 4;
  cfg.num_layers = 1;
  Rng rng(seed);
  model.emitter = init_emitter(CharVocab::from_corpus(corpus), languages,
                               schema.total_labels(), cfg, rng);
  return model;
}

void randomize(FactorWeights* weights, uint64_t seed) {
  Rng rng(seed);
  for_each_table(*weights, [&](const std::string&, Eigen::MatrixXd& t) {
    for (int r = 0; r < t.rows(); ++r)
      for (int c = 0; c < t.cols(); ++c) t(r, c) = rng.uniform(-3, 3);
  });
}

}  // namespace

TEST_CASE("freshly initialized weights export as the zero matrix") {
  FcrfModel model = model_with_languages({"da", "sv"}, 81);
  WeightSelection sel = select_weights(model, "transition", {"POS"}, "gen");
  CHECK(sel.values.rows() == 3);  // NULL, Noun, Verb
  CHECK(sel.values.cols() == 3);
  CHECK(sel.values.norm() == 0.0);
  CHECK(sel.row_labels == std::vector<std::string>{"NULL", "Noun", "Verb"});
  CHECK(sel.col_labels == sel.row_labels);
}

TEST_CASE("CSV round-trips the matrix exactly") {
  FcrfModel model = model_with_languages({"da", "sv"}, 82);
  randomize(&model.factor, 83);
  for (const std::string& scope : {"gen", "lang:da", "sum:sv"}) {
    WeightSelection sel =
        select_weights(model, "pairwise", {"POS", "Tense"}, scope);
    WeightSelection back = parse_weights_csv(to_csv(sel));
    REQUIRE(back.values.rows() == sel.values.rows());
    REQUIRE(back.values.cols() == sel.values.cols());
    CHECK(back.row_labels == sel.row_labels);
    CHECK(back.col_labels == sel.col_labels);
    // Bit-exact doubles via shortest-round-trip formatting.
    for (int r = 0; r < sel.values.rows(); ++r) {
      for (int c = 0; c < sel.values.cols(); ++c) {
        CHECK(back.values(r, c) == sel.values(r, c));
      }
    }
  }
}

TEST_CASE("labels containing delimiters survive quoting") {
  FcrfModel model = model_with_languages({"da"}, 84);
  randomize(&model.factor, 85);
  WeightSelection sel = select_weights(model, "transition", {"Case"}, "gen");
  REQUIRE(sel.row_labels == std::vector<std::string>{"NULL", "Acc,Nom"});
  std::string csv = to_csv(sel);
  CHECK(csv.find("\"Acc,Nom\"") != std::string::npos);
  WeightSelection back = parse_weights_csv(csv);
  CHECK(back.row_labels == sel.row_labels);
  CHECK(back.values(1, 1) == sel.values(1, 1));
}

TEST_CASE("scope sum adds the language table to the general one") {
  FcrfModel model = model_with_languages({"da", "sv"}, 86);
  randomize(&model.factor, 87);
  WeightSelection gen = select_weights(model, "transition", {"POS"}, "gen");
  WeightSelection lang = select_weights(model, "transition", {"POS"}, "lang:da");
  WeightSelection sum = select_weights(model, "transition", {"POS"}, "sum:da");
  CHECK((sum.values - gen.values - lang.values).norm() ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("pairwise accepts the tag pair in either order") {
  FcrfModel model = model_with_languages({"da", "sv"}, 88);
  randomize(&model.factor, 89);
  WeightSelection forward =
      select_weights(model, "pairwise", {"POS", "Tense"}, "gen");
  WeightSelection reversed =
      select_weights(model, "pairwise", {"Tense", "POS"}, "gen");
  // Rows follow the first-named tag.
  CHECK(forward.row_labels == reversed.col_labels);
  CHECK(forward.col_labels == reversed.row_labels);
  CHECK((forward.values - reversed.values.transpose()).norm() == 0.0);
}

TEST_CASE("unknown tags and languages produce listing errors") {
  FcrfModel model = model_with_languages({"da", "sv"}, 90);
  CHECK_THROWS_WITH_AS(select_weights(model, "transition", {"Mood"}, "gen"),
                       doctest::Contains("POS"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      select_weights(model, "transition", {"POS"}, "lang:fi"),
      doctest::Contains("da"), std::runtime_error);
  CHECK_THROWS_AS(select_weights(model, "pairwise", {"POS"}, "gen"),
                  std::runtime_error);
  CHECK_THROWS_AS(select_weights(model, "pairwise", {"POS", "POS"}, "gen"),
                  std::runtime_error);
  CHECK_THROWS_AS(select_weights(model, "sideways", {"POS"}, "gen"),
                  std::runtime_error);
}

TEST_CASE("monolingual models reject language scopes") {
  FcrfModel model = model_with_languages({"pt"}, 91);
  CHECK_THROWS_AS(select_weights(model, "transition", {"POS"}, "lang:pt"),
                  std::runtime_error);
  WeightSelection gen = select_weights(model, "transition", {"POS"}, "gen");
  CHECK(gen.values.rows() == 3);
}

TEST_CASE("transition rows index the earlier timestep") {
  FcrfModel model = model_with_languages({"da"}, 92);
  int pos_index = model.schema.tag_index("POS");
  model.factor.transition_gen[pos_index](1, 2) = 7.5;
  WeightSelection sel = select_weights(model, "transition", {"POS"}, "gen");
  CHECK(sel.values(1, 2) == 7.5);
  CHECK(sel.values(2, 1) == 0.0);
}
