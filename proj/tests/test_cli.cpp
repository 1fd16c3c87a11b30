#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "morphtag/conllu.hpp"
#include "morphtag/weights_export.hpp"
#include "synthetic.hpp"

using json = nlohmann::json;
using namespace morphtag;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class CliFixture {
 public:
  CliFixture() {
    dir_ = fs::temp_directory_path() /
           ("morphtag_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~CliFixture() { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const std::string& content) const {
    fs::path p = path(name);
    std::ofstream(p) << content;
    return p;
  }

  RunResult run(const std::string& args) const {
    fs::path out = path("stdout.txt"), err = path("stderr.txt");
    std::string cmd = std::string(MORPHTAG_CLI_PATH) + " " + args + " >" +
                      out.string() + " 2>" + err.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path dir_;
};

// First JSON line of the metrics file: the config echo.
json config_line(const fs::path& metrics) {
  std::ifstream in(metrics);
  std::string line;
  REQUIRE(std::getline(in, line));
  return json::parse(line).at("config");
}

const char* kSmall =
    " --epochs 2 --char-dim 3 --hidden-dim 4 --layers 1 --workers 2 --seed 3";

}  // namespace

TEST_CASE("cli end to end") {
  CliFixture fx;
  Corpus corpus = morphtag::testing::single_tag_corpus(8, 101, "aa");
  fs::path train = fx.write("aa.conllu", to_conllu(corpus));
  fs::path model = fx.path("model.json");

  RunResult r = fx.run("train --train " + train.string() + " --out " +
                       model.string() + kSmall);
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(model));

  SUBCASE("training echoes its full resolved config") {
    fs::path metrics = fs::path(model.string() + ".metrics.jsonl");
    REQUIRE(fs::exists(metrics));
    json cfg = config_line(metrics);
    CHECK(cfg.at("epochs") == 2);
    CHECK(cfg.at("seed") == 3);
    CHECK(cfg.at("optimizer") == "adam");
    CHECK(cfg.at("lr") == 1e-3);
    CHECK(cfg.at("bp_threshold") == 0.05);
    CHECK(cfg.at("bp_max_iters") == 40);
    CHECK(cfg.at("train_lang") == "aa");  // file-stem default
    CHECK(r.out.find("config:") != std::string::npos);

    // Per-epoch lines follow.
    std::ifstream in(metrics);
    std::string line;
    std::getline(in, line);
    int epochs = 0;
    while (std::getline(in, line)) {
      json e = json::parse(line);
      CHECK(e.at("epoch") == ++epochs);
      CHECK(e.contains("train_nll"));
    }
    CHECK(epochs == 2);
  }

  SUBCASE("reruns with one config are bit-identical") {
    fs::path model2 = fx.path("model2.json");
    RunResult r2 = fx.run("train --train " + train.string() + " --out " +
                          model2.string() + kSmall);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(model) == slurp(model2));
  }

  SUBCASE("tag writes parseable annotated output") {
    fs::path pred = fx.path("pred.conllu");
    RunResult rt = fx.run("tag --model-file " + model.string() + " --input " +
                          train.string() + " --output " + pred.string());
    INFO(rt.err);
    REQUIRE(rt.exit_code == 0);
    Corpus tagged = parse_conllu_file(pred.string(), "aa");
    REQUIRE(tagged.sentences.size() == corpus.sentences.size());
    CHECK(tagged.sentences[0].gold.has_value());
  }

  SUBCASE("eval in model mode emits a JSON report") {
    RunResult re = fx.run("eval --model-file " + model.string() + " --input " +
                          train.string() + " --json");
    INFO(re.err);
    REQUIRE(re.exit_code == 0);
    json report = json::parse(re.out);
    CHECK(report.at("tokens").get<int>() == static_cast<int>(corpus.num_tokens()));
    CHECK(report.at("token_accuracy").is_number());
    CHECK(report.at("f1_micro").is_number());
  }

  SUBCASE("eval on predictions identical to gold is perfect") {
    RunResult re = fx.run("eval --pred " + train.string() + " --gold " +
                          train.string() + " --json");
    REQUIRE(re.exit_code == 0);
    json report = json::parse(re.out);
    CHECK(report.at("token_accuracy") == 1.0);
    CHECK(report.at("f1_micro") == 1.0);
    CHECK(report.at("f1_macro") == 1.0);
  }

  SUBCASE("export-weights emits a parseable CSV that names the labels") {
    fs::path csv = fx.path("w.csv");
    RunResult rw = fx.run("export-weights --model-file " + model.string() +
                          " --what transition --tag pos --output " +
                          csv.string());
    INFO(rw.err);
    REQUIRE(rw.exit_code == 0);
    WeightSelection sel = parse_weights_csv(slurp(csv));
    CHECK(sel.row_labels == std::vector<std::string>{"NULL", "X", "Y"});
    CHECK(sel.values.rows() == 3);
  }

  SUBCASE("unknown tag names list the alternatives") {
    RunResult rw = fx.run("export-weights --model-file " + model.string() +
                          " --what transition --tag Mood");
    CHECK(rw.exit_code == 1);
    CHECK(rw.err.find("pos") != std::string::npos);
  }

  SUBCASE("tagging an untrained language needs the fallback flag") {
    fs::path other = fx.write("zz.conllu", to_conllu(corpus));
    RunResult bad = fx.run("tag --model-file " + model.string() + " --input " +
                           other.string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("error:") != std::string::npos);
    RunResult good = fx.run("tag --model-file " + model.string() +
                            " --input " + other.string() +
                            " --lang-fallback aa --output -");
    CHECK(good.exit_code == 0);
  }

  SUBCASE("a test file is scored once after training") {
    fs::path model3 = fx.path("m3.bin");
    RunResult rt = fx.run("train --train " + train.string() + " --test " +
                          train.string() + " --test-lang aa --out " +
                          model3.string() + kSmall);
    INFO(rt.err);
    REQUIRE(rt.exit_code == 0);
    CHECK(rt.out.find("test: accuracy") != std::string::npos);
    std::istringstream lines(slurp(model3.string() + ".metrics.jsonl"));
    std::string line, last;
    while (std::getline(lines, line))
      if (!line.empty()) last = line;
    CHECK(json::parse(last).at("test").at("f1_micro").is_number());
  }
}

TEST_CASE("cli config file overlays defaults and flags win") {
  CliFixture fx;
  Corpus corpus = morphtag::testing::single_tag_corpus(5, 102, "aa");
  fs::path train = fx.write("aa.conllu", to_conllu(corpus));
  fs::path config = fx.write("config.json",
                             R"({"epochs": 5, "seed": 7, "char_dim": 3,
                                 "hidden_dim": 4, "layers": 1,
                                 "bp_threshold": 0.01})");
  fs::path model = fx.path("model.json");
  RunResult r = fx.run("train --train " + train.string() + " --config " +
                       config.string() + " --epochs 1 --out " + model.string());
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  json cfg = config_line(fs::path(model.string() + ".metrics.jsonl"));
  CHECK(cfg.at("epochs") == 1);        // flag beats config file
  CHECK(cfg.at("seed") == 7);          // config file beats default
  CHECK(cfg.at("bp_threshold") == 0.01);
  CHECK(cfg.at("char_dim") == 3);
}

TEST_CASE("cli cross-lingual training applies the mixture rules") {
  CliFixture fx;
  Corpus hrl = morphtag::testing::single_tag_corpus(6, 103, "hh");
  Corpus lrl = morphtag::testing::single_tag_corpus(5, 104, "ll");
  fs::path hrl_path = fx.write("hh.conllu", to_conllu(hrl));
  fs::path lrl_path = fx.write("ll.conllu", to_conllu(lrl));
  fs::path model = fx.path("x.json");
  RunResult r = fx.run("train --hrl-train " + hrl_path.string() +
                       " --lrl-train " + lrl_path.string() +
                       " --tgt-size 2 --upsample 3 --out " + model.string() +
                       kSmall);
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("training sentences: 12") != std::string::npos);  // 6 + 2*3
  json cfg = config_line(fs::path(model.string() + ".metrics.jsonl"));
  CHECK(cfg.at("hrl_lang") == "hh");
  CHECK(cfg.at("lrl_lang") == "ll");
  CHECK(cfg.at("upsample") == 3);

  // Auto-upsample defaults to 1 away from the 100-sentence setting.
  fs::path model2 = fx.path("y.json");
  RunResult r2 = fx.run("train --hrl-train " + hrl_path.string() +
                        " --lrl-train " + lrl_path.string() +
                        " --tgt-size 2 --out " + model2.string() + kSmall);
  REQUIRE(r2.exit_code == 0);
  CHECK(config_line(fs::path(model2.string() + ".metrics.jsonl"))
            .at("upsample") == 1);
}

TEST_CASE("cli rejects bad invocations with one-line errors") {
  CliFixture fx;
  RunResult no_data = fx.run("eval");
  CHECK(no_data.exit_code == 1);
  CHECK(no_data.err.find("error:") != std::string::npos);

  RunResult missing = fx.run("eval --pred /nope.conllu --gold /nope.conllu");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.rfind("error:", 0) == 0);

  Corpus corpus = morphtag::testing::single_tag_corpus(3, 105, "aa");
  fs::path train = fx.write("aa.conllu", to_conllu(corpus));
  RunResult both = fx.run("train --train " + train.string() + " --hrl-train " +
                          train.string() + " --out " + fx.path("m.json").string());
  CHECK(both.exit_code == 1);
  CHECK(both.err.find("either") != std::string::npos);
}

TEST_CASE("cli ablation prints the four topology rows") {
  CliFixture fx;
  Corpus corpus = morphtag::testing::chain_corpus(8, 106, "aa");
  Corpus dev = morphtag::testing::chain_corpus(3, 107, "aa");
  fs::path train = fx.write("aa.conllu", to_conllu(corpus));
  fs::path dev_path = fx.write("dev.conllu", to_conllu(dev));
  RunResult r = fx.run("ablate --train " + train.string() + " --dev " +
                       dev_path.string() + " --dev-lang aa --epochs 1" +
                       " --char-dim 3 --hidden-dim 4 --layers 1 --workers 2");
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("transition+pairwise") != std::string::npos);
  CHECK(r.out.find("transition-only") != std::string::npos);
  CHECK(r.out.find("pairwise-only") != std::string::npos);
  CHECK(r.out.find("tag-wise") != std::string::npos);

  RunResult no_dev = fx.run("ablate --train " + train.string() + " --epochs 1");
  CHECK(no_dev.exit_code == 1);
  CHECK(no_dev.err.find("--dev") != std::string::npos);
}
