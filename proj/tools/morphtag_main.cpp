// morphtag: cross-lingual morphological tagging with a neural factorial CRF.
// Subcommands: train, tag, eval, export-weights, ablate.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "morphtag/baseline.hpp"
#include "morphtag/conllu.hpp"
#include "morphtag/decode.hpp"
#include "morphtag/model_io.hpp"
#include "morphtag/tagger.hpp"
#include "morphtag/training.hpp"
#include "morphtag/weights_export.hpp"

using json = nlohmann::json;
using namespace morphtag;

namespace {

struct Options {
  // data
  std::string train_path, train_lang;
  std::string hrl_path, hrl_lang;
  std::string lrl_path, lrl_lang;
  std::string dev_path, dev_lang;
  std::string test_path, test_lang;
  std::string input_path, input_lang;
  std::string pred_path, gold_path;
  std::string model_file;
  std::string out_path;
  std::string metrics_path;
  std::string config_path;
  std::string lang_fallback;

  // mixture
  int tgt_size = 100;
  int upsample = 0;  // 0 = auto: 10 when tgt_size == 100, else 1
  bool random_lrl = false;

  // model
  std::string model_kind = "fcrf";  // fcrf | baseline | tagwise
  bool no_transition = false;
  bool no_pairwise = false;

  // training
  int epochs = 10;
  int batch_size = 64;
  std::string optimizer;  // empty = adam for fcrf/tagwise, sgd for baseline
  double lr = 0.0;        // 0 = 1e-3 for adam, 0.1 for sgd
  uint64_t seed = 1;
  double dropout = 0.2;
  double clip = 0.0;
  int workers = 0;  // 0 = available cores
  int char_dim = 64;
  int hidden_dim = 256;
  int layers = 2;

  // bp
  double bp_threshold = 0.05;
  int bp_max_iters = 40;

  // eval / export
  bool json_output = false;
  std::string what;
  std::vector<std::string> tags;
  std::string scope = "gen";
};

std::string stem_of(const std::string& path) {
  size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

std::string lang_or_stem(const std::string& lang, const std::string& path) {
  return lang.empty() ? stem_of(path) : lang;
}

// Config file overlay: JSON keys matching the long flag names (dashes as
// underscores). Flags given on the command line win because CLI11 only
// writes bound variables for options it actually saw, and the overlay runs
// before parsing.
void apply_config_file(const std::string& path, Options* o) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config file '" + path + "' is not valid JSON: " +
                             e.what());
  }
  auto get = [&](const char* key, auto* dst) {
    if (j.contains(key)) *dst = j.at(key).get<std::decay_t<decltype(*dst)>>();
  };
  get("tgt_size", &o->tgt_size);
  get("upsample", &o->upsample);
  get("model", &o->model_kind);
  get("no_transition", &o->no_transition);
  get("no_pairwise", &o->no_pairwise);
  get("epochs", &o->epochs);
  get("batch_size", &o->batch_size);
  get("optimizer", &o->optimizer);
  get("lr", &o->lr);
  get("seed", &o->seed);
  get("dropout", &o->dropout);
  get("clip", &o->clip);
  get("workers", &o->workers);
  get("char_dim", &o->char_dim);
  get("hidden_dim", &o->hidden_dim);
  get("layers", &o->layers);
  get("bp_threshold", &o->bp_threshold);
  get("bp_max_iters", &o->bp_max_iters);
  get("random_lrl_pick", &o->random_lrl);
  get("lang_fallback", &o->lang_fallback);
}

int resolved_workers(const Options& o) {
  if (o.workers > 0) return o.workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int resolved_upsample(const Options& o) {
  if (o.upsample > 0) return o.upsample;
  return o.tgt_size == 100 ? 10 : 1;
}

std::string resolved_optimizer(const Options& o) {
  if (!o.optimizer.empty()) return o.optimizer;
  return o.model_kind == "baseline" ? "sgd" : "adam";
}

double resolved_lr(const Options& o) {
  if (o.lr > 0.0) return o.lr;
  return resolved_optimizer(o) == "adam" ? 1e-3 : 0.1;
}

TrainConfig make_train_config(const Options& o) {
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  std::string opt = resolved_optimizer(o);
  if (opt != "sgd" && opt != "adam") {
    throw std::runtime_error("unknown optimizer '" + opt +
                             "'; expected sgd or adam");
  }
  cfg.optimizer = opt == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
  cfg.learning_rate = resolved_lr(o);
  cfg.seed = o.seed;
  cfg.dropout = o.dropout;
  cfg.clip = o.clip;
  cfg.workers = resolved_workers(o);
  cfg.bp.residual_threshold = o.bp_threshold;
  cfg.bp.max_iterations = o.bp_max_iters;
  cfg.emitter.char_dim = o.char_dim;
  cfg.emitter.hidden_dim = o.hidden_dim;
  cfg.emitter.num_layers = o.layers;
  if (o.model_kind == "tagwise") {
    cfg.topology.use_transition = false;
    cfg.topology.use_pairwise = false;
  } else {
    cfg.topology.use_transition = !o.no_transition;
    cfg.topology.use_pairwise = !o.no_pairwise;
  }
  return cfg;
}

json config_echo(const Options& o, const std::string& command) {
  json j;
  j["command"] = command;
  j["model"] = o.model_kind;
  j["seed"] = o.seed;
  j["epochs"] = o.epochs;
  j["batch_size"] = o.batch_size;
  j["optimizer"] = resolved_optimizer(o);
  j["lr"] = resolved_lr(o);
  j["dropout"] = o.dropout;
  j["clip"] = o.clip;
  j["workers"] = resolved_workers(o);
  j["char_dim"] = o.char_dim;
  j["hidden_dim"] = o.hidden_dim;
  j["layers"] = o.layers;
  j["bp_threshold"] = o.bp_threshold;
  j["bp_max_iters"] = o.bp_max_iters;
  if (o.model_kind == "tagwise") {
    j["use_transition"] = false;
    j["use_pairwise"] = false;
  } else {
    j["use_transition"] = !o.no_transition;
    j["use_pairwise"] = !o.no_pairwise;
  }
  if (!o.hrl_path.empty()) {
    j["hrl_train"] = o.hrl_path;
    j["hrl_lang"] = lang_or_stem(o.hrl_lang, o.hrl_path);
    j["lrl_train"] = o.lrl_path;
    j["lrl_lang"] = lang_or_stem(o.lrl_lang, o.lrl_path);
    j["tgt_size"] = o.tgt_size;
    j["upsample"] = resolved_upsample(o);
    j["random_lrl_pick"] = o.random_lrl;
  }
  if (!o.train_path.empty()) {
    j["train"] = o.train_path;
    j["train_lang"] = lang_or_stem(o.train_lang, o.train_path);
  }
  if (!o.dev_path.empty()) {
    j["dev"] = o.dev_path;
    j["dev_lang"] = lang_or_stem(o.dev_lang, o.dev_path);
  }
  if (!o.test_path.empty()) {
    j["test"] = o.test_path;
    j["test_lang"] = lang_or_stem(o.test_lang, o.test_path);
  }
  return j;
}

Corpus load_training_corpus(const Options& o) {
  bool plain = !o.train_path.empty();
  bool mixture = !o.hrl_path.empty() || !o.lrl_path.empty();
  if (plain == mixture) {
    throw std::runtime_error(
        "training data: give either --train, or both --hrl-train and "
        "--lrl-train");
  }
  if (plain) {
    return parse_conllu_file(o.train_path, lang_or_stem(o.train_lang, o.train_path));
  }
  if (o.hrl_path.empty() || o.lrl_path.empty()) {
    throw std::runtime_error(
        "cross-lingual training needs both --hrl-train and --lrl-train");
  }
  Corpus hrl = parse_conllu_file(o.hrl_path, lang_or_stem(o.hrl_lang, o.hrl_path));
  Corpus lrl = parse_conllu_file(o.lrl_path, lang_or_stem(o.lrl_lang, o.lrl_path));
  SplitConfig split;
  split.tgt_size = o.tgt_size;
  split.upsample_factor = resolved_upsample(o);
  split.hrl_language = hrl.sentences.empty() ? "" : hrl.sentences[0].language_id;
  split.lrl_language = lrl.sentences.empty() ? "" : lrl.sentences[0].language_id;
  return o.random_lrl ? make_training_mixture_random(hrl, lrl, split, o.seed)
                      : make_training_mixture(hrl, lrl, split);
}

json metrics_line(const EpochMetrics& m) {
  json j;
  j["epoch"] = m.epoch;
  j["train_nll"] = m.surrogate_nll;
  j["bp_nonconverged"] = m.bp_nonconverged;
  if (m.has_dev) {
    j["dev_accuracy"] = m.dev_accuracy;
    j["dev_f1_micro"] = m.dev_f1_micro;
    j["dev_f1_macro"] = m.dev_f1_macro;
  }
  j["seconds"] = m.seconds;
  return j;
}

json report_to_json(const EvalReport& r) {
  json j;
  j["sentences"] = r.num_sentences;
  j["tokens"] = r.num_tokens;
  j["token_accuracy"] = r.token_accuracy;
  j["f1_micro"] = r.f1_micro;
  j["f1_macro"] = r.f1_macro;
  json types = json::array();
  for (const auto& ts : r.per_type) {
    types.push_back(json{{"tag", ts.name},
                         {"precision", ts.precision},
                         {"recall", ts.recall},
                         {"f1", ts.f1},
                         {"tp", ts.tp},
                         {"fp", ts.fp},
                         {"fn", ts.fn},
                         {"in_gold", ts.in_gold}});
  }
  j["per_type"] = std::move(types);
  return j;
}

int cmd_train(const Options& o) {
  if (o.out_path.empty()) {
    throw std::runtime_error("train: --out <model-file> is required");
  }
  if (o.model_kind != "fcrf" && o.model_kind != "baseline" &&
      o.model_kind != "tagwise") {
    throw std::runtime_error("unknown --model '" + o.model_kind +
                             "'; expected fcrf, baseline or tagwise");
  }
  json echo = config_echo(o, "train");
  std::cout << "config: " << echo.dump() << "\n";

  Corpus corpus = load_training_corpus(o);
  TagSchema schema = build_schema(corpus);
  std::cout << "training sentences: " << corpus.sentences.size()
            << ", tokens: " << corpus.num_tokens()
            << ", tag types: " << schema.num_tag_types() << "\n";

  std::set<std::string> train_langs;
  for (const Sentence& s : corpus.sentences) train_langs.insert(s.language_id);
  auto check_lang = [&](const char* what, const std::string& lang,
                        const char* flag) {
    if (train_langs.count(lang)) return;
    std::string known;
    for (const auto& l : train_langs) known += (known.empty() ? "" : ", ") + l;
    throw std::runtime_error(std::string(what) + " language '" + lang +
                             "' is not in the training data (" + known +
                             "); pass " + flag);
  };

  Corpus dev;
  bool has_dev = !o.dev_path.empty();
  if (has_dev) {
    std::string lang = lang_or_stem(o.dev_lang, o.dev_path);
    check_lang("dev", lang, "--dev-lang");
    dev = parse_conllu_file(o.dev_path, lang);
  }

  std::string metrics_path =
      o.metrics_path.empty() ? o.out_path + ".metrics.jsonl" : o.metrics_path;
  std::ofstream metrics(metrics_path);
  if (!metrics) {
    throw std::runtime_error("cannot write metrics file '" + metrics_path + "'");
  }
  metrics << json{{"config", echo}}.dump() << "\n";

  TrainConfig cfg = make_train_config(o);
  auto callback = [&](const EpochMetrics& m) {
    metrics << metrics_line(m).dump() << "\n";
    metrics.flush();
    std::cerr << "epoch " << m.epoch << ": train nll " << m.surrogate_nll;
    if (m.has_dev) {
      std::cerr << ", dev acc " << m.dev_accuracy << ", dev f1-micro "
                << m.dev_f1_micro;
    }
    std::cerr << " (" << m.seconds << "s)\n";
  };

  Corpus test;
  bool has_test = !o.test_path.empty();
  if (has_test) {
    std::string lang = lang_or_stem(o.test_lang, o.test_path);
    check_lang("test", lang, "--test-lang");
    test = parse_conllu_file(o.test_path, lang);
  }
  std::vector<std::vector<TagAssignment>> test_preds;

  if (o.model_kind == "baseline") {
    BaselineTrainResult result =
        baseline_train(corpus, schema, cfg, has_dev ? &dev : nullptr, callback);
    save_baseline(o.out_path, result.model, echo);
    std::cout << "tag-set classes: " << result.model.tagsets.size() << "\n";
    if (result.best_epoch > 0) {
      std::cout << "best epoch: " << result.best_epoch << "\n";
    }
    if (has_test) {
      test_preds = predict_corpus_baseline(result.model, test, cfg.workers);
    }
  } else {
    TrainResult result =
        train(corpus, schema, cfg, has_dev ? &dev : nullptr, callback);
    save_fcrf(o.out_path, result.model, echo);
    if (result.best_epoch > 0) {
      std::cout << "best epoch: " << result.best_epoch << "\n";
    }
    if (has_test) {
      test_preds = predict_corpus_fcrf(result.model, test, cfg.bp, cfg.workers);
    }
  }
  if (has_test) {
    EvalReport report = evaluate(test_preds, test, schema);
    metrics << json{{"test", report_to_json(report)}}.dump() << "\n";
    std::cout << "test: accuracy " << report.token_accuracy << ", f1-micro "
              << report.f1_micro << ", f1-macro " << report.f1_macro << "\n";
  }
  std::cout << "model written to " << o.out_path << "\n";
  return 0;
}

int cmd_tag(const Options& o) {
  LoadedModel model = load_model(o.model_file);
  Corpus corpus =
      parse_conllu_file(o.input_path, lang_or_stem(o.input_lang, o.input_path));
  const EmitterParams& emitter =
      model.type == "fcrf" ? model.fcrf.emitter : model.baseline.emitter;
  std::set<std::string> known;
  for (const auto& [lang, _] : emitter.heads) known.insert(lang);
  apply_language_fallback(&corpus, known, o.lang_fallback);

  std::vector<std::vector<TagAssignment>> preds;
  const TagSchema& schema =
      model.type == "fcrf" ? model.fcrf.schema : model.baseline.schema;
  if (model.type == "fcrf") {
    BpConfig bp{o.bp_threshold, o.bp_max_iters};
    int nonconverged = 0;
    preds = predict_corpus_fcrf(model.fcrf, corpus, bp, resolved_workers(o),
                                &nonconverged);
    if (nonconverged > 0) {
      std::cerr << "bp did not converge on " << nonconverged << " of "
                << corpus.sentences.size() << " sentences\n";
    }
  } else {
    preds = predict_corpus_baseline(model.baseline, corpus, resolved_workers(o));
  }

  if (o.out_path.empty() || o.out_path == "-") {
    write_conllu(std::cout, corpus, &preds, &schema);
  } else {
    std::ofstream out(o.out_path);
    if (!out) throw std::runtime_error("cannot write '" + o.out_path + "'");
    write_conllu(out, corpus, &preds, &schema);
    std::cerr << "predictions written to " << o.out_path << "\n";
  }
  return 0;
}

int cmd_eval(const Options& o) {
  EvalReport report;
  if (!o.model_file.empty()) {
    if (o.input_path.empty()) {
      throw std::runtime_error("eval: --input <gold-conllu> is required with "
                               "--model-file");
    }
    LoadedModel model = load_model(o.model_file);
    Corpus corpus = parse_conllu_file(o.input_path,
                                      lang_or_stem(o.input_lang, o.input_path));
    const EmitterParams& emitter =
        model.type == "fcrf" ? model.fcrf.emitter : model.baseline.emitter;
    std::set<std::string> known;
    for (const auto& [lang, _] : emitter.heads) known.insert(lang);
    apply_language_fallback(&corpus, known, o.lang_fallback);

    std::vector<std::vector<TagAssignment>> preds;
    if (model.type == "fcrf") {
      BpConfig bp{o.bp_threshold, o.bp_max_iters};
      preds = predict_corpus_fcrf(model.fcrf, corpus, bp, resolved_workers(o));
      report = evaluate(preds, corpus, model.fcrf.schema);
    } else {
      preds = predict_corpus_baseline(model.baseline, corpus, resolved_workers(o));
      report = evaluate(preds, corpus, model.baseline.schema);
    }
  } else if (!o.pred_path.empty() && !o.gold_path.empty()) {
    Corpus pred = parse_conllu_file(o.pred_path, "pred");
    Corpus gold = parse_conllu_file(o.gold_path, "gold");
    std::vector<std::vector<PartialAnnotation>> annotations;
    annotations.reserve(pred.sentences.size());
    for (size_t s = 0; s < pred.sentences.size(); ++s) {
      if (!pred.sentences[s].gold) {
        throw std::runtime_error("prediction file: sentence " +
                                 std::to_string(s) + " has no annotations");
      }
      annotations.push_back(*pred.sentences[s].gold);
    }
    report = evaluate_annotations(annotations, gold);
  } else {
    throw std::runtime_error(
        "eval: give --model-file with --input, or --pred with --gold");
  }

  if (o.json_output) {
    std::cout << report_to_json(report).dump(1, '\t') << "\n";
  } else {
    std::cout << format_report(report);
  }
  return 0;
}

int cmd_export(const Options& o) {
  LoadedModel model = load_model(o.model_file);
  if (model.type != "fcrf") {
    throw std::runtime_error("weight export needs an fcrf model; this file is '" +
                             model.type + "'");
  }
  WeightSelection sel = select_weights(model.fcrf, o.what, o.tags, o.scope);
  std::string csv = to_csv(sel);
  if (o.out_path.empty() || o.out_path == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(o.out_path);
    if (!out) throw std::runtime_error("cannot write '" + o.out_path + "'");
    out << csv;
    std::cerr << "weights written to " << o.out_path << "\n";
  }
  return 0;
}

int cmd_ablate(const Options& o) {
  if (o.dev_path.empty()) {
    throw std::runtime_error("ablate: --dev <conllu> is required (evaluation set)");
  }
  json echo = config_echo(o, "ablate");
  std::cout << "config: " << echo.dump() << "\n";

  Corpus corpus = load_training_corpus(o);
  TagSchema schema = build_schema(corpus);
  std::set<std::string> train_langs;
  for (const Sentence& s : corpus.sentences) train_langs.insert(s.language_id);
  auto check_lang = [&](const char* what, const std::string& lang,
                        const char* flag) {
    if (train_langs.count(lang)) return;
    std::string known;
    for (const auto& l : train_langs) known += (known.empty() ? "" : ", ") + l;
    throw std::runtime_error(std::string(what) + " language '" + lang +
                             "' is not in the training data (" + known +
                             "); pass " + flag);
  };
  std::string dev_lang = lang_or_stem(o.dev_lang, o.dev_path);
  check_lang("dev", dev_lang, "--dev-lang");
  Corpus dev = parse_conllu_file(o.dev_path, dev_lang);
  Corpus test;
  bool has_test = !o.test_path.empty();
  if (has_test) {
    std::string lang = lang_or_stem(o.test_lang, o.test_path);
    check_lang("test", lang, "--test-lang");
    test = parse_conllu_file(o.test_path, lang);
  }

  struct Variant {
    const char* name;
    bool transition, pairwise;
  };
  const Variant variants[] = {{"transition+pairwise", true, true},
                              {"transition-only", true, false},
                              {"pairwise-only", false, true},
                              {"neither (tag-wise)", false, false}};

  json rows = json::array();
  std::cout << "\nvariant               accuracy  f1-micro  f1-macro";
  if (has_test) std::cout << "  test-acc  test-f1-micro  test-f1-macro";
  std::cout << "\n";
  for (const Variant& v : variants) {
    TrainConfig cfg = make_train_config(o);
    cfg.topology.use_transition = v.transition;
    cfg.topology.use_pairwise = v.pairwise;
    TrainResult result = train(corpus, schema, cfg);
    auto preds = predict_corpus_fcrf(result.model, dev, cfg.bp, cfg.workers);
    EvalReport report = evaluate(preds, dev, schema);
    std::printf("%-20s  %8.4f  %8.4f  %8.4f", v.name, report.token_accuracy,
                report.f1_micro, report.f1_macro);
    json row{{"variant", v.name},
             {"token_accuracy", report.token_accuracy},
             {"f1_micro", report.f1_micro},
             {"f1_macro", report.f1_macro}};
    if (has_test) {
      auto tpred = predict_corpus_fcrf(result.model, test, cfg.bp, cfg.workers);
      EvalReport trep = evaluate(tpred, test, schema);
      std::printf("  %8.4f  %13.4f  %13.4f", trep.token_accuracy,
                  trep.f1_micro, trep.f1_macro);
      row["test_token_accuracy"] = trep.token_accuracy;
      row["test_f1_micro"] = trep.f1_micro;
      row["test_f1_macro"] = trep.f1_macro;
    }
    std::printf("\n");
    rows.push_back(std::move(row));
  }
  if (o.json_output) {
    std::cout << json{{"ablation", rows}}.dump(1, '\t') << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;

  // The config file overlays defaults before CLI11 parses, so explicit
  // flags always win.
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    try {
      if (arg == "--config" && i + 1 < argc) {
        apply_config_file(argv[i + 1], &o);
      } else if (arg.rfind("--config=", 0) == 0) {
        apply_config_file(arg.substr(9), &o);
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  CLI::App app{"Cross-lingual morphological tagging with a neural factorial CRF"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path,
                    "JSON config file; explicit flags override its values");
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    cmd->add_option("--seed", o.seed, "RNG seed");
  };
  auto add_bp = [&](CLI::App* cmd) {
    cmd->add_option("--bp-threshold", o.bp_threshold,
                    "BP residual convergence threshold");
    cmd->add_option("--bp-max-iters", o.bp_max_iters, "BP sweep cap");
  };
  auto add_training_data = [&](CLI::App* cmd) {
    cmd->add_option("--train", o.train_path, "monolingual training CoNLL-U");
    cmd->add_option("--train-lang", o.train_lang,
                    "language id (default: file stem)");
    cmd->add_option("--hrl-train", o.hrl_path, "high-resource training CoNLL-U");
    cmd->add_option("--hrl-lang", o.hrl_lang, "HRL id (default: file stem)");
    cmd->add_option("--lrl-train", o.lrl_path, "low-resource training CoNLL-U");
    cmd->add_option("--lrl-lang", o.lrl_lang, "LRL id (default: file stem)");
    cmd->add_option("--tgt-size", o.tgt_size, "LRL sentences in the mixture");
    cmd->add_option("--upsample", o.upsample,
                    "LRL repetition factor (0 = auto: 10 at tgt-size 100)");
    cmd->add_flag("--random-lrl-pick", o.random_lrl,
                  "sample the LRL subset with the seed instead of first-K");
    cmd->add_option("--dev", o.dev_path, "development CoNLL-U");
    cmd->add_option("--dev-lang", o.dev_lang, "dev language id");
    cmd->add_option("--test", o.test_path,
                    "held-out CoNLL-U scored once after training");
    cmd->add_option("--test-lang", o.test_lang, "test language id");
  };
  auto add_train_hp = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--batch-size", o.batch_size, "sentences per batch");
    cmd->add_option("--optimizer", o.optimizer, "sgd | adam");
    cmd->add_option("--lr", o.lr, "learning rate (0 = optimizer default)");
    cmd->add_option("--dropout", o.dropout, "word-LSTM dropout");
    cmd->add_option("--clip", o.clip, "global gradient-norm clip (0 = off)");
    cmd->add_option("--char-dim", o.char_dim, "character embedding/LSTM dim");
    cmd->add_option("--hidden-dim", o.hidden_dim, "word LSTM hidden dim per direction");
    cmd->add_option("--layers", o.layers, "word LSTM layers");
    cmd->add_option("--model", o.model_kind, "fcrf | baseline | tagwise");
    cmd->add_flag("--no-transition", o.no_transition, "drop transition factors");
    cmd->add_flag("--no-pairwise", o.no_pairwise, "drop pairwise factors");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train a tagging model");
  add_training_data(train_cmd);
  add_train_hp(train_cmd);
  add_bp(train_cmd);
  add_common(train_cmd);
  train_cmd->add_option("--out", o.out_path, "output model file")->required();
  train_cmd->add_option("--metrics", o.metrics_path,
                        "metrics JSONL path (default <out>.metrics.jsonl)");

  CLI::App* tag_cmd = app.add_subcommand("tag", "tag a CoNLL-U file");
  tag_cmd->add_option("--model-file", o.model_file, "trained model")->required();
  tag_cmd->add_option("--input", o.input_path, "input CoNLL-U")->required();
  tag_cmd->add_option("--lang", o.input_lang, "input language id (default: file stem)");
  tag_cmd->add_option("--output", o.out_path, "output CoNLL-U ('-' = stdout)");
  tag_cmd->add_option("--lang-fallback", o.lang_fallback,
                      "head to use for untrained languages");
  add_bp(tag_cmd);
  add_common(tag_cmd);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate predictions");
  eval_cmd->add_option("--model-file", o.model_file, "trained model to run");
  eval_cmd->add_option("--input", o.input_path, "gold CoNLL-U to tag and score");
  eval_cmd->add_option("--lang", o.input_lang, "input language id");
  eval_cmd->add_option("--pred", o.pred_path, "predicted CoNLL-U (file-vs-file mode)");
  eval_cmd->add_option("--gold", o.gold_path, "gold CoNLL-U (file-vs-file mode)");
  eval_cmd->add_flag("--json", o.json_output, "machine-readable report");
  eval_cmd->add_option("--lang-fallback", o.lang_fallback,
                       "head to use for untrained languages");
  add_bp(eval_cmd);
  add_common(eval_cmd);

  CLI::App* export_cmd =
      app.add_subcommand("export-weights", "dump factor weights as labeled CSV");
  export_cmd->add_option("--model-file", o.model_file, "trained fcrf model")
      ->required();
  export_cmd->add_option("--what", o.what, "transition | pairwise")->required();
  export_cmd->add_option("--tag", o.tags, "tag name (twice for pairwise)")
      ->required()
      ->expected(1, 2);
  export_cmd->add_option("--scope", o.scope, "gen | lang:<id> | sum:<id>");
  export_cmd->add_option("--output", o.out_path, "CSV path ('-' = stdout)");

  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "train and score the four factor topologies");
  add_training_data(ablate_cmd);
  add_train_hp(ablate_cmd);
  add_bp(ablate_cmd);
  add_common(ablate_cmd);
  ablate_cmd->add_flag("--json", o.json_output, "also emit a JSON table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(o);
    if (tag_cmd->parsed()) return cmd_tag(o);
    if (eval_cmd->parsed()) return cmd_eval(o);
    if (export_cmd->parsed()) return cmd_export(o);
    if (ablate_cmd->parsed()) return cmd_ablate(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
