// Copyright 2026 The Tsex Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: simulate, train, adapt, extract, retrain-weak,
// evaluate, plus train-classifier for the tagger used by retrain-weak.
//
// Every subcommand accepts --config FILE and repeated --set section.key=value
// overrides (flags win over the file). Relative output paths are placed
// under $TSEX_OUTPUT_ROOT when that variable is set. Failures exit with a
// code naming the error category; see ExitCode below.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsex/adaptation.h"
#include "tsex/classifier.h"
#include "tsex/config.h"
#include "tsex/dataset.h"
#include "tsex/errors.h"
#include "tsex/evaluation.h"
#include "tsex/model.h"
#include "tsex/simulator.h"
#include "tsex/training.h"
#include "tsex/wav_io.h"
#include "tsex/weak_retrain.h"

namespace fs = std::filesystem;

namespace tsex {
namespace {

int ExitCode(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kParse: return 10;
    case ErrorCategory::kVocabulary: return 11;
    case ErrorCategory::kLength: return 12;
    case ErrorCategory::kShape: return 13;
    case ErrorCategory::kConfig: return 14;
    case ErrorCategory::kIo: return 15;
    case ErrorCategory::kDivergence: return 16;
    case ErrorCategory::kPrecondition: return 17;
  }
  return 1;
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;

  ConfigTree Load() const {
    ConfigTree tree = config_path.empty() ? ConfigTree() : ConfigTree::Load(config_path);
    for (const auto& o : overrides) tree.ApplyOverride(o);
    tree.CheckKnownKeys();
    return tree;
  }
};

fs::path OutputPath(const std::string& path) {
  fs::path p(path);
  const char* root = std::getenv("TSEX_OUTPUT_ROOT");
  if (p.is_relative() && root != nullptr && *root != '\0') p = fs::path(root) / p;
  return p;
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  boost::split(out, text, boost::is_any_of(","));
  for (auto& s : out) boost::trim(s);
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

void Print(const nlohmann::json& j) { std::cout << j.dump(2) << std::endl; }

// Enrollment and mixed training need one enrollment per target label.
void RequireEnrollments(const std::vector<TrainingExample>& examples,
                        const std::string& split) {
  for (const auto& ex : examples) {
    Require(ex.enrollments.size() == ex.example.target.labels.size(),
            ErrorCategory::kPrecondition,
            split + " record " + ex.id + " lacks enrollments for its targets");
  }
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  Common common;
  std::string out;
};

int RunSimulate(const SimulateArgs& a) {
  const ConfigTree tree = a.common.Load();
  const SimulatorConfig config = ReadSimulatorConfig(tree);
  const fs::path out = OutputPath(a.out);
  const SimulatedDataset d = GenerateDataset(config, ToyClassBank::Default());
  MaterializeDataset(d, config, out);
  Print({{"out", out.string()},
         {"classes", d.vocabulary.names()},
         {"train", d.train.size()},
         {"valid", d.valid.size()},
         {"test", d.test.size()}});
  return 0;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string data;
  std::string out;
  std::string resume;
  std::string log;
};

int RunTrain(const TrainArgs& a) {
  const ConfigTree tree = a.common.Load();
  TrainConfig tc = ReadTrainConfig(tree);
  const fs::path data(a.data);
  const Vocabulary vocab = Vocabulary::Load(data / "vocabulary.txt");
  const auto train = LoadExamples(data / "train.jsonl", vocab.size());
  const auto valid = LoadExamples(data / "valid.jsonl", vocab.size());
  if (tc.clue_mode != TrainClueMode::kClass) {
    RequireEnrollments(train, "train");
    RequireEnrollments(valid, "valid");
  }
  TseModel model;
  if (!a.resume.empty()) {
    model = TseModel::Load(a.resume);
    Require(model.vocabulary() == vocab, ErrorCategory::kVocabulary,
            "checkpoint vocabulary differs from the dataset's");
  } else {
    model = TseModel(ReadModelConfig(tree), vocab, tc.seed);
  }
  tc.checkpoint_path = OutputPath(a.out);
  EnsureParent(tc.checkpoint_path);
  if (!a.log.empty()) tc.log_path = OutputPath(a.log);
  model.metadata["config"] = tree.ToJson();
  const TrainReport r = TrainModel(&model, train, valid, tc);
  model.Save(tc.checkpoint_path);
  Print({{"checkpoint", tc.checkpoint_path.string()},
         {"clue_mode", TrainClueModeName(tc.clue_mode)},
         {"epochs_run", r.epochs.size()},
         {"initial_valid_loss", r.initial_valid_loss},
         {"best_valid_loss", r.best_valid_loss},
         {"best_epoch", r.best_epoch},
         {"forward_passes", r.forward_passes}});
  return 0;
}

// ---------------------------------------------------------- train-classifier

struct ClassifierArgs {
  Common common;
  std::string data;
  std::string out;
};

int RunTrainClassifier(const ClassifierArgs& a) {
  const ConfigTree tree = a.common.Load();
  const ClassifierTrainConfig tc = ReadClassifierTrainConfig(tree);
  const fs::path data(a.data);
  const Vocabulary vocab = Vocabulary::Load(data / "vocabulary.txt");
  const auto train = TaggingSet(LoadExamples(data / "train.jsonl", vocab.size()));
  const auto valid = TaggingSet(LoadExamples(data / "valid.jsonl", vocab.size()));
  ClassifierConfig cc;
  cc.channels = tree.GetInt("classifier.channels", cc.channels);
  Classifier classifier(cc, vocab, tc.seed);
  const ClassifierTrainReport r = TrainClassifier(&classifier, train, valid, tc);
  const fs::path out = OutputPath(a.out);
  EnsureParent(out);
  classifier.metadata["config"] = tree.ToJson();
  classifier.Save(out);
  Print({{"checkpoint", out.string()},
         {"initial_valid_loss", r.initial_valid_loss},
         {"best_valid_loss", r.best_valid_loss},
         {"best_epoch", r.best_epoch}});
  return 0;
}

// --------------------------------------------------------------------- adapt

struct AdaptArgs {
  Common common;
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string sets_dir;
  std::string classes;
  std::optional<int> shots;
  std::vector<std::string> enroll;  // name=a.wav,b.wav
};

int RunAdapt(const AdaptArgs& a) {
  const ConfigTree tree = a.common.Load();
  const AdaptConfig ac = ReadAdaptConfig(tree);
  SimulatorConfig sc = ReadSimulatorConfig(tree);
  const int shots = a.shots.value_or(tree.GetInt("adapt.shots", 5));
  Require(shots >= 1, ErrorCategory::kConfig, "adaptation needs at least one shot per class");
  const int train_size = tree.GetInt("adapt.train_size", 40);
  const int valid_size = tree.GetInt("adapt.valid_size", 16);
  const int test_size = tree.GetInt("adapt.test_size", 40);

  const ToyClassBank bank = ToyClassBank::Default();
  std::vector<std::string> names = SplitList(
      a.classes.empty() ? tree.GetString("adapt.classes", "") : a.classes);
  std::map<std::string, std::vector<Waveform>> from_files;
  for (const auto& spec : a.enroll) {
    const auto eq = spec.find('=');
    Require(eq != std::string::npos, ErrorCategory::kConfig,
            "--enroll expects name=file1.wav,file2.wav");
    const std::string name = boost::trim_copy(spec.substr(0, eq));
    for (const auto& path : SplitList(spec.substr(eq + 1))) {
      from_files[name].push_back(ReadWav(path));
    }
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  if (names.empty()) names = bank.NewNames();

  const Rng root(ac.seed);
  Rng shot_rng = root.Fork(1);
  Rng held_rng = root.Fork(2);
  // Held-out samples for the test mixtures only exist for bank classes.
  std::vector<std::pair<std::string, std::vector<Waveform>>> classes;
  std::vector<std::vector<Waveform>> held_out;
  for (const auto& name : names) {
    auto it = from_files.find(name);
    if (it != from_files.end()) {
      Require(static_cast<int>(it->second.size()) >= 1, ErrorCategory::kConfig,
              "no enrollments for " + name);
      classes.emplace_back(name, it->second);
      held_out.push_back({});
      continue;
    }
    const Vocabulary one({name});
    classes.emplace_back(name, BuildPool(bank, one, shots, sc, shot_rng).samples[0]);
    held_out.push_back(BuildPool(bank, one, sc.pool_test_per_class, sc, held_rng).samples[0]);
  }

  TseModel model = TseModel::Load(a.checkpoint);
  const fs::path data(a.data);
  const SamplePool seen_train = LoadPool(data / "pool" / "train", model.vocabulary());
  const SamplePool seen_test = LoadPool(data / "pool" / "test", model.vocabulary());
  const std::vector<int> ids = AddNewClasses(&model, classes);

  std::map<int, std::vector<Waveform>> shot_map, held_map;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    shot_map[ids[i]] = classes[i].second;
    if (held_out[i].size() >= 2) held_map[ids[i]] = held_out[i];
  }
  Rng train_rng = root.Fork(3), valid_rng = root.Fork(4), test_rng = root.Fork(5);
  const auto train = GenerateAdaptationSet(shot_map, seen_train, sc, train_rng, train_size);
  const auto valid = GenerateAdaptationSet(shot_map, seen_train, sc, valid_rng, valid_size);

  const double before = AdaptationLoss(model, valid, ac.loss);
  const AdaptReport r = FinetuneNewEmbeddings(&model, ids, train, valid, ac);
  const fs::path out = OutputPath(a.out);
  EnsureParent(out);
  model.metadata["adapt_config"] = tree.ToJson();
  model.Save(out);

  const fs::path sets = a.sets_dir.empty() ? out.parent_path() / "adapt_sets"
                                           : OutputPath(a.sets_dir);
  fs::create_directories(sets);
  model.vocabulary().Save(sets / "vocabulary.txt");
  WriteExamples(train, sets, "adapt_train");
  WriteExamples(valid, sets, "adapt_valid");
  if (!held_map.empty()) {
    WriteExamples(GenerateAdaptationSet(held_map, seen_test, sc, test_rng, test_size),
                  sets, "adapt_test");
  }
  Print({{"checkpoint", out.string()},
         {"new_classes", names},
         {"new_ids", ids},
         {"shots", shots},
         {"valid_loss_averaged", before},
         {"valid_loss_finetuned", r.best_valid_loss},
         {"best_epoch", r.best_epoch},
         {"sets", sets.string()}});
  return 0;
}

// ------------------------------------------------------------------- extract

struct ExtractArgs {
  Common common;
  std::string checkpoint;
  std::string mixture;
  std::string labels;
  std::string enroll;
  std::string out;
};

int RunExtract(const ExtractArgs& a) {
  Require(a.labels.empty() != a.enroll.empty(), ErrorCategory::kConfig,
          "give exactly one of --labels and --enroll");
  const TseModel model = TseModel::Load(a.checkpoint);
  const Waveform mixture = ReadWav(a.mixture);
  Clue clue;
  if (!a.labels.empty()) {
    std::vector<int> ids;
    for (const auto& name : SplitList(a.labels)) ids.push_back(model.vocabulary().IndexOf(name));
    clue = LabelSet::Of(ids);
  } else {
    EnrollmentSet set;
    for (const auto& path : SplitList(a.enroll)) set.audios.push_back(ReadWav(path));
    clue = set;
  }
  const Waveform out = model.Extract(mixture, clue);
  const fs::path path = OutputPath(a.out);
  EnsureParent(path);
  WriteWav(path, out);
  Print({{"out", path.string()}, {"samples", out.size()}});
  return 0;
}

// -------------------------------------------------------------- retrain-weak

struct WeakArgs {
  Common common;
  std::string checkpoint;
  std::string classifier;
  std::string train;
  std::string valid;
  std::string out;
};

int RunRetrainWeak(const WeakArgs& a) {
  const ConfigTree tree = a.common.Load();
  const WeakRetrainConfig wc = ReadWeakRetrainConfig(tree);
  TseModel model = TseModel::Load(a.checkpoint);
  const Classifier classifier = Classifier::Load(a.classifier);
  Require(classifier.vocabulary() == model.vocabulary(), ErrorCategory::kVocabulary,
          "classifier and model vocabularies differ");
  const int n = model.vocabulary().size();
  const auto train = LoadExamples(a.train, n);
  const auto valid = LoadExamples(a.valid, n);
  const double map_before = WeakMap(model, classifier, valid).map;
  const WeakRetrainReport r = RetrainWeak(&model, classifier, train, valid, wc);
  const double map_after = WeakMap(model, classifier, valid).map;
  const fs::path out = OutputPath(a.out);
  EnsureParent(out);
  model.metadata["weak_config"] = tree.ToJson();
  model.Save(out);
  Print({{"checkpoint", out.string()},
         {"initial_weak_loss", r.initial_valid_loss},
         {"best_weak_loss", r.best_valid_loss},
         {"best_iteration", r.best_iteration},
         {"map_before", map_before},
         {"map_after", map_after}});
  return 0;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateArgs {
  Common common;
  std::string checkpoint;
  std::string manifest;
  std::string clue_mode = "class";
  std::string probe_pool;
  bool no_probe = false;
  std::uint64_t seed = 7;
  std::string out;
};

int RunEvaluate(const EvaluateArgs& a) {
  const ConfigTree tree = a.common.Load();
  const TseModel model = TseModel::Load(a.checkpoint);
  const auto examples = LoadExamples(a.manifest, model.vocabulary().size());
  EvalOptions options;
  options.clue_mode = ParseClueMode(a.clue_mode);
  options.probe_inactive = !a.no_probe;
  options.seed = a.seed;
  SamplePool pool;
  if (!a.probe_pool.empty()) {
    pool = LoadPool(a.probe_pool, model.vocabulary());
    options.probe_pool = &pool;
  }
  EvalReport report = RunEval(examples, model, options);
  report.config["manifest"] = a.manifest;
  report.config["checkpoint"] = a.checkpoint;
  report.config["run_config"] = tree.ToJson();
  const fs::path prefix = OutputPath(a.out);
  WriteReport(report, prefix);
  const EvalAggregates& g = report.aggregates;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  Print({{"report", prefix.string()},
         {"active", g.active_count},
         {"inactive", g.inactive_count},
         {"mean_sdri_db", num(g.mean_sdri_db)},
         {"mean_si_sdr_db", num(g.mean_si_sdr_db)},
         {"mean_atten_mix_inactive_db", num(g.mean_atten_mix_inactive_db)},
         {"auc", num(g.auc)}});
  return 0;
}

void AddCommon(CLI::App* cmd, Common* c) {
  cmd->add_option("--config", c->config_path, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c->overrides, "Override one key, section.key=value (repeatable)");
}

int Main(int argc, char** argv) {
  CLI::App app{"Target sound extraction toolkit"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a toy dataset on disk");
  AddCommon(c_sim, &sim.common);
  c_sim->add_option("--out", sim.out, "Dataset directory")->required();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train an extraction model");
  AddCommon(c_tr, &tr.common);
  c_tr->add_option("--data", tr.data, "Dataset directory from simulate")->required();
  c_tr->add_option("--out", tr.out, "Checkpoint to write")->required();
  c_tr->add_option("--resume", tr.resume, "Checkpoint to continue from");
  c_tr->add_option("--log", tr.log, "Per-epoch JSONL log");

  ClassifierArgs cl;
  auto* c_cl = app.add_subcommand("train-classifier", "Train the sound-event tagger");
  AddCommon(c_cl, &cl.common);
  c_cl->add_option("--data", cl.data, "Dataset directory from simulate")->required();
  c_cl->add_option("--out", cl.out, "Checkpoint to write")->required();

  AdaptArgs ad;
  auto* c_ad = app.add_subcommand("adapt", "Add new classes from a few enrollments");
  AddCommon(c_ad, &ad.common);
  c_ad->add_option("--checkpoint", ad.checkpoint, "Trained model")->required();
  c_ad->add_option("--data", ad.data, "Dataset directory holding the seen-class pools")->required();
  c_ad->add_option("--out", ad.out, "Adapted checkpoint to write")->required();
  c_ad->add_option("--classes", ad.classes, "Comma-separated new class names");
  c_ad->add_option("--shots", ad.shots, "Enrollments per new class");
  c_ad->add_option("--enroll", ad.enroll, "name=a.wav,b.wav (repeatable)");
  c_ad->add_option("--sets-dir", ad.sets_dir, "Where adaptation manifests go");

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract", "Extract target sounds from a mixture");
  AddCommon(c_ex, &ex.common);
  c_ex->add_option("--checkpoint", ex.checkpoint, "Model checkpoint")->required();
  c_ex->add_option("--mixture", ex.mixture, "Input WAV")->required();
  c_ex->add_option("--labels", ex.labels, "Comma-separated class names");
  c_ex->add_option("--enroll", ex.enroll, "Comma-separated enrollment WAVs");
  c_ex->add_option("--out", ex.out, "Output WAV")->required();

  WeakArgs wk;
  auto* c_wk = app.add_subcommand("retrain-weak", "Retrain the mixture stack from weak labels");
  AddCommon(c_wk, &wk.common);
  c_wk->add_option("--checkpoint", wk.checkpoint, "Model checkpoint")->required();
  c_wk->add_option("--classifier", wk.classifier, "Tagger checkpoint")->required();
  c_wk->add_option("--train", wk.train, "Weakly labeled training manifest")->required();
  c_wk->add_option("--valid", wk.valid, "Weakly labeled validation manifest")->required();
  c_wk->add_option("--out", wk.out, "Checkpoint to write")->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score a model on a manifest");
  AddCommon(c_ev, &ev.common);
  c_ev->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  c_ev->add_option("--manifest", ev.manifest, "Manifest with stems")->required();
  c_ev->add_option("--clue-mode", ev.clue_mode, "class or enroll");
  c_ev->add_option("--probe-pool", ev.probe_pool, "Pool directory for enrollment probes");
  c_ev->add_flag("--no-probe", ev.no_probe, "Skip the absent-class probe queries");
  c_ev->add_option("--seed", ev.seed, "Probe selection seed");
  c_ev->add_option("--out", ev.out, "Report prefix")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*c_sim) return RunSimulate(sim);
    if (*c_tr) return RunTrain(tr);
    if (*c_cl) return RunTrainClassifier(cl);
    if (*c_ad) return RunAdapt(ad);
    if (*c_ex) return RunExtract(ex);
    if (*c_wk) return RunRetrainWeak(wk);
    if (*c_ev) return RunEvaluate(ev);
  } catch (const Error& e) {
    std::cerr << "tsex: " << e.what() << std::endl;
    return ExitCode(e.category());
  } catch (const std::exception& e) {
    std::cerr << "tsex: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}

}  // namespace
}  // namespace tsex

int main(int argc, char** argv) { return tsex::Main(argc, argv); }
