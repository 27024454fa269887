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

#include "tsex/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tsex/errors.h"
#include "tsex/model.h"
#include "tsex/rng.h"
#include "tsex/simulator.h"

namespace tsex {
namespace {

double Clamp(double db) {
  return std::clamp(db, -kSiSdrClampDb, kSiSdrClampDb);
}

double EnergyRatioDb(const Vec& est, const Vec& ref) {
  const double ref_energy = ref.squaredNorm();
  Require(ref_energy > 0.0, ErrorCategory::kPrecondition,
          "attenuation needs a nonzero reference");
  const double est_energy = est.squaredNorm();
  if (est_energy == 0.0) return kAttenuationFloorDb;
  return std::max(kAttenuationFloorDb,
                  10.0 * std::log10(est_energy / ref_energy));
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double SiSdr(const Vec& est, const Vec& ref) {
  Require(est.size() == ref.size(), ErrorCategory::kLength,
          "SI-SDR inputs differ in length");
  const double ref_energy = ref.squaredNorm();
  Require(ref_energy > 0.0, ErrorCategory::kPrecondition,
          "SI-SDR needs a nonzero reference");
  const double alpha = est.dot(ref) / ref_energy;
  const Vec target = alpha * ref;
  const double target_energy = target.squaredNorm();
  const double noise_energy = (est - target).squaredNorm();
  if (target_energy == 0.0) return -kSiSdrClampDb;
  if (noise_energy == 0.0) return kSiSdrClampDb;
  return Clamp(10.0 * std::log10(target_energy / noise_energy));
}

double SiSdr(const Waveform& est, const Waveform& ref) {
  return SiSdr(est.samples(), ref.samples());
}

double SdrImprovement(const Waveform& est, const Waveform& ref,
                      const Waveform& mixture) {
  return SiSdr(est, ref) - SiSdr(mixture, ref);
}

double AttenuationMix(const Waveform& est, const Waveform& mixture) {
  RequireCompatible(est, mixture);
  return EnergyRatioDb(est.samples(), mixture.samples());
}

double AttenuationSrc(const Waveform& est, const Waveform& stem) {
  RequireCompatible(est, stem);
  return EnergyRatioDb(est.samples(), stem.samples());
}

const Waveform& MinPowerStem(const MixtureExample& example) {
  Require(!example.stems.empty(), ErrorCategory::kPrecondition,
          "mixture has no stems");
  const Waveform* best = nullptr;
  for (const auto& [id, stem] : example.stems) {
    if (best == nullptr || stem.Energy() < best->Energy()) best = &stem;
  }
  return *best;
}

RocCurve InactiveDetectionAuc(const std::vector<double>& scores,
                              const std::vector<bool>& inactive) {
  Require(scores.size() == inactive.size(), ErrorCategory::kShape,
          "scores and labels differ in length");
  const auto positives = static_cast<double>(
      std::count(inactive.begin(), inactive.end(), true));
  const double negatives = static_cast<double>(scores.size()) - positives;
  Require(positives > 0 && negatives > 0, ErrorCategory::kPrecondition,
          "AUC needs both active and inactive examples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  // Area is accumulated in count units (twice the trapezoids, all integers)
  // and normalized once, so the result is an exact ratio of pair counts.
  double tp = 0.0, fp = 0.0, doubled_area = 0.0;
  // Lowering the threshold past a block of tied scores admits the whole
  // block at once, which turns ties into diagonal segments.
  for (std::size_t i = 0; i < order.size();) {
    const double tp0 = tp, fp0 = fp;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (inactive[order[j]]) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
      ++j;
    }
    doubled_area += (fp - fp0) * (tp0 + tp);
    roc.points.emplace_back(fp / negatives, tp / positives);
    i = j;
  }
  roc.auc = doubled_area / (2.0 * positives * negatives);
  return roc;
}

MapResult MeanAveragePrecision(const std::vector<Vec>& posteriors,
                               const std::vector<LabelSet>& references) {
  Require(posteriors.size() == references.size(), ErrorCategory::kShape,
          "posteriors and references differ in count");
  Require(!posteriors.empty(), ErrorCategory::kPrecondition, "no examples");
  const Eigen::Index num_classes = posteriors.front().size();
  MapResult result;
  for (Eigen::Index c = 0; c < num_classes; ++c) {
    std::vector<bool> positive(posteriors.size(), false);
    for (std::size_t i = 0; i < references.size(); ++i) {
      const auto& ids = references[i].ids;
      positive[i] = std::find(ids.begin(), ids.end(), c) != ids.end();
    }
    const auto count = std::count(positive.begin(), positive.end(), true);
    if (count == 0) continue;
    std::vector<std::size_t> order(posteriors.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return posteriors[a][c] > posteriors[b][c];
                     });
    double hits = 0.0, sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (!positive[order[rank]]) continue;
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
    result.classes.push_back(static_cast<int>(c));
    result.average_precision.push_back(sum / static_cast<double>(count));
  }
  Require(!result.classes.empty(), ErrorCategory::kPrecondition,
          "no class has a positive example");
  result.map = Mean(result.average_precision);
  return result;
}

ClueMode ParseClueMode(const std::string& text) {
  if (text == "class") return ClueMode::kClass;
  if (text == "enroll") return ClueMode::kEnroll;
  Fail(ErrorCategory::kConfig, "unknown clue mode '" + text + "'");
}

std::string ClueModeName(ClueMode mode) {
  return mode == ClueMode::kClass ? "class" : "enroll";
}

EvalAggregates ComputeAggregates(const std::vector<EvalRow>& rows) {
  EvalAggregates a;
  std::vector<double> si_sdr, sdri, atten_mix, atten_src, scores;
  std::vector<bool> inactive;
  for (const auto& r : rows) {
    scores.push_back(r.detection_score);
    inactive.push_back(!r.active);
    if (r.active) {
      ++a.active_count;
      si_sdr.push_back(r.si_sdr_db);
      sdri.push_back(r.sdri_db);
    } else {
      ++a.inactive_count;
      atten_mix.push_back(r.atten_mix_db);
      atten_src.push_back(r.atten_src_db);
    }
  }
  a.mean_si_sdr_db = Mean(si_sdr);
  a.mean_sdri_db = Mean(sdri);
  a.mean_atten_mix_inactive_db = Mean(atten_mix);
  a.mean_atten_src_inactive_db = Mean(atten_src);
  a.auc = (a.active_count > 0 && a.inactive_count > 0)
              ? InactiveDetectionAuc(scores, inactive).auc
              : std::numeric_limits<double>::quiet_NaN();
  return a;
}

namespace {

EvalRow ScoreRow(const std::string& id, const std::vector<int>& labels,
                 const Waveform& est, const MixtureExample& ex) {
  EvalRow row;
  row.example_id = id;
  row.labels = labels;
  bool any_present = false;
  for (int l : labels) any_present |= ex.stems.count(l) > 0;
  row.active = any_present;
  row.atten_mix_db = AttenuationMix(est, ex.mixture);
  row.detection_score = row.atten_mix_db;
  if (!ex.stems.empty()) row.atten_src_db = AttenuationSrc(est, MinPowerStem(ex));
  if (row.active) {
    const Waveform ref = ex.TargetReference(labels);
    row.si_sdr_db = SiSdr(est, ref);
    row.sdri_db = row.si_sdr_db - SiSdr(ex.mixture, ref);
  }
  return row;
}

}  // namespace

EvalReport RunEval(const std::vector<TrainingExample>& examples,
                   const TseModel& model, const EvalOptions& options) {
  Require(!examples.empty(), ErrorCategory::kPrecondition, "nothing to evaluate");
  EvalReport report;
  report.clue_mode = ClueModeName(options.clue_mode);
  const Rng root(options.seed);
  const int num_classes = model.vocabulary().size();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const TrainingExample& item = examples[i];
    const MixtureExample& ex = item.example;
    Clue clue;
    if (options.clue_mode == ClueMode::kClass) {
      clue = item.TargetLabels();
    } else {
      Require(!item.enrollments.empty(), ErrorCategory::kPrecondition,
              item.id + ": enrollment evaluation needs enrollments");
      clue = item.TargetEnrollments();
    }
    const Waveform est = model.Extract(ex.mixture, clue);
    report.rows.push_back(ScoreRow(item.id, ex.target.labels, est, ex));

    if (!options.probe_inactive || ex.target.inactive) continue;
    std::vector<int> absent;
    for (int c = 0; c < num_classes; ++c) {
      if (ex.stems.count(c) == 0) absent.push_back(c);
    }
    if (absent.empty()) continue;
    Rng rng = root.Fork(i);
    const int probe = absent[rng.UniformInt(0, static_cast<int>(absent.size()) - 1)];
    Clue probe_clue = LabelSet::Of({probe});
    if (options.clue_mode == ClueMode::kEnroll) {
      if (options.probe_pool == nullptr) continue;
      const SamplePool& pool = *options.probe_pool;
      probe_clue = EnrollmentSet{
          {pool.Get(probe, rng.UniformInt(0, pool.Size(probe) - 1))}};
    }
    EvalRow row = ScoreRow(item.id, {probe}, model.Extract(ex.mixture, probe_clue), ex);
    row.probe = true;
    report.rows.push_back(std::move(row));
  }
  report.aggregates = ComputeAggregates(report.rows);
  report.config = {{"clue_mode", report.clue_mode},
                   {"probe_inactive", options.probe_inactive},
                   {"seed", options.seed},
                   {"model", model.config().ToJson()},
                   {"model_metadata", model.metadata}};
  return report;
}

namespace {

nlohmann::json NumberOrNull(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void WriteReport(const EvalReport& report, const std::filesystem::path& prefix) {
  if (prefix.has_parent_path()) {
    std::filesystem::create_directories(prefix.parent_path());
  }
  const std::string base = prefix.string();
  {
    std::ofstream out(base + ".rows.jsonl", std::ios::trunc);
    Require(out.good(), ErrorCategory::kIo, "cannot write " + base + ".rows.jsonl");
    for (const auto& r : report.rows) {
      out << nlohmann::json{{"example_id", r.example_id},
                            {"target_spec", {{"labels", r.labels},
                                             {"inactive", !r.active}}},
                            {"probe", r.probe},
                            {"active_flag", r.active},
                            {"si_sdr_db", r.si_sdr_db},
                            {"sdri_db", r.sdri_db},
                            {"atten_mix_db", r.atten_mix_db},
                            {"atten_src_db", r.atten_src_db},
                            {"detection_score", r.detection_score}}
                 .dump()
          << '\n';
    }
  }
  const EvalAggregates& a = report.aggregates;
  nlohmann::json summary = {
      {"clue_mode", report.clue_mode},
      {"active_count", a.active_count},
      {"inactive_count", a.inactive_count},
      {"mean_si_sdr_db", NumberOrNull(a.mean_si_sdr_db)},
      {"mean_sdri_db", NumberOrNull(a.mean_sdri_db)},
      {"mean_atten_mix_inactive_db", NumberOrNull(a.mean_atten_mix_inactive_db)},
      {"mean_atten_src_inactive_db", NumberOrNull(a.mean_atten_src_inactive_db)},
      {"auc", NumberOrNull(a.auc)},
      {"config", report.config}};
  {
    std::ofstream out(base + ".summary.json", std::ios::trunc);
    Require(out.good(), ErrorCategory::kIo, "cannot write " + base + ".summary.json");
    out << summary.dump(2) << '\n';
  }
  {
    std::ofstream out(base + ".summary.csv", std::ios::trunc);
    Require(out.good(), ErrorCategory::kIo, "cannot write " + base + ".summary.csv");
    out << "clue_mode,active,inactive,sdri_db,si_sdr_db,atten_mix_db,"
           "atten_src_db,auc\n";
    out << report.clue_mode << ',' << a.active_count << ',' << a.inactive_count
        << ',' << a.mean_sdri_db << ',' << a.mean_si_sdr_db << ','
        << a.mean_atten_mix_inactive_db << ',' << a.mean_atten_src_inactive_db
        << ',' << a.auc << '\n';
  }
}

}  // namespace tsex
