#include "asag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "asag/csv.hpp"
#include "asag/errors.hpp"
#include "asag/rng.hpp"

namespace asag {

ConfusionCounts confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("confusion: length mismatch");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw DataError("confusion: labels must be 0 or 1");
    if (t == 1 && p == 1) ++counts.tp;
    else if (t == 0 && p == 1) ++counts.fp;
    else if (t == 1 && p == 0) ++counts.fn;
    else ++counts.tn;
  }
  return counts;
}

MetricSet metrics(const ConfusionCounts& counts) {
  MetricSet m;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) {
    m.precision = tp / static_cast<double>(counts.tp + counts.fp);
  } else {
    m.degenerate = true;
  }
  if (counts.tp + counts.fn > 0) {
    m.recall = tp / static_cast<double>(counts.tp + counts.fn);
  } else {
    m.degenerate = true;
  }
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  if (denom <= 0.0) return 0.0;
  return 2.0 * precision * recall / denom;
}

FoldAssignment stratified_kfold(const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError("stratified_kfold: k must be at least 2");
  FoldAssignment assignment;
  assignment.k = k;
  assignment.fold_of.assign(y.size(), 0);

  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] != 0 && y[i] != 1) throw DataError("stratified_kfold: labels must be 0 or 1");
      if (y[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < k)
      throw DataError("stratified_kfold: class " + std::to_string(cls) + " has only " +
                      std::to_string(members.size()) + " members for k=" + std::to_string(k));
    rng::Engine engine(rng::mix(seed, static_cast<std::uint64_t>(cls)));
    engine.shuffle(members);
    for (std::size_t pos = 0; pos < members.size(); ++pos)
      assignment.fold_of[members[pos]] = pos % k;
  }
  return assignment;
}

MetricSet fold_mean(const std::vector<MetricSet>& folds) {
  MetricSet mean;
  for (const auto& f : folds) {
    mean.precision += f.precision;
    mean.recall += f.recall;
    mean.f1 += f.f1;
    mean.degenerate = mean.degenerate || f.degenerate;
  }
  const double n = static_cast<double>(folds.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  return mean;
}

MetricSet fold_std(const std::vector<MetricSet>& folds) {
  MetricSet sd;
  if (folds.size() < 2) return sd;
  const MetricSet mean = fold_mean(folds);
  double vp = 0.0, vr = 0.0, vf = 0.0;
  for (const auto& f : folds) {
    vp += (f.precision - mean.precision) * (f.precision - mean.precision);
    vr += (f.recall - mean.recall) * (f.recall - mean.recall);
    vf += (f.f1 - mean.f1) * (f.f1 - mean.f1);
  }
  const double n1 = static_cast<double>(folds.size() - 1);
  sd.precision = std::sqrt(vp / n1);
  sd.recall = std::sqrt(vr / n1);
  sd.f1 = std::sqrt(vf / n1);
  return sd;
}

CvReport cross_validate(const PipelineConfig& config, const LexiconSet& lexicons,
                        const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(dataset.responses.size());
  for (const auto& r : dataset.responses) {
    if (!r.label.has_value()) throw DataError("cross_validate: dataset must be fully labeled");
    labels.push_back(*r.label);
  }

  const FoldAssignment folds = stratified_kfold(labels, k, seed);

  CvReport report;
  report.config_descriptor = config.descriptor();
  for (std::size_t f = 0; f < k; ++f) {
    Dataset train;
    train.task = dataset.task;
    train.split = Split::Train;
    Dataset held;
    held.task = dataset.task;
    held.split = Split::Train;
    std::vector<int> held_labels;
    for (std::size_t i = 0; i < dataset.responses.size(); ++i) {
      if (folds.fold_of[i] == f) {
        held.responses.push_back(dataset.responses[i]);
        held_labels.push_back(labels[i]);
      } else {
        train.responses.push_back(dataset.responses[i]);
      }
    }
    try {
      PipelineConfig fold_config = config;
      fold_config.seed = seed + f;
      const PipelineModel model = fit_pipeline(fold_config, lexicons, train);
      const std::vector<double> probs = pipeline_predict_proba(model, held);
      report.folds.push_back(metrics(confusion(held_labels, predict_labels(probs))));
    } catch (const std::exception& e) {
      throw NumericError("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  report.mean = fold_mean(report.folds);
  report.stddev = fold_std(report.folds);
  return report;
}

const CvReport& select_pessimistic(const std::vector<CvReport>& reports) {
  if (reports.empty()) throw DataError("select_pessimistic: no reports");
  const CvReport* best = &reports.front();
  auto score = [](const CvReport& r) { return r.mean.f1 - r.stddev.f1; };
  for (const CvReport& r : reports) {
    const double s = score(r);
    const double sb = score(*best);
    if (s > sb ||
        (s == sb && (r.mean.f1 > best->mean.f1 ||
                     (r.mean.f1 == best->mean.f1 &&
                      r.config_descriptor < best->config_descriptor)))) {
      best = &r;
    }
  }
  return *best;
}

std::string report_csv(const std::vector<CvReport>& reports) {
  std::ostringstream out;
  out << "config,fold,precision,recall,f1\n";
  char buffer[64];
  for (const auto& report : reports) {
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
      const MetricSet& m = report.folds[f];
      std::snprintf(buffer, sizeof(buffer), ",%zu,%.6f,%.6f,%.6f", f, m.precision, m.recall, m.f1);
      out << csv::escape_field(report.config_descriptor) << buffer << "\n";
    }
  }
  return out.str();
}

std::string report_table(const std::vector<CvReport>& reports) {
  std::size_t width = std::string("config").size();
  for (const auto& r : reports) width = std::max(width, r.config_descriptor.size());

  std::ostringstream out;
  out << std::string(width - 6, ' ') << "config"
      << "  precision          recall             f1\n";
  char buffer[128];
  for (const auto& r : reports) {
    std::snprintf(buffer, sizeof(buffer),
                  "  %.3f " "±" " %.3f      %.3f " "±" " %.3f      %.3f " "±" " %.3f",
                  r.mean.precision, r.stddev.precision, r.mean.recall, r.stddev.recall, r.mean.f1,
                  r.stddev.f1);
    out << std::string(width - r.config_descriptor.size(), ' ') << r.config_descriptor << buffer
        << "\n";
  }
  return out.str();
}

}  // namespace asag
