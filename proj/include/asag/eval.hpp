#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/pipeline.hpp"

namespace asag {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

struct MetricSet {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // a zero denominator was coerced to 0
};

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;  // per-example fold index in 0..k-1
};

struct CvReport {
  std::string config_descriptor;
  std::vector<MetricSet> folds;
  MetricSet mean;
  MetricSet stddev;  // sample standard deviation (n-1)
  std::string std_convention = "sample(n-1)";
};

// Positive class is label 1.
ConfusionCounts confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

MetricSet metrics(const ConfusionCounts& counts);

double f1_score(double precision, double recall);

// Within each class, examples are shuffled by seed and dealt round-robin, so
// per-class fold sizes differ by at most one.
FoldAssignment stratified_kfold(const std::vector<int>& y, std::size_t k, std::uint64_t seed);

// Fits the whole pipeline on each training portion and scores the held-out
// fold; fold f's pipeline uses seed + f.
CvReport cross_validate(const PipelineConfig& config, const LexiconSet& lexicons,
                        const Dataset& dataset, std::size_t k = 5, std::uint64_t seed = 0);

// Maximizes mean F1 minus one standard deviation; ties prefer the higher mean
// F1, then the lexicographically smaller descriptor.
const CvReport& select_pessimistic(const std::vector<CvReport>& reports);

// Emission: per-fold CSV rows (config,fold,precision,recall,f1) and an aligned
// plain-text summary table.
std::string report_csv(const std::vector<CvReport>& reports);
std::string report_table(const std::vector<CvReport>& reports);

MetricSet fold_mean(const std::vector<MetricSet>& folds);
MetricSet fold_std(const std::vector<MetricSet>& folds);

}  // namespace asag
