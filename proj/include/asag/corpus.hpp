#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace asag {

enum class Task { A, B };
enum class Split { Train, Dev, Test };

std::string to_string(Task task);
std::string to_string(Split split);
Task task_from_string(const std::string& s);
Split split_from_string(const std::string& s);

struct LabeledResponse {
  std::string id;
  std::string text;
  std::optional<int> label;  // 0 or 1

  bool operator==(const LabeledResponse&) const = default;
};

struct Dataset {
  Task task = Task::A;
  Split split = Split::Train;
  std::vector<LabeledResponse> responses;

  std::size_t size() const { return responses.size(); }
  bool operator==(const Dataset&) const = default;
};

struct LabelOverlay {
  // id -> corrected label; an entry must actually flip the stored label.
  std::map<std::string, int> entries;
};

struct OverlayResult {
  Dataset dataset;
  std::size_t flips_to_positive = 0;  // 0 -> 1
  std::size_t flips_to_negative = 0;  // 1 -> 0
};

struct DatasetStats {
  std::size_t n_total = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  double positive_fraction = 0.0;
  double avg_chars = 0.0;  // mean codepoint count of raw text
};

// Reads a dataset CSV with header id,text[,label]. Labels must be 0/1; a train
// split requires every label present. Row-level problems are collected and
// reported together with their row numbers.
Dataset load_dataset(const std::string& path, Task task, Split split);

Dataset parse_dataset(const std::string& csv_content, Task task, Split split,
                      const std::string& source_name = "<memory>");

// Reads an overlay CSV with header id,corrected_label.
LabelOverlay load_overlay(const std::string& path);

LabelOverlay parse_overlay(const std::string& csv_content,
                           const std::string& source_name = "<memory>");

// Returns a copy of the dataset with overlay labels applied; the overlay must
// target a train split, reference only existing ids, and flip every entry.
OverlayResult apply_overlay(const Dataset& dataset, const LabelOverlay& overlay);

DatasetStats summarize(const Dataset& dataset);

// Canonical content hash of a dataset, used to detect training-data drift.
std::string dataset_fingerprint(const Dataset& dataset);

}  // namespace asag
