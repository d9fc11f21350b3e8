#include "asag/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "asag/base64.hpp"
#include "asag/csv.hpp"
#include "asag/errors.hpp"
#include "asag/utf8.hpp"

namespace asag {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (static_cast<unsigned char>(s[b]) <= ' ')) ++b;
  while (e > b && (static_cast<unsigned char>(s[e - 1]) <= ' ')) --e;
  return s.substr(b, e - b);
}

class RowErrors {
public:
  explicit RowErrors(std::string source) : source_(std::move(source)) {}

  void add(std::size_t row, const std::string& what) {
    if (messages_.size() < kMaxReported) {
      messages_.push_back("row " + std::to_string(row) + ": " + what);
    }
    ++count_;
  }

  void throw_if_any() const {
    if (count_ == 0) return;
    std::ostringstream msg;
    msg << source_ << ": " << count_ << " bad row(s)";
    for (const auto& m : messages_) msg << "\n  " << m;
    if (count_ > messages_.size()) msg << "\n  ...";
    throw DataError(msg.str());
  }

private:
  static constexpr std::size_t kMaxReported = 20;
  std::string source_;
  std::vector<std::string> messages_;
  std::size_t count_ = 0;
};

std::optional<int> parse_label(const std::string& raw, std::size_t row, RowErrors& errors) {
  const std::string v = trimmed(raw);
  if (v.empty()) return std::nullopt;
  if (v == "0") return 0;
  if (v == "1") return 1;
  errors.add(row, "label must be 0 or 1, got \"" + raw + "\"");
  return std::nullopt;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string to_string(Task task) { return task == Task::A ? "A" : "B"; }

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

Task task_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Task::A;
  if (s == "B" || s == "b") return Task::B;
  throw DataError("unknown task: " + s);
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw DataError("unknown split: " + s);
}

Dataset parse_dataset(const std::string& csv_content, Task task, Split split,
                      const std::string& source_name) {
  const auto rows = csv::parse(csv_content);
  if (rows.empty()) throw DataError(source_name + ": empty file");

  const auto& header = rows.front();
  bool has_label_col = false;
  if (header.size() == 3 && header[0] == "id" && header[1] == "text" && header[2] == "label") {
    has_label_col = true;
  } else if (header.size() == 2 && header[0] == "id" && header[1] == "text") {
    has_label_col = false;
  } else {
    throw DataError(source_name + ": header must be id,text[,label]");
  }

  Dataset dataset;
  dataset.task = task;
  dataset.split = split;
  dataset.responses.reserve(rows.size() - 1);

  RowErrors errors(source_name);
  std::set<std::string> seen_ids;
  const std::size_t want_cols = has_label_col ? 3 : 2;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t row_no = r + 1;  // 1-based, header included
    if (row.size() != want_cols) {
      errors.add(row_no, "expected " + std::to_string(want_cols) + " columns, got " +
                             std::to_string(row.size()));
      continue;
    }
    LabeledResponse resp;
    resp.id = trimmed(row[0]);
    resp.text = row[1];
    if (resp.id.empty()) {
      errors.add(row_no, "empty id");
      continue;
    }
    if (!seen_ids.insert(resp.id).second) {
      errors.add(row_no, "duplicate id \"" + resp.id + "\"");
      continue;
    }
    if (trimmed(resp.text).empty()) {
      errors.add(row_no, "empty text");
      continue;
    }
    if (has_label_col) resp.label = parse_label(row[2], row_no, errors);
    if (split == Split::Train && !resp.label.has_value()) {
      errors.add(row_no, "train split requires a label");
      continue;
    }
    dataset.responses.push_back(std::move(resp));
  }
  errors.throw_if_any();
  return dataset;
}

Dataset load_dataset(const std::string& path, Task task, Split split) {
  return parse_dataset(read_text_file(path), task, split, path);
}

LabelOverlay parse_overlay(const std::string& csv_content, const std::string& source_name) {
  const auto rows = csv::parse(csv_content);
  if (rows.empty()) throw DataError(source_name + ": empty file");
  if (rows.front().size() != 2 || rows.front()[0] != "id" ||
      rows.front()[1] != "corrected_label") {
    throw DataError(source_name + ": header must be id,corrected_label");
  }
  LabelOverlay overlay;
  RowErrors errors(source_name);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t row_no = r + 1;
    if (row.size() != 2) {
      errors.add(row_no, "expected 2 columns");
      continue;
    }
    const std::string id = trimmed(row[0]);
    const std::string v = trimmed(row[1]);
    if (id.empty()) {
      errors.add(row_no, "empty id");
      continue;
    }
    if (v != "0" && v != "1") {
      errors.add(row_no, "corrected_label must be 0 or 1");
      continue;
    }
    if (!overlay.entries.emplace(id, v == "1" ? 1 : 0).second) {
      errors.add(row_no, "duplicate id \"" + id + "\"");
    }
  }
  errors.throw_if_any();
  return overlay;
}

LabelOverlay load_overlay(const std::string& path) {
  return parse_overlay(read_text_file(path), path);
}

OverlayResult apply_overlay(const Dataset& dataset, const LabelOverlay& overlay) {
  if (dataset.split != Split::Train)
    throw DataError("label overlay targets a non-train split");

  OverlayResult result;
  result.dataset = dataset;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.responses.size(); ++i)
    index.emplace(dataset.responses[i].id, i);

  for (const auto& [id, corrected] : overlay.entries) {
    const auto it = index.find(id);
    if (it == index.end()) throw DataError("overlay id not in dataset: " + id);
    auto& resp = result.dataset.responses[it->second];
    if (!resp.label.has_value() || *resp.label == corrected)
      throw DataError("overlay entry does not flip label for id: " + id);
    resp.label = corrected;
    if (corrected == 1) ++result.flips_to_positive;
    else ++result.flips_to_negative;
  }
  return result;
}

DatasetStats summarize(const Dataset& dataset) {
  if (dataset.responses.empty()) throw DataError("summarize: empty dataset");
  DatasetStats stats;
  stats.n_total = dataset.responses.size();
  std::size_t total_chars = 0;
  for (const auto& resp : dataset.responses) {
    total_chars += utf8::count_codepoints(resp.text);
    if (resp.label.has_value()) {
      if (*resp.label == 1) ++stats.n_positive;
      else ++stats.n_negative;
    }
  }
  const std::size_t n_labeled = stats.n_positive + stats.n_negative;
  stats.positive_fraction =
      n_labeled > 0 ? static_cast<double>(stats.n_positive) / static_cast<double>(n_labeled) : 0.0;
  stats.avg_chars = static_cast<double>(total_chars) / static_cast<double>(stats.n_total);
  return stats;
}

std::string dataset_fingerprint(const Dataset& dataset) {
  Fnv1a h;
  h.update(to_string(dataset.task));
  h.update("\x1f");
  for (const auto& resp : dataset.responses) {
    h.update(resp.id);
    h.update("\x1f");
    h.update(resp.text);
    h.update("\x1f");
    h.update(resp.label.has_value() ? (*resp.label == 1 ? "1" : "0") : "-");
    h.update("\x1e");
  }
  return h.hex();
}

}  // namespace asag
