#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "asag/rng.hpp"

#ifdef ASAG_HAVE_EIGEN
#include <Eigen/Dense>
#include <Eigen/SVD>
#endif

namespace oracles {

DenseSvdResult dense_svd(const asag::DenseMatrix& a) {
#ifdef ASAG_HAVE_EIGEN
  Eigen::MatrixXd m(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a.at(i, j);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DenseSvdResult out;
  const auto r = svd.singularValues().size();
  out.singular_values.resize(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) out.singular_values[static_cast<std::size_t>(i)] = svd.singularValues()(i);
  out.u = asag::DenseMatrix(a.rows, static_cast<std::size_t>(r));
  out.v = asag::DenseMatrix(a.cols, static_cast<std::size_t>(r));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (Eigen::Index j = 0; j < r; ++j) out.u.at(i, static_cast<std::size_t>(j)) = svd.matrixU()(static_cast<Eigen::Index>(i), j);
  for (std::size_t i = 0; i < a.cols; ++i)
    for (Eigen::Index j = 0; j < r; ++j) out.v.at(i, static_cast<std::size_t>(j)) = svd.matrixV()(static_cast<Eigen::Index>(i), j);
  return out;
#else
  (void)a;
  throw std::runtime_error("Eigen oracle unavailable in this build");
#endif
}

namespace {

struct Block {
  std::size_t a_begin = 0;
  std::size_t b_begin = 0;
  std::size_t length = 0;
};

// Longest common substring of a[alo,ahi) and b[blo,bhi) by a full DP table;
// ties take the smallest a start, then the smallest b start.
Block longest_block(const std::string& a, const std::string& b, std::size_t alo, std::size_t ahi,
                    std::size_t blo, std::size_t bhi) {
  const std::size_t rows = ahi - alo;
  const std::size_t cols = bhi - blo;
  std::vector<std::vector<std::size_t>> table(rows + 1, std::vector<std::size_t>(cols + 1, 0));
  Block best;
  for (std::size_t i = 1; i <= rows; ++i) {
    for (std::size_t j = 1; j <= cols; ++j) {
      if (a[alo + i - 1] != b[blo + j - 1]) continue;
      table[i][j] = table[i - 1][j - 1] + 1;
      const std::size_t len = table[i][j];
      const std::size_t a_begin = alo + i - len;
      const std::size_t b_begin = blo + j - len;
      if (len > best.length ||
          (len == best.length && len > 0 &&
           (a_begin < best.a_begin || (a_begin == best.a_begin && b_begin < best.b_begin)))) {
        best = {a_begin, b_begin, len};
      }
    }
  }
  return best;
}

std::size_t matched_recursive(const std::string& a, const std::string& b, std::size_t alo,
                              std::size_t ahi, std::size_t blo, std::size_t bhi) {
  const Block block = longest_block(a, b, alo, ahi, blo, bhi);
  if (block.length == 0) return 0;
  return block.length + matched_recursive(a, b, alo, block.a_begin, blo, block.b_begin) +
         matched_recursive(a, b, block.a_begin + block.length, ahi, block.b_begin + block.length,
                           bhi);
}

}  // namespace

std::size_t matched_chars(const std::string& a, const std::string& b) {
  return matched_recursive(a, b, 0, a.size(), 0, b.size());
}

double similarity_ratio(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(matched_chars(a, b)) /
         static_cast<double>(a.size() + b.size());
}

double symmetric_logreg_root(double tolerance) {
  const auto f = [](double w) { return w - 2.0 / (1.0 + std::exp(w)); };
  double lo = 0.0, hi = 2.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

asag::Dataset synthetic_corpus(std::size_t n_docs, double label_noise, std::uint64_t seed,
                               asag::Task task) {
  static const char* kTopicA[] = {"iklim", "banjir", "panas", "cuaca", "laut",  "pindah",
                                  "rumah", "air",    "tanah", "kota",  "pulau", "hujan"};
  static const char* kTopicB[] = {"donasi", "pakaian", "pekerja", "pabrik", "uang",  "beli",
                                  "etika",  "video",   "kondisi", "sumbang", "baju", "toko"};
  asag::rng::Engine engine(seed);
  asag::Dataset dataset;
  dataset.task = task;
  dataset.split = asag::Split::Train;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const int topic = i % 2 == 0 ? 1 : 0;
    const auto& words = topic == 1 ? kTopicA : kTopicB;
    const std::size_t length = 6 + engine.index(8);
    std::string text;
    for (std::size_t w = 0; w < length; ++w) {
      if (w) text += " ";
      text += words[engine.index(12)];
    }
    int label = topic;
    if (engine.uniform() < label_noise) label = 1 - label;
    dataset.responses.push_back({"doc" + std::to_string(i), text, label});
  }
  return dataset;
}

asag::Dataset synthetic_counts_dataset(std::size_t n_positive, std::size_t n_negative,
                                       asag::Task task) {
  asag::Dataset dataset;
  dataset.task = task;
  dataset.split = asag::Split::Train;
  asag::rng::Engine engine(7);
  static const char* kPadding[] = {"alasan", "karena", "tempat", "aman", "sulit", "kerja"};
  for (std::size_t i = 0; i < n_positive + n_negative; ++i) {
    std::string text = i < n_positive ? "jawaban benar" : "jawaban salah";
    text += " ";
    text += kPadding[engine.index(6)];
    dataset.responses.push_back(
        {"r" + std::to_string(i), text, i < n_positive ? 1 : 0});
  }
  return dataset;
}

}  // namespace oracles
