#include "asag/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "asag/csv.hpp"
#include "asag/errors.hpp"
#include "asag/rng.hpp"

namespace asag {

namespace {

constexpr std::uint64_t kInitSalt = 0x75E2;

struct Calibration {
  std::vector<double> betas;   // 1 / (2 sigma^2)
  std::vector<double> sigmas;
};

// Entropy in bits of p(j|i) for one point at a given precision beta.
double conditional_entropy(const DenseMatrix& d, const std::vector<double>& weights,
                           std::size_t i, double beta, std::vector<double>& scratch) {
  const std::size_t n = d.rows;
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) d_min = std::min(d_min, d.at(i, j));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) {
      scratch[j] = 0.0;
      continue;
    }
    scratch[j] = weights[j] * std::exp(-beta * (d.at(i, j) - d_min));
    sum += scratch[j];
  }
  double entropy_nats = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (scratch[j] <= 0.0) continue;
    const double p = scratch[j] / sum;
    entropy_nats -= p * std::log(p);
  }
  return entropy_nats / std::numbers::ln2;
}

Calibration calibrate(const DenseMatrix& d, double perplexity,
                      const std::vector<double>& weights) {
  const std::size_t n = d.rows;
  if (d.cols != n) throw DataError("calibrate_sigma: distance matrix must be square");
  if (!(perplexity > 1.0)) throw DataError("perplexity must exceed 1");
  if (perplexity >= static_cast<double>(n))
    throw DataError("perplexity must be smaller than the number of points");

  std::vector<double> w = weights;
  if (w.empty()) w.assign(n, 1.0);
  if (w.size() != n) throw DataError("calibrate_sigma: weight count mismatch");

  const double target = std::log2(perplexity);
  Calibration out;
  out.betas.resize(n);
  out.sigmas.resize(n);
  std::vector<double> scratch(n);

  for (std::size_t i = 0; i < n; ++i) {
    bool all_zero = true;
    for (std::size_t j = 0; j < n && all_zero; ++j) {
      if (j != i && d.at(i, j) > 0.0) all_zero = false;
    }
    if (all_zero)
      throw NumericError("duplicate points: point " + std::to_string(i) +
                         " has zero distance to all others");

    double beta = 1.0;
    double beta_lo = 0.0;
    double beta_hi = std::numeric_limits<double>::infinity();
    // The cap alone reaches far below the 1e-5 entropy contract; running the
    // search near machine precision pins sigma itself, not just the entropy.
    for (int step = 0; step < 50; ++step) {
      const double entropy = conditional_entropy(d, w, i, beta, scratch);
      const double diff = entropy - target;
      if (std::abs(diff) <= 1e-13) break;
      if (diff > 0.0) {
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
      } else {
        beta_hi = beta;
        beta = beta_lo > 0.0 ? 0.5 * (beta + beta_lo) : beta * 0.5;
      }
    }
    out.betas[i] = beta;
    out.sigmas[i] = std::sqrt(0.5 / beta);
  }
  return out;
}

}  // namespace

DenseMatrix pairwise_sq_distances(const DenseMatrix& x) {
  DenseMatrix d(x.rows, x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = i + 1; j < x.rows; ++j) {
      double sq = 0.0;
      const auto ri = x.row(i);
      const auto rj = x.row(j);
      for (std::size_t c = 0; c < x.cols; ++c) {
        const double diff = ri[c] - rj[c];
        sq += diff * diff;
      }
      d.at(i, j) = sq;
      d.at(j, i) = sq;
    }
  }
  return d;
}

std::vector<double> calibrate_sigma(const DenseMatrix& sq_distances, double perplexity,
                                    const std::vector<double>& weights) {
  return calibrate(sq_distances, perplexity, weights).sigmas;
}

DenseMatrix joint_probabilities(const DenseMatrix& sq_distances, double perplexity,
                                const std::vector<double>& weights) {
  const std::size_t n = sq_distances.rows;
  std::vector<double> w = weights;
  if (w.empty()) w.assign(n, 1.0);
  const Calibration cal = calibrate(sq_distances, perplexity, w);

  DenseMatrix conditional(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d_min = std::min(d_min, sq_distances.at(i, j));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = w[j] * std::exp(-cal.betas[i] * (sq_distances.at(i, j) - d_min));
      conditional.at(i, j) = v;
      sum += v;
    }
    for (std::size_t j = 0; j < n; ++j) conditional.at(i, j) /= sum;
  }

  double total_weight = 0.0;
  for (double v : w) total_weight += v;
  DenseMatrix joint(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      joint.at(i, j) =
          (w[i] * conditional.at(i, j) + w[j] * conditional.at(j, i)) / (2.0 * total_weight);
    }
  }
  return joint;
}

double kl_objective(const DenseMatrix& p, const DenseMatrix& y, DenseMatrix* grad) {
  const std::size_t n = p.rows;
  if (y.rows != n || y.cols != 2) throw DataError("kl_objective: embedding must be n x 2");

  // Student-t kernel weights and their normalizer.
  DenseMatrix w(n, n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y.at(i, 0) - y.at(j, 0);
      const double dy = y.at(i, 1) - y.at(j, 1);
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      w.at(i, j) = v;
      w.at(j, i) = v;
      z += 2.0 * v;
    }
  }

  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p.at(i, j);
      if (pij <= 0.0) continue;
      kl += pij * std::log(pij / (w.at(i, j) / z));
    }
  }

  if (grad) {
    *grad = DenseMatrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double wij = w.at(i, j);
        const double coef = 4.0 * (p.at(i, j) - wij / z) * wij;
        gx += coef * (y.at(i, 0) - y.at(j, 0));
        gy += coef * (y.at(i, 1) - y.at(j, 1));
      }
      grad->at(i, 0) = gx;
      grad->at(i, 1) = gy;
    }
  }
  return kl;
}

namespace {

void recenter(DenseMatrix& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < y.rows; ++i) {
    mx += y.at(i, 0);
    my += y.at(i, 1);
  }
  mx /= static_cast<double>(y.rows);
  my /= static_cast<double>(y.rows);
  for (std::size_t i = 0; i < y.rows; ++i) {
    y.at(i, 0) -= mx;
    y.at(i, 1) -= my;
  }
}

}  // namespace

Embedding2D tsne(const DenseMatrix& x, const TsneConfig& config) {
  if (x.rows < 4) throw DataError("tsne: need at least 4 points");
  if (config.n_iters < 1) throw DataError("tsne: n_iters must be at least 1");
  if (config.learning_rate <= 0.0) throw DataError("tsne: learning rate must be positive");
  if (config.early_exaggeration < 1.0) throw DataError("tsne: exaggeration factor must be >= 1");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw DataError("tsne: non-finite input");
  }
  if (!(config.perplexity > 1.0) || config.perplexity >= static_cast<double>(x.rows))
    throw DataError("tsne: perplexity must lie in (1, n_points)");

  // Fold duplicate rows into a single point with multiplicity.
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<std::size_t> rep(x.rows);
  std::vector<std::vector<double>> unique_rows;
  std::vector<double> multiplicity;
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::vector<double> row(x.row(i).begin(), x.row(i).end());
    const auto it = seen.find(row);
    if (it == seen.end()) {
      seen.emplace(std::move(row), unique_rows.size());
      rep[i] = unique_rows.size();
      unique_rows.push_back({x.row(i).begin(), x.row(i).end()});
      multiplicity.push_back(1.0);
    } else {
      rep[i] = it->second;
      multiplicity[it->second] += 1.0;
    }
  }
  const std::size_t nu = unique_rows.size();

  Embedding2D out;
  if (nu < x.rows) {
    out.notice = "folded " + std::to_string(x.rows - nu) + " duplicate rows into " +
                 std::to_string(nu) + " unique points";
  }
  if (nu < 4) throw DataError("tsne: fewer than 4 distinct points");
  if (config.perplexity >= static_cast<double>(nu))
    throw DataError("tsne: perplexity must be smaller than the number of distinct points");

  DenseMatrix ux(nu, x.cols);
  for (std::size_t i = 0; i < nu; ++i)
    std::copy(unique_rows[i].begin(), unique_rows[i].end(), ux.row(i).begin());

  const DenseMatrix distances = pairwise_sq_distances(ux);
  const DenseMatrix p = joint_probabilities(distances, config.perplexity, multiplicity);
  DenseMatrix p_ex = p;
  for (double& v : p_ex.data) v *= config.early_exaggeration;

  rng::Engine engine(rng::mix(config.seed, kInitSalt));
  DenseMatrix y(nu, 2);
  for (double& v : y.data) v = 1e-4 * engine.normal();
  recenter(y);

  DenseMatrix velocity(nu, 2);
  DenseMatrix grad;
  double lr = config.learning_rate;
  double kl_prev = std::numeric_limits<double>::infinity();
  bool tracking = false;  // true once the exaggeration phase is over

  for (std::size_t iter = 0; iter < config.n_iters; ++iter) {
    const bool exaggerated = iter < config.exaggeration_iters;
    const double momentum = iter < 250 ? 0.5 : 0.8;

    if (!exaggerated && !tracking) {
      kl_prev = kl_objective(p, y);
      tracking = true;
    }

    kl_objective(exaggerated ? p_ex : p, y, &grad);

    DenseMatrix y_next = y;
    DenseMatrix v_next = velocity;
    for (std::size_t i = 0; i < nu; ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        v_next.at(i, c) = momentum * velocity.at(i, c) - lr * grad.at(i, c);
        y_next.at(i, c) = y.at(i, c) + v_next.at(i, c);
      }
    }
    recenter(y_next);

    if (!exaggerated) {
      const double kl_new = kl_objective(p, y_next);
      if (kl_new > kl_prev + 1e-15) {
        // Keep the descent contract: reject the step, damp, retry smaller.
        lr *= 0.5;
        velocity = DenseMatrix(nu, 2);
        continue;
      }
      kl_prev = kl_new;
    }
    y = std::move(y_next);
    velocity = std::move(v_next);
  }

  out.kl_divergence = tracking ? kl_prev : kl_objective(p, y);
  out.points = DenseMatrix(x.rows, 2);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out.points.at(i, 0) = y.at(rep[i], 0);
    out.points.at(i, 1) = y.at(rep[i], 1);
  }
  return out;
}

HistogramData probability_histogram(const std::vector<double>& probs, std::size_t n_bins,
                                    const std::vector<int>* labels) {
  if (n_bins < 1) throw DataError("histogram: need at least one bin");
  if (labels && labels->size() != probs.size())
    throw DataError("histogram: label count mismatch");

  HistogramData hist;
  hist.edges.resize(n_bins + 1);
  for (std::size_t b = 0; b <= n_bins; ++b)
    hist.edges[b] = static_cast<double>(b) / static_cast<double>(n_bins);
  hist.counts.assign(n_bins, 0);
  if (labels) {
    hist.counts_pos.assign(n_bins, 0);
    hist.counts_neg.assign(n_bins, 0);
  }

  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw DataError("histogram: probability outside [0, 1]");
    const std::size_t bin =
        std::min(static_cast<std::size_t>(p * static_cast<double>(n_bins)), n_bins - 1);
    ++hist.counts[bin];
    if (labels) {
      if ((*labels)[i] == 1) ++hist.counts_pos[bin];
      else ++hist.counts_neg[bin];
    }
  }
  return hist;
}

BandCount uncertainty_band_count(const std::vector<double>& probs, double lo, double hi) {
  if (!(lo < hi) || lo < 0.0 || hi > 1.0)
    throw DataError("uncertainty band: need 0 <= lo < hi <= 1");
  BandCount out;
  for (double p : probs) {
    if (p >= lo && p <= hi) ++out.count;
  }
  if (!probs.empty()) {
    out.fraction = static_cast<double>(out.count) / static_cast<double>(probs.size());
    out.fraction_defined = true;
  }
  return out;
}

void write_embedding_csv(const std::string& path, const std::vector<std::string>& ids,
                         const Embedding2D& embedding,
                         const std::vector<std::optional<int>>& labels) {
  if (ids.size() != embedding.points.rows)
    throw DataError("embedding csv: id count mismatch");
  std::vector<csv::Row> rows;
  rows.push_back({"id", "x", "y", "label"});
  char buffer[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    csv::Row row;
    row.push_back(ids[i]);
    std::snprintf(buffer, sizeof(buffer), "%.6f", embedding.points.at(i, 0));
    row.push_back(buffer);
    std::snprintf(buffer, sizeof(buffer), "%.6f", embedding.points.at(i, 1));
    row.push_back(buffer);
    row.push_back(i < labels.size() && labels[i].has_value() ? std::to_string(*labels[i]) : "");
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

namespace {

const char* point_color(const std::optional<int>& label) {
  if (!label.has_value()) return "#7f7f7f";
  return *label == 1 ? "#1f77b4" : "#d62728";
}

}  // namespace

std::string embedding_svg(const Embedding2D& embedding,
                          const std::vector<std::optional<int>>& labels) {
  const std::size_t n = embedding.points.rows;
  double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1.0;
  if (n > 0) {
    lo_x = hi_x = embedding.points.at(0, 0);
    lo_y = hi_y = embedding.points.at(0, 1);
    for (std::size_t i = 1; i < n; ++i) {
      lo_x = std::min(lo_x, embedding.points.at(i, 0));
      hi_x = std::max(hi_x, embedding.points.at(i, 0));
      lo_y = std::min(lo_y, embedding.points.at(i, 1));
      hi_y = std::max(hi_y, embedding.points.at(i, 1));
    }
  }
  const double span_x = hi_x - lo_x > 0.0 ? hi_x - lo_x : 1.0;
  const double span_y = hi_y - lo_y > 0.0 ? hi_y - lo_y : 1.0;
  const double size = 600.0;
  const double margin = 30.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"660\" "
         "viewBox=\"0 0 660 660\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"660\" height=\"660\" fill=\"white\"/>\n";
  char buffer[160];
  for (std::size_t i = 0; i < n; ++i) {
    const double px = margin + size * (embedding.points.at(i, 0) - lo_x) / span_x;
    const double py = margin + size * (1.0 - (embedding.points.at(i, 1) - lo_y) / span_y);
    std::snprintf(buffer, sizeof(buffer),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" fill-opacity=\"0.7\"/>\n",
                  px, py, point_color(i < labels.size() ? labels[i] : std::nullopt));
    svg << buffer;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_histogram_csv(const std::string& path, const HistogramData& hist) {
  std::vector<csv::Row> rows;
  const bool split = !hist.counts_pos.empty();
  csv::Row header = {"bin_lo", "bin_hi", "count"};
  if (split) {
    header.push_back("count_pos");
    header.push_back("count_neg");
  }
  rows.push_back(std::move(header));
  char buffer[32];
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    csv::Row row;
    std::snprintf(buffer, sizeof(buffer), "%.6f", hist.edges[b]);
    row.push_back(buffer);
    std::snprintf(buffer, sizeof(buffer), "%.6f", hist.edges[b + 1]);
    row.push_back(buffer);
    row.push_back(std::to_string(hist.counts[b]));
    if (split) {
      row.push_back(std::to_string(hist.counts_pos[b]));
      row.push_back(std::to_string(hist.counts_neg[b]));
    }
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

std::string histogram_svg(const HistogramData& hist) {
  const std::size_t n_bins = hist.counts.size();
  std::size_t peak = 1;
  for (std::size_t c : hist.counts) peak = std::max(peak, c);

  const double width = 600.0;
  const double height = 300.0;
  const double margin = 30.0;
  const double bar_w = width / static_cast<double>(n_bins);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"360\" "
         "viewBox=\"0 0 660 360\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"660\" height=\"360\" fill=\"white\"/>\n";
  char buffer[200];
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double h = height * static_cast<double>(hist.counts[b]) / static_cast<double>(peak);
    const double x = margin + bar_w * static_cast<double>(b);
    const double y = margin + height - h;
    std::snprintf(buffer, sizeof(buffer),
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#1f77b4\" "
                  "stroke=\"white\"/>\n",
                  x, y, bar_w, h);
    svg << buffer;
    if (!hist.counts_pos.empty()) {
      const double hp = height * static_cast<double>(hist.counts_pos[b]) / static_cast<double>(peak);
      std::snprintf(buffer, sizeof(buffer),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#2ca02c\" "
                    "fill-opacity=\"0.6\"/>\n",
                    x, margin + height - hp, bar_w, hp);
      svg << buffer;
    }
  }
  svg << "<line x1=\"30\" y1=\"330\" x2=\"630\" y2=\"330\" stroke=\"black\"/>\n</svg>\n";
  return svg.str();
}

}  // namespace asag
