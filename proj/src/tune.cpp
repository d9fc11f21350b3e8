#include "asag/tune.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asag/errors.hpp"
#include "asag/rng.hpp"

namespace asag {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kCandidateSalt = 0x7CE5;

bool is_numeric(Dimension::Kind kind) { return kind != Dimension::Kind::Categorical; }

// Numeric dimensions work on a transformed axis: identity for uniform and
// integer dimensions, log for log-uniform.
double to_scale(const Dimension& dim, double value) {
  return dim.kind == Dimension::Kind::LogUniform ? std::log(value) : value;
}

std::pair<double, double> scale_bounds(const Dimension& dim) {
  if (dim.kind == Dimension::Kind::IntUniform)
    return {static_cast<double>(dim.ilo), static_cast<double>(dim.ihi)};
  if (dim.kind == Dimension::Kind::LogUniform) return {std::log(dim.lo), std::log(dim.hi)};
  return {dim.lo, dim.hi};
}

double numeric_scale_value(const Dimension& dim, const ParamValue& value) {
  if (dim.kind == Dimension::Kind::IntUniform) return static_cast<double>(std::get<std::int64_t>(value));
  return to_scale(dim, std::get<double>(value));
}

ParamValue from_scale(const Dimension& dim, double scaled) {
  switch (dim.kind) {
    case Dimension::Kind::Uniform:
      return std::clamp(scaled, dim.lo, dim.hi);
    case Dimension::Kind::LogUniform:
      return std::clamp(std::exp(scaled), dim.lo, dim.hi);
    case Dimension::Kind::IntUniform: {
      const auto rounded = static_cast<std::int64_t>(std::llround(scaled));
      return std::clamp(rounded, dim.ilo, dim.ihi);
    }
    case Dimension::Kind::Categorical:
      break;
  }
  throw DataError("from_scale: categorical dimension");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double truncated_normal_pdf(double x, double mu, double sigma, double lo, double hi) {
  const double z = (x - mu) / sigma;
  const double mass = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
  if (mass <= 0.0) return 0.0;
  const double pdf = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
  return pdf / mass;
}

// Nearest-neighbor spacing bandwidths, floored at 1% of the range; a lone
// observation gets the full range.
std::vector<double> kernel_bandwidths(const std::vector<double>& points, double lo, double hi) {
  const double range = hi - lo;
  std::vector<double> bw(points.size(), range);
  if (points.size() > 1) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    for (std::size_t r = 0; r < order.size(); ++r) {
      double nn = range;
      if (r > 0) nn = std::min(nn, points[order[r]] - points[order[r - 1]]);
      if (r + 1 < order.size()) nn = std::min(nn, points[order[r + 1]] - points[order[r]]);
      bw[order[r]] = nn;
    }
  }
  for (double& b : bw) b = std::clamp(b, 0.01 * range, range);
  return bw;
}

std::vector<double> categorical_probs(const Dimension& dim,
                                      const std::vector<ParamValue>& observations,
                                      double prior_weight) {
  const std::size_t n = dim.choices.size();
  std::vector<double> prior(n, 1.0 / static_cast<double>(n));
  if (!dim.prior_weights.empty()) {
    const double total = std::accumulate(dim.prior_weights.begin(), dim.prior_weights.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) prior[i] = dim.prior_weights[i] / total;
  }
  std::vector<double> counts(n, 0.0);
  for (const auto& obs : observations) {
    const auto& s = std::get<std::string>(obs);
    const auto it = std::find(dim.choices.begin(), dim.choices.end(), s);
    if (it != dim.choices.end()) counts[static_cast<std::size_t>(it - dim.choices.begin())] += 1.0;
  }
  const double denom = prior_weight + static_cast<double>(observations.size());
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = (prior_weight * prior[i] + counts[i]) / denom;
  return probs;
}

struct NumericKernels {
  std::vector<double> centers;  // working scale
  std::vector<double> bandwidths;
  double lo = 0.0;
  double hi = 0.0;

  double pdf(double x) const {
    if (centers.empty()) return 1.0 / (hi - lo);  // prior: uniform on the scale
    double total = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
      total += truncated_normal_pdf(x, centers[i], bandwidths[i], lo, hi);
    return total / static_cast<double>(centers.size());
  }
};

NumericKernels numeric_kernels(const Dimension& dim, const std::vector<ParamValue>& observations) {
  NumericKernels k;
  std::tie(k.lo, k.hi) = scale_bounds(dim);
  k.centers.reserve(observations.size());
  for (const auto& obs : observations) k.centers.push_back(numeric_scale_value(dim, obs));
  k.bandwidths = kernel_bandwidths(k.centers, k.lo, k.hi);
  return k;
}

ParamValue sample_prior(const Dimension& dim, rng::Engine& engine) {
  switch (dim.kind) {
    case Dimension::Kind::Uniform:
      return engine.uniform(dim.lo, dim.hi);
    case Dimension::Kind::LogUniform:
      return engine.log_uniform(dim.lo, dim.hi);
    case Dimension::Kind::IntUniform:
      return engine.uniform_int(dim.ilo, dim.ihi);
    case Dimension::Kind::Categorical: {
      std::vector<double> probs = categorical_probs(dim, {}, 1.0);
      double u = engine.uniform();
      for (std::size_t i = 0; i < probs.size(); ++i) {
        u -= probs[i];
        if (u < 0.0) return dim.choices[i];
      }
      return dim.choices.back();
    }
  }
  throw DataError("sample_prior: bad dimension kind");
}

ParamValue sample_kernel(const Dimension& dim, const NumericKernels& kernels,
                         rng::Engine& engine) {
  if (kernels.centers.empty()) return sample_prior(dim, engine);
  const std::size_t pick = engine.index(kernels.centers.size());
  const double mu = kernels.centers[pick];
  const double sigma = kernels.bandwidths[pick];
  double draw = mu + sigma * engine.normal();
  for (int tries = 0; tries < 100 && (draw < kernels.lo || draw > kernels.hi); ++tries)
    draw = mu + sigma * engine.normal();
  draw = std::clamp(draw, kernels.lo, kernels.hi);
  return from_scale(dim, draw);
}

std::vector<ParamValue> observed_values(const Dimension& dim, const std::vector<const Trial*>& trials) {
  std::vector<ParamValue> out;
  for (const Trial* t : trials) {
    const auto it = t->config.find(dim.name);
    if (it != t->config.end()) out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::string param_to_string(const ParamValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  std::ostringstream out;
  out << std::get<double>(value);
  return out.str();
}

Dimension Dimension::uniform(std::string name, double lo, double hi) {
  Dimension d;
  d.name = std::move(name);
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Dimension Dimension::log_uniform(std::string name, double lo, double hi) {
  Dimension d;
  d.name = std::move(name);
  d.kind = Kind::LogUniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Dimension Dimension::int_uniform(std::string name, std::int64_t lo, std::int64_t hi) {
  Dimension d;
  d.name = std::move(name);
  d.kind = Kind::IntUniform;
  d.ilo = lo;
  d.ihi = hi;
  return d;
}

Dimension Dimension::categorical(std::string name, std::vector<std::string> choices,
                                 std::vector<double> prior_weights) {
  Dimension d;
  d.name = std::move(name);
  d.kind = Kind::Categorical;
  d.choices = std::move(choices);
  d.prior_weights = std::move(prior_weights);
  return d;
}

Dimension Dimension::conditioned_on(std::string parent, std::string value) const {
  Dimension d = *this;
  d.condition = Condition{std::move(parent), std::move(value)};
  return d;
}

void SearchSpace::validate() const {
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    const Dimension& dim = dimensions[i];
    if (dim.name.empty()) throw DataError("search space: unnamed dimension");
    for (std::size_t j = 0; j < i; ++j) {
      if (dimensions[j].name == dim.name)
        throw DataError("search space: duplicate dimension " + dim.name);
    }
    switch (dim.kind) {
      case Dimension::Kind::Uniform:
        if (!(dim.lo < dim.hi)) throw DataError(dim.name + ": requires lo < hi");
        break;
      case Dimension::Kind::LogUniform:
        if (!(dim.lo < dim.hi)) throw DataError(dim.name + ": requires lo < hi");
        if (dim.lo <= 0.0) throw DataError(dim.name + ": log-uniform requires lo > 0");
        break;
      case Dimension::Kind::IntUniform:
        if (!(dim.ilo < dim.ihi)) throw DataError(dim.name + ": requires lo < hi");
        break;
      case Dimension::Kind::Categorical:
        if (dim.choices.empty()) throw DataError(dim.name + ": no choices");
        if (!dim.prior_weights.empty() && dim.prior_weights.size() != dim.choices.size())
          throw DataError(dim.name + ": prior weight count mismatch");
        break;
    }
    if (dim.condition.has_value()) {
      bool found = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (dimensions[j].name != dim.condition->parent) continue;
        if (dimensions[j].kind != Dimension::Kind::Categorical)
          throw DataError(dim.name + ": condition parent must be categorical");
        if (std::find(dimensions[j].choices.begin(), dimensions[j].choices.end(),
                      dim.condition->value) == dimensions[j].choices.end())
          throw DataError(dim.name + ": condition value not among parent choices");
        found = true;
        break;
      }
      if (!found)
        throw DataError(dim.name + ": condition parent must be declared earlier");
    }
  }
}

bool SearchSpace::is_active(const Dimension& dim, const ParamMap& config) const {
  if (!dim.condition.has_value()) return true;
  const auto it = config.find(dim.condition->parent);
  if (it == config.end()) return false;
  return param_to_string(it->second) == dim.condition->value;
}

void TpeParams::validate() const {
  if (n_startup < 1) throw DataError("n_startup must be at least 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DataError("gamma must lie in (0, 1)");
  if (n_candidates < 1) throw DataError("n_candidates must be at least 1");
  if (prior_weight <= 0.0) throw DataError("prior_weight must be positive");
}

ParamMap sample_random(const SearchSpace& space, std::uint64_t seed) {
  space.validate();
  rng::Engine engine(rng::mix(seed, 0xA11D));
  ParamMap config;
  for (const Dimension& dim : space.dimensions) {
    if (!space.is_active(dim, config)) continue;
    config.emplace(dim.name, sample_prior(dim, engine));
  }
  return config;
}

double parzen_density(const Dimension& dim, const std::vector<ParamValue>& observations,
                      const ParamValue& value, double prior_weight) {
  if (dim.kind == Dimension::Kind::Categorical) {
    const std::vector<double> probs = categorical_probs(dim, observations, prior_weight);
    const auto& s = std::get<std::string>(value);
    const auto it = std::find(dim.choices.begin(), dim.choices.end(), s);
    if (it == dim.choices.end()) throw DataError(dim.name + ": unknown choice " + s);
    return probs[static_cast<std::size_t>(it - dim.choices.begin())];
  }
  const NumericKernels kernels = numeric_kernels(dim, observations);
  return kernels.pdf(numeric_scale_value(dim, value));
}

ParamMap tpe_suggest(const std::vector<Trial>& history, const SearchSpace& space,
                     const TpeParams& params, std::uint64_t seed) {
  params.validate();
  if (history.size() < params.n_startup) return sample_random(space, seed);

  std::vector<const Trial*> ok;
  for (const Trial& t : history) {
    if (t.status == Trial::Status::Ok && std::isfinite(t.objective)) ok.push_back(&t);
  }
  const std::size_t n_ok = ok.size();
  const auto n_good =
      static_cast<std::size_t>(std::ceil(params.gamma * static_cast<double>(n_ok)));
  if (n_ok < 2 || n_good == 0 || n_good >= n_ok) return sample_random(space, seed);

  // Boundary ties keep the earlier trial on the good side.
  std::stable_sort(ok.begin(), ok.end(),
                   [](const Trial* a, const Trial* b) { return a->objective > b->objective; });
  const std::vector<const Trial*> good(ok.begin(), ok.begin() + static_cast<std::ptrdiff_t>(n_good));
  const std::vector<const Trial*> bad(ok.begin() + static_cast<std::ptrdiff_t>(n_good), ok.end());

  space.validate();
  rng::Engine engine(rng::mix(seed, kCandidateSalt));

  ParamMap best_candidate;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < params.n_candidates; ++c) {
    ParamMap candidate;
    double score = 0.0;
    for (const Dimension& dim : space.dimensions) {
      if (!space.is_active(dim, candidate)) continue;
      const std::vector<ParamValue> good_obs = observed_values(dim, good);
      const std::vector<ParamValue> bad_obs = observed_values(dim, bad);

      ParamValue value;
      if (dim.kind == Dimension::Kind::Categorical) {
        const std::vector<double> probs = categorical_probs(dim, good_obs, params.prior_weight);
        double u = engine.uniform();
        std::size_t pick = probs.size() - 1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
          u -= probs[i];
          if (u < 0.0) {
            pick = i;
            break;
          }
        }
        value = dim.choices[pick];
      } else {
        value = sample_kernel(dim, numeric_kernels(dim, good_obs), engine);
      }
      const double l = parzen_density(dim, good_obs, value, params.prior_weight);
      const double g = parzen_density(dim, bad_obs, value, params.prior_weight);
      score += std::log(std::max(l, 1e-300)) - std::log(std::max(g, 1e-300));
      candidate.emplace(dim.name, std::move(value));
    }
    if (score > best_score) {
      best_score = score;
      best_candidate = std::move(candidate);
    }
  }
  return best_candidate;
}

std::vector<Trial> sort_best_first(std::vector<Trial> trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    const bool a_ok = a.status == Trial::Status::Ok;
    const bool b_ok = b.status == Trial::Status::Ok;
    if (a_ok != b_ok) return a_ok;
    if (!a_ok) return false;
    return a.objective > b.objective;
  });
  return trials;
}

std::vector<Trial> optimize(const Objective& objective, const SearchSpace& space,
                            std::size_t n_trials, const TpeParams& params, std::uint64_t seed,
                            std::vector<Trial> history, TrialSink* sink) {
  if (n_trials < 1) throw DataError("optimize: n_trials must be at least 1");
  params.validate();
  space.validate();

  for (std::size_t index = history.size(); index < n_trials; ++index) {
    const std::uint64_t trial_seed = rng::mix(seed, index);
    Trial trial;
    trial.seed = trial_seed;
    trial.config = tpe_suggest(history, space, params, trial_seed);
    try {
      const double value = objective(trial.config);
      if (std::isfinite(value)) {
        trial.objective = value;
        trial.status = Trial::Status::Ok;
      } else {
        trial.status = Trial::Status::Failed;
        trial.error = "objective returned a non-finite value";
      }
    } catch (const std::exception& e) {
      trial.status = Trial::Status::Failed;
      trial.error = e.what();
    }
    if (sink) sink->on_trial(index, trial);
    history.push_back(std::move(trial));
  }
  return sort_best_first(std::move(history));
}

std::map<std::string, Trial> best_per_family(const std::vector<Trial>& trials) {
  std::map<std::string, Trial> best;
  for (const Trial& t : trials) {
    if (t.status != Trial::Status::Ok) continue;
    const auto it = t.config.find("classifier");
    if (it == t.config.end()) continue;
    const std::string family = param_to_string(it->second);
    const auto existing = best.find(family);
    if (existing == best.end() || t.objective > existing->second.objective) {
      best[family] = t;
    }
  }
  return best;
}

SearchSpace build_paper_space() {
  SearchSpace space;
  space.dimensions = {
      Dimension::categorical("vectorizer", {"unigram", "tfidf"}),
      Dimension::categorical("use_svd", {"false", "true"}),
      Dimension::int_uniform("svd_k", 10, 300).conditioned_on("use_svd", "true"),
      Dimension::categorical("use_typo_correction", {"false", "true"}),
      Dimension::categorical("use_stopword_removal", {"false", "true"}),
      Dimension::categorical("use_label_overlay", {"false", "true"}),
      Dimension::categorical("classifier", {"logreg", "forest", "naive_bayes", "knn"}),
      Dimension::log_uniform("logreg_c_reg", 1e-3, 1e3).conditioned_on("classifier", "logreg"),
      Dimension::int_uniform("forest_n_estimators", 50, 400).conditioned_on("classifier", "forest"),
      Dimension::int_uniform("forest_min_samples_leaf", 1, 5).conditioned_on("classifier", "forest"),
      Dimension::log_uniform("nb_alpha", 1e-2, 10.0).conditioned_on("classifier", "naive_bayes"),
      Dimension::int_uniform("knn_k", 1, 25).conditioned_on("classifier", "knn"),
  };
  space.validate();
  return space;
}

namespace {

json param_to_json(const ParamValue& value) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  return std::get<std::string>(value);
}

ParamValue param_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  throw DataError("trial log: unsupported parameter type");
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

}  // namespace

void append_trial_log(const std::string& path, std::size_t index, const Trial& trial) {
  json line;
  line["index"] = index;
  json config = json::object();
  for (const auto& [name, value] : trial.config) config[name] = param_to_json(value);
  line["config"] = config;
  line["status"] = trial.status == Trial::Status::Ok ? "ok" : "failed";
  if (trial.status == Trial::Status::Ok) line["objective"] = trial.objective;
  if (!trial.error.empty()) line["error"] = trial.error;
  line["seed"] = trial.seed;
  line["timestamp"] = iso_timestamp();

  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw DataError("cannot append to trial log: " + path);
  out << line.dump() << "\n";
}

std::vector<Trial> load_trial_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trial log: " + path);
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    Trial trial;
    for (const auto& [name, value] : j.at("config").items())
      trial.config.emplace(name, param_from_json(value));
    trial.status = j.at("status").get<std::string>() == "ok" ? Trial::Status::Ok
                                                             : Trial::Status::Failed;
    if (j.contains("objective")) trial.objective = j["objective"].get<double>();
    if (j.contains("error")) trial.error = j["error"].get<std::string>();
    if (j.contains("seed")) trial.seed = j["seed"].get<std::uint64_t>();
    trials.push_back(std::move(trial));
  }
  return trials;
}

}  // namespace asag
