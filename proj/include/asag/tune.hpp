#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace asag {

using ParamValue = std::variant<double, std::int64_t, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

std::string param_to_string(const ParamValue& value);

// Activates a dimension only when a parent categorical holds a given choice.
struct Condition {
  std::string parent;
  std::string value;
};

struct Dimension {
  enum class Kind { Uniform, LogUniform, IntUniform, Categorical };

  std::string name;
  Kind kind = Kind::Uniform;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t ilo = 0;
  std::int64_t ihi = 0;
  std::vector<std::string> choices;
  std::vector<double> prior_weights;  // optional; equal weights when empty
  std::optional<Condition> condition;

  static Dimension uniform(std::string name, double lo, double hi);
  static Dimension log_uniform(std::string name, double lo, double hi);
  static Dimension int_uniform(std::string name, std::int64_t lo, std::int64_t hi);
  static Dimension categorical(std::string name, std::vector<std::string> choices,
                               std::vector<double> prior_weights = {});
  Dimension conditioned_on(std::string parent, std::string value) const;
};

struct SearchSpace {
  std::vector<Dimension> dimensions;

  // Checks bounds, nonempty choices, and that conditions reference an earlier
  // categorical dimension with a known choice.
  void validate() const;
  bool is_active(const Dimension& dim, const ParamMap& config) const;
};

struct Trial {
  enum class Status { Ok, Failed };

  ParamMap config;
  double objective = 0.0;  // meaningful only when status == Ok
  Status status = Status::Failed;
  std::uint64_t seed = 0;
  std::string error;  // failure diagnostic
};

struct TpeParams {
  std::size_t n_startup = 20;
  double gamma = 0.25;
  std::size_t n_candidates = 24;
  double prior_weight = 1.0;

  void validate() const;
};

// Independent draw for every active dimension; conditional dimensions are
// sampled only once their parent's value is known.
ParamMap sample_random(const SearchSpace& space, std::uint64_t seed);

// Tree-structured Parzen estimator suggestion. Before n_startup trials exist
// the call degenerates to sample_random with the same seed. Otherwise ok
// trials split into the best ceil(gamma*n) and the rest; per dimension a
// Parzen density is fitted over each group (truncated Gaussian kernels with a
// nearest-neighbor bandwidth floored at 1% of the range for numerics,
// prior-smoothed counts for categoricals) and the best of n_candidates draws
// from the good density by density ratio wins.
ParamMap tpe_suggest(const std::vector<Trial>& history, const SearchSpace& space,
                     const TpeParams& params, std::uint64_t seed);

// Per-dimension density of a value under a set of observed trials; exposed for
// verification (the good/bad densities integrate to 1 over their domain).
double parzen_density(const Dimension& dim, const std::vector<ParamValue>& observations,
                      const ParamValue& value, double prior_weight);

using Objective = std::function<double(const ParamMap&)>;

class TrialSink {
public:
  virtual ~TrialSink() = default;
  virtual void on_trial(std::size_t index, const Trial& trial) = 0;
};

// Sequential optimization loop (maximizes). Objective exceptions become failed
// trials and never abort the loop. Trial i draws its suggestion seed from
// mix(seed, i), so a run resumed from a preloaded history continues exactly
// where a fresh run would have been. Returns the trials sorted best-first.
std::vector<Trial> optimize(const Objective& objective, const SearchSpace& space,
                            std::size_t n_trials, const TpeParams& params, std::uint64_t seed,
                            std::vector<Trial> history = {}, TrialSink* sink = nullptr);

std::vector<Trial> sort_best_first(std::vector<Trial> trials);

// Best ok trial for every value of the "classifier" dimension.
std::map<std::string, Trial> best_per_family(const std::vector<Trial>& trials);

// Canonical search space: vectorizer and classifier families, the SVD toggle
// with conditional rank, preprocessing toggles, and per-family hyperparameters.
SearchSpace build_paper_space();

// Append-only JSON-lines trial log; loading it back resumes a search.
void append_trial_log(const std::string& path, std::size_t index, const Trial& trial);
std::vector<Trial> load_trial_log(const std::string& path);

class FileTrialSink : public TrialSink {
public:
  explicit FileTrialSink(std::string path) : path_(std::move(path)) {}
  void on_trial(std::size_t index, const Trial& trial) override {
    append_trial_log(path_, index, trial);
  }

private:
  std::string path_;
};

}  // namespace asag
