#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "asag/errors.hpp"
#include "asag/pipeline.hpp"
#include "asag/rng.hpp"
#include "asag/tune.hpp"

using namespace asag;

namespace {

SearchSpace quadratic_space() {
  SearchSpace space;
  space.dimensions = {Dimension::uniform("x", -10.0, 10.0)};
  return space;
}

double quadratic_objective(const ParamMap& config) {
  const double x = std::get<double>(config.at("x"));
  return -(x - 2.0) * (x - 2.0);
}

double best_abs_error(const std::vector<Trial>& trials) {
  double best = std::numeric_limits<double>::infinity();
  for (const Trial& t : trials) {
    if (t.status != Trial::Status::Ok) continue;
    best = std::min(best, std::abs(std::get<double>(t.config.at("x")) - 2.0));
  }
  return best;
}

struct CaptureSink : TrialSink {
  std::vector<Trial> in_order;
  void on_trial(std::size_t, const Trial& trial) override { in_order.push_back(trial); }
};

}  // namespace

TEST_SUITE("tune") {

TEST_CASE("a single-choice categorical always samples that choice") {
  SearchSpace space;
  space.dimensions = {Dimension::categorical("only", {"a"})};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ParamMap config = sample_random(space, seed);
    CHECK(param_to_string(config.at("only")) == "a");
  }
}

TEST_CASE("uniform sampling is unbiased") {
  SearchSpace space;
  space.dimensions = {Dimension::uniform("u", 0.0, 1.0)};
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    total += std::get<double>(sample_random(space, seed).at("u"));
  }
  CHECK(total / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("log-uniform and integer dimensions respect their bounds") {
  SearchSpace space;
  space.dimensions = {Dimension::log_uniform("lu", 1e-3, 1e3),
                      Dimension::int_uniform("i", 3, 9)};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ParamMap config = sample_random(space, seed);
    const double lu = std::get<double>(config.at("lu"));
    const std::int64_t i = std::get<std::int64_t>(config.at("i"));
    CHECK(lu >= 1e-3);
    CHECK(lu <= 1e3);
    CHECK(i >= 3);
    CHECK(i <= 9);
  }
}

TEST_CASE("conditional dimensions appear only under the right parent value") {
  SearchSpace space;
  space.dimensions = {
      Dimension::categorical("mode", {"off", "on"}),
      Dimension::uniform("amount", 0.0, 1.0).conditioned_on("mode", "on"),
  };
  bool saw_on = false, saw_off = false;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ParamMap config = sample_random(space, seed);
    if (param_to_string(config.at("mode")) == "on") {
      CHECK(config.count("amount") == 1);
      saw_on = true;
    } else {
      CHECK(config.count("amount") == 0);
      saw_off = true;
    }
  }
  CHECK(saw_on);
  CHECK(saw_off);
}

TEST_CASE("space validation rejects broken definitions") {
  SearchSpace bad_bounds;
  bad_bounds.dimensions = {Dimension::uniform("x", 2.0, 1.0)};
  CHECK_THROWS_AS(bad_bounds.validate(), DataError);

  SearchSpace bad_log;
  bad_log.dimensions = {Dimension::log_uniform("x", 0.0, 1.0)};
  CHECK_THROWS_AS(bad_log.validate(), DataError);

  SearchSpace empty_cat;
  empty_cat.dimensions = {Dimension::categorical("c", {})};
  CHECK_THROWS_AS(empty_cat.validate(), DataError);

  SearchSpace orphan;
  orphan.dimensions = {Dimension::uniform("x", 0.0, 1.0).conditioned_on("missing", "v")};
  CHECK_THROWS_AS(orphan.validate(), DataError);

  SearchSpace bad_value;
  bad_value.dimensions = {Dimension::categorical("c", {"a"}),
                          Dimension::uniform("x", 0.0, 1.0).conditioned_on("c", "zzz")};
  CHECK_THROWS_AS(bad_value.validate(), DataError);
}

TEST_CASE("suggestions during startup equal random sampling with the same seed") {
  const SearchSpace space = quadratic_space();
  TpeParams params;
  params.n_startup = 5;
  std::vector<Trial> history;
  for (int i = 0; i < 3; ++i) {
    Trial t;
    t.config = sample_random(space, 1000 + i);
    t.objective = quadratic_objective(t.config);
    t.status = Trial::Status::Ok;
    history.push_back(t);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(tpe_suggest(history, space, params, seed) == sample_random(space, seed));
  }
}

TEST_CASE("a degenerate all-failed history falls back to random sampling") {
  const SearchSpace space = quadratic_space();
  TpeParams params;
  params.n_startup = 2;
  std::vector<Trial> history(10);
  for (auto& t : history) {
    t.config = sample_random(space, 1);
    t.status = Trial::Status::Failed;
  }
  CHECK(tpe_suggest(history, space, params, 3) == sample_random(space, 3));
}

TEST_CASE("tpe concentrates suggestions near the optimum") {
  const SearchSpace space = quadratic_space();
  TpeParams params;
  params.n_startup = 10;

  // 40 observed trials spread over the domain, best ones near 2.
  std::vector<Trial> history;
  rng::Engine engine(5);
  for (int i = 0; i < 40; ++i) {
    Trial t;
    const double x = engine.uniform(-10.0, 10.0);
    t.config = ParamMap{{"x", x}};
    t.objective = quadratic_objective(t.config);
    t.status = Trial::Status::Ok;
    history.push_back(t);
  }

  std::vector<double> tpe_errors, random_errors;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    tpe_errors.push_back(
        std::abs(std::get<double>(tpe_suggest(history, space, TpeParams{}, seed).at("x")) - 2.0));
    random_errors.push_back(
        std::abs(std::get<double>(sample_random(space, seed).at("x")) - 2.0));
  }
  std::sort(tpe_errors.begin(), tpe_errors.end());
  std::sort(random_errors.begin(), random_errors.end());
  CHECK(tpe_errors[50] < random_errors[50]);
}

TEST_CASE("categorical evidence outweighs the prior") {
  SearchSpace space;
  space.dimensions = {Dimension::categorical("c", {"a", "b"})};
  TpeParams params;
  params.n_startup = 4;

  std::vector<Trial> history;
  for (int i = 0; i < 5; ++i) {
    Trial good;
    good.config = ParamMap{{"c", std::string("a")}};
    good.objective = 1.0;
    good.status = Trial::Status::Ok;
    history.push_back(good);
    Trial bad;
    bad.config = ParamMap{{"c", std::string("b")}};
    bad.objective = 0.0;
    bad.status = Trial::Status::Ok;
    history.push_back(bad);
  }

  // reweighted count density: (1*0.5 + n_a) / (1 + n_obs)
  const std::vector<ParamValue> good_obs(3, ParamValue{std::string("a")});
  const double density_a = parzen_density(space.dimensions[0], good_obs, ParamValue{std::string("a")}, 1.0);
  CHECK(density_a == doctest::Approx((1.0 * 0.5 + 3.0) / (1.0 + 3.0)));

  std::size_t picked_a = 0;
  const std::size_t draws = 200;
  for (std::uint64_t seed = 0; seed < draws; ++seed) {
    const ParamMap suggestion = tpe_suggest(history, space, params, seed);
    if (param_to_string(suggestion.at("c")) == "a") ++picked_a;
  }
  // the prior alone would give 0.5
  CHECK(static_cast<double>(picked_a) / static_cast<double>(draws) > 0.5);
}

TEST_CASE("numeric parzen density integrates to one") {
  const Dimension dim = Dimension::uniform("x", -10.0, 10.0);
  std::vector<ParamValue> observations = {-4.0, -3.9, 0.5, 2.0, 2.1, 2.15, 9.0};
  const std::size_t n_points = 20000;
  double integral = 0.0;
  const double step = 20.0 / static_cast<double>(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = -10.0 + (static_cast<double>(i) + 0.5) * step;
    integral += parzen_density(dim, observations, ParamValue{x}, 1.0) * step;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));

  // prior-only density integrates to one as well
  integral = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = -10.0 + (static_cast<double>(i) + 0.5) * step;
    integral += parzen_density(dim, {}, ParamValue{x}, 1.0) * step;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimize runs a single random trial when asked for one") {
  const std::vector<Trial> trials =
      optimize(quadratic_objective, quadratic_space(), 1, TpeParams{}, 9);
  REQUIRE(trials.size() == 1);
  CHECK(trials[0].status == Trial::Status::Ok);
  CHECK(trials[0].config == sample_random(quadratic_space(), rng::mix(9, 0)));
}

TEST_CASE("optimize is reproducible and sorted best-first") {
  const std::vector<Trial> a =
      optimize(quadratic_objective, quadratic_space(), 40, TpeParams{}, 123);
  const std::vector<Trial> b =
      optimize(quadratic_objective, quadratic_space(), 40, TpeParams{}, 123);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].config == b[i].config);
    CHECK(a[i].objective == b[i].objective);
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i].status == Trial::Status::Ok) CHECK(a[i - 1].objective >= a[i].objective);
  }
}

TEST_CASE("best-so-far objective is nondecreasing in completion order") {
  CaptureSink sink;
  optimize(quadratic_objective, quadratic_space(), 60, TpeParams{}, 31, {}, &sink);
  REQUIRE(sink.in_order.size() == 60);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_curve;
  for (const Trial& t : sink.in_order) {
    if (t.status == Trial::Status::Ok) best = std::max(best, t.objective);
    best_curve.push_back(best);
  }
  CHECK(std::is_sorted(best_curve.begin(), best_curve.end()));
}

TEST_CASE("objective exceptions become failed trials") {
  const Objective explosive = [](const ParamMap&) -> double {
    throw std::runtime_error("boom");
  };
  const std::vector<Trial> trials =
      optimize(explosive, quadratic_space(), 8, TpeParams{}, 4);
  REQUIRE(trials.size() == 8);
  for (const Trial& t : trials) {
    CHECK(t.status == Trial::Status::Failed);
    CHECK(t.error == "boom");
  }
}

TEST_CASE("non-finite objectives are failures, not winners") {
  const Objective sometimes_nan = [](const ParamMap& config) {
    const double x = std::get<double>(config.at("x"));
    return x > 0 ? std::numeric_limits<double>::quiet_NaN() : x;
  };
  const std::vector<Trial> trials =
      optimize(sometimes_nan, quadratic_space(), 20, TpeParams{}, 5);
  for (const Trial& t : trials) {
    if (t.status == Trial::Status::Ok) CHECK(std::isfinite(t.objective));
  }
}

TEST_CASE("resuming from a preloaded history matches the uninterrupted run") {
  const SearchSpace space = quadratic_space();
  TpeParams params;
  CaptureSink full;
  optimize(quadratic_objective, space, 30, params, 77, {}, &full);

  CaptureSink first_half;
  optimize(quadratic_objective, space, 15, params, 77, {}, &first_half);
  CaptureSink second_half;
  optimize(quadratic_objective, space, 30, params, 77, first_half.in_order, &second_half);

  REQUIRE(second_half.in_order.size() == 15);
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK(second_half.in_order[i].config == full.in_order[15 + i].config);
  }
}

TEST_CASE("trial log round trip") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "asag_trials_test.jsonl").string();
  std::filesystem::remove(path);

  CaptureSink sink;
  optimize(quadratic_objective, quadratic_space(), 10, TpeParams{}, 55, {}, &sink);
  for (std::size_t i = 0; i < sink.in_order.size(); ++i)
    append_trial_log(path, i, sink.in_order[i]);

  const std::vector<Trial> loaded = load_trial_log(path);
  REQUIRE(loaded.size() == sink.in_order.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].config == sink.in_order[i].config);
    CHECK(loaded[i].status == sink.in_order[i].status);
    if (loaded[i].status == Trial::Status::Ok)
      CHECK(loaded[i].objective == doctest::Approx(sink.in_order[i].objective));
  }
  std::filesystem::remove(path);
}

TEST_CASE("the canonical space samples valid configurations") {
  const SearchSpace space = build_paper_space();
  CHECK_NOTHROW(space.validate());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ParamMap sampled = sample_random(space, seed);
    // must convert into a pipeline configuration without complaint
    const PipelineConfig config = config_from_params(sampled, PipelineConfig{});
    if (param_to_string(sampled.at("use_svd")) == "true") {
      CHECK(sampled.count("svd_k") == 1);
      const auto k = std::get<std::int64_t>(sampled.at("svd_k"));
      CHECK(k >= 10);
      CHECK(k <= 300);
    } else {
      CHECK(sampled.count("svd_k") == 0);
    }
    const std::string family = param_to_string(sampled.at("classifier"));
    CHECK((family == "logreg" || family == "forest" || family == "naive_bayes" ||
           family == "knn"));
    (void)config;
  }
}

TEST_CASE("the canonical space contains the winning task-A configuration") {
  const SearchSpace space = build_paper_space();
  const auto find = [&](const std::string& name) -> const Dimension& {
    for (const auto& d : space.dimensions) {
      if (d.name == name) return d;
    }
    FAIL("missing dimension");
    return space.dimensions.front();
  };
  const Dimension& vectorizer = find("vectorizer");
  CHECK(std::find(vectorizer.choices.begin(), vectorizer.choices.end(), "unigram") !=
        vectorizer.choices.end());
  const Dimension& use_svd = find("use_svd");
  CHECK(std::find(use_svd.choices.begin(), use_svd.choices.end(), "true") !=
        use_svd.choices.end());
  const Dimension& classifier = find("classifier");
  CHECK(std::find(classifier.choices.begin(), classifier.choices.end(), "forest") !=
        classifier.choices.end());
  const Dimension& estimators = find("forest_n_estimators");
  CHECK(estimators.ilo <= 200);
  CHECK(estimators.ihi >= 200);
}

TEST_CASE("best_per_family keeps one winner per classifier") {
  std::vector<Trial> trials;
  const auto add = [&](const std::string& family, double objective) {
    Trial t;
    t.config = ParamMap{{"classifier", family}};
    t.objective = objective;
    t.status = Trial::Status::Ok;
    trials.push_back(t);
  };
  add("forest", 0.7);
  add("forest", 0.9);
  add("logreg", 0.8);
  Trial failed;
  failed.config = ParamMap{{"classifier", std::string("knn")}};
  failed.status = Trial::Status::Failed;
  trials.push_back(failed);

  const auto best = best_per_family(trials);
  REQUIRE(best.size() == 2);
  CHECK(best.at("forest").objective == doctest::Approx(0.9));
  CHECK(best.at("logreg").objective == doctest::Approx(0.8));
}

}  // TEST_SUITE
