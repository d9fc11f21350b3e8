#include "doctest.h"

#include "asag/corpus.hpp"
#include "asag/errors.hpp"
#include "support/oracles.hpp"

using namespace asag;

TEST_SUITE("corpus") {

TEST_CASE("parse_dataset echoes simple rows") {
  const Dataset ds = parse_dataset("id,text,label\nr1,abc,1\nr2,def,0\n", Task::A, Split::Train);
  REQUIRE(ds.size() == 2);
  CHECK(ds.responses[0].id == "r1");
  CHECK(ds.responses[0].text == "abc");
  CHECK(ds.responses[0].label == 1);
  CHECK(ds.responses[1].label == 0);
}

TEST_CASE("parse_dataset keeps row order and quoting") {
  const Dataset ds = parse_dataset(
      "id,text,label\nr1,\"a, quoted \"\"text\"\"\",1\r\nr2,plain,0\n", Task::B, Split::Train);
  REQUIRE(ds.size() == 2);
  CHECK(ds.responses[0].text == "a, quoted \"text\"");
  CHECK(ds.responses[1].text == "plain");
}

TEST_CASE("bad labels are reported with their row number") {
  try {
    parse_dataset("id,text,label\nr1,abc,2\n", Task::A, Split::Train);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("duplicate ids, empty text, and column drift are rejected") {
  CHECK_THROWS_AS(parse_dataset("id,text,label\nr1,a,1\nr1,b,0\n", Task::A, Split::Train),
                  DataError);
  CHECK_THROWS_AS(parse_dataset("id,text,label\nr1,   ,1\n", Task::A, Split::Train), DataError);
  CHECK_THROWS_AS(parse_dataset("id,text,label\nr1,a\n", Task::A, Split::Train), DataError);
  CHECK_THROWS_AS(parse_dataset("id,wrong\n", Task::A, Split::Train), DataError);
}

TEST_CASE("train split requires labels, dev split does not") {
  CHECK_THROWS_AS(parse_dataset("id,text,label\nr1,abc,\n", Task::A, Split::Train), DataError);
  const Dataset dev = parse_dataset("id,text,label\nr1,abc,\n", Task::A, Split::Dev);
  CHECK_FALSE(dev.responses[0].label.has_value());
  const Dataset dev2 = parse_dataset("id,text\nr1,abc\n", Task::A, Split::Dev);
  CHECK_FALSE(dev2.responses[0].label.has_value());
}

TEST_CASE("empty overlay is the identity") {
  const Dataset ds = oracles::synthetic_counts_dataset(3, 3);
  const OverlayResult result = apply_overlay(ds, LabelOverlay{});
  CHECK(result.dataset == ds);
  CHECK(result.flips_to_positive == 0);
  CHECK(result.flips_to_negative == 0);
}

TEST_CASE("overlay arithmetic matches the published flip counts") {
  // 191/77 with 10 corrections up and 4 down lands on 197/71.
  Dataset task_a = oracles::synthetic_counts_dataset(191, 77);
  LabelOverlay overlay;
  for (std::size_t i = 0; i < 4; ++i) overlay.entries["r" + std::to_string(i)] = 0;
  for (std::size_t i = 191; i < 201; ++i) overlay.entries["r" + std::to_string(i)] = 1;
  const OverlayResult result = apply_overlay(task_a, overlay);
  CHECK(result.flips_to_positive == 10);
  CHECK(result.flips_to_negative == 4);
  const DatasetStats stats = summarize(result.dataset);
  CHECK(stats.n_positive == 197);
  CHECK(stats.n_negative == 71);

  // 168/137 with 46 up and 13 down lands on 201/104.
  Dataset task_b = oracles::synthetic_counts_dataset(168, 137, Task::B);
  LabelOverlay overlay_b;
  for (std::size_t i = 0; i < 13; ++i) overlay_b.entries["r" + std::to_string(i)] = 0;
  for (std::size_t i = 168; i < 214; ++i) overlay_b.entries["r" + std::to_string(i)] = 1;
  const OverlayResult result_b = apply_overlay(task_b, overlay_b);
  const DatasetStats stats_b = summarize(result_b.dataset);
  CHECK(stats_b.n_positive == 201);
  CHECK(stats_b.n_negative == 104);
}

TEST_CASE("overlay rejects unknown ids, no-op entries, and non-train splits") {
  Dataset ds = oracles::synthetic_counts_dataset(3, 3);
  LabelOverlay missing;
  missing.entries["nope"] = 1;
  CHECK_THROWS_AS(apply_overlay(ds, missing), DataError);

  LabelOverlay noop;
  noop.entries["r0"] = 1;  // r0 already labeled 1
  CHECK_THROWS_AS(apply_overlay(ds, noop), DataError);

  ds.split = Split::Dev;
  LabelOverlay flip;
  flip.entries["r0"] = 0;
  CHECK_THROWS_AS(apply_overlay(ds, flip), DataError);
}

TEST_CASE("overlay application is an involution on the flipped ids") {
  const Dataset ds = oracles::synthetic_counts_dataset(10, 10);
  LabelOverlay forward, inverse;
  forward.entries["r0"] = 0;
  forward.entries["r12"] = 1;
  inverse.entries["r0"] = 1;
  inverse.entries["r12"] = 0;
  const Dataset once = apply_overlay(ds, forward).dataset;
  const Dataset back = apply_overlay(once, inverse).dataset;
  CHECK(back == ds);
}

TEST_CASE("summarize counts characters and labels") {
  Dataset ds;
  ds.split = Split::Train;
  ds.responses = {{"a", "ab", 1}, {"b", "abcd", 0}};
  const DatasetStats stats = summarize(ds);
  CHECK(stats.n_total == 2);
  CHECK(stats.n_positive == 1);
  CHECK(stats.n_negative == 1);
  CHECK(stats.avg_chars == doctest::Approx(3.0));
  CHECK(stats.positive_fraction == doctest::Approx(0.5));
}

TEST_CASE("summarize measures codepoints, not bytes") {
  Dataset ds;
  ds.split = Split::Dev;
  ds.responses = {{"a", "caf\xC3\xA9", std::nullopt}};  // 4 codepoints, 5 bytes
  CHECK(summarize(ds).avg_chars == doctest::Approx(4.0));
}

TEST_CASE("positive fraction mirrors the published task ratios") {
  const DatasetStats stats = summarize(oracles::synthetic_counts_dataset(191, 77));
  CHECK(stats.positive_fraction == doctest::Approx(0.71).epsilon(0.01));
}

TEST_CASE("summarize rejects an empty dataset") {
  CHECK_THROWS_AS(summarize(Dataset{}), DataError);
}

TEST_CASE("load then summarize never throws on valid content") {
  const std::string content = "id,text,label\na,first answer,1\nb,second answer,0\nc,third,1\n";
  const Dataset ds = parse_dataset(content, Task::A, Split::Train);
  CHECK(ds.size() == 3);  // rows minus header
  CHECK_NOTHROW(summarize(ds));
  // loaders are deterministic
  CHECK(parse_dataset(content, Task::A, Split::Train) == ds);
}

TEST_CASE("overlay csv parsing") {
  const LabelOverlay overlay = parse_overlay("id,corrected_label\nr1,0\nr9,1\n");
  REQUIRE(overlay.entries.size() == 2);
  CHECK(overlay.entries.at("r1") == 0);
  CHECK(overlay.entries.at("r9") == 1);
  CHECK_THROWS_AS(parse_overlay("id,corrected_label\nr1,2\n"), DataError);
  CHECK_THROWS_AS(parse_overlay("wrong,header\n"), DataError);
}

TEST_CASE("fingerprint tracks content") {
  const Dataset a = oracles::synthetic_counts_dataset(5, 5);
  Dataset b = a;
  CHECK(dataset_fingerprint(a) == dataset_fingerprint(b));
  b.responses[0].label = 0;
  CHECK(dataset_fingerprint(a) != dataset_fingerprint(b));
}

}  // TEST_SUITE
