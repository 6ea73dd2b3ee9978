#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "dcs/embedstore.hpp"
#include "dcs/error.hpp"
#include "oracle.hpp"

using namespace dcs;

namespace {

std::vector<EmbeddingRecord> random_records(std::mt19937_64& gen, std::size_t meetings, std::uint32_t dim,
                                            std::vector<std::uint16_t> layers) {
  std::normal_distribution<float> n(0.0f, 3.0f);
  std::vector<EmbeddingRecord> out;
  for (auto layer : layers)
    for (std::size_t t = 0; t < meetings; ++t)
      for (View v : {View::absolute, View::relative}) {
        if (v == View::relative && t == 0) continue;
        std::vector<float> x(dim);
        for (auto& e : x) e = n(gen);
        out.push_back({"meeting_" + std::to_string(t), v, layer, std::move(x)});
      }
  return out;
}

std::string serialize(const std::vector<EmbeddingRecord>& records) {
  std::ostringstream out(std::ios::binary);
  write_store(records, out);
  return out.str();
}

EmbeddingStore deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_store(in);
}

std::vector<Statement> corpus_of(std::size_t n) {
  std::vector<Statement> c;
  for (std::size_t t = 0; t < n; ++t)
    c.push_back({"meeting_" + std::to_string(t), Date(2001, 1, 1 + static_cast<unsigned>(t)), "", {}});
  return c;
}

}  // namespace

TEST_SUITE("embedstore") {

TEST_CASE("byte layout of a single record") {
  const std::vector<EmbeddingRecord> recs{{"ab", View::relative, 513, {1.0f, -2.5f}}};
  const auto bytes = serialize(recs);
  const std::string expected("DCSE\x01\x00\x00\x00"   // magic, version
                             "\x02\x00" "ab"          // id
                             "\x01"                   // view
                             "\x01\x02"               // layer 513
                             "\x02\x00\x00\x00"       // dim
                             "\x00\x00\x80\x3f"       // 1.0f
                             "\x00\x00\x20\xc0",      // -2.5f
                             4 + 4 + 2 + 2 + 1 + 2 + 4 + 8);
  CHECK(bytes == expected);
  CHECK(deserialize(bytes).records() == recs);
}

TEST_CASE("property: write then read reproduces records bit-exactly") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 25; ++trial) {
    auto recs = random_records(gen, 1 + gen() % 6, 1 + static_cast<std::uint32_t>(gen() % 40),
                               trial % 2 ? std::vector<std::uint16_t>{0} : std::vector<std::uint16_t>{2, 48});
    // awkward but finite values survive too
    recs.front().vector.front() = std::numeric_limits<float>::denorm_min();
    recs.back().vector.back() = -0.0f;
    const auto back = deserialize(serialize(recs));
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back.records()[i].meeting_id == recs[i].meeting_id);
      CHECK(back.records()[i].view == recs[i].view);
      CHECK(back.records()[i].layer == recs[i].layer);
      CHECK(std::memcmp(back.records()[i].vector.data(), recs[i].vector.data(),
                        recs[i].vector.size() * sizeof(float)) == 0);
    }
    CHECK(serialize(back.records()) == serialize(recs));
  }
}

TEST_CASE("file round-trip and missing file") {
  std::mt19937_64 gen(5);
  const auto recs = random_records(gen, 4, 8, {0});
  const auto dir = oracle::temp_dir("store_file");
  write_store(recs, dir / "s.dcse");
  CHECK(read_store(dir / "s.dcse").records() == recs);
  CHECK_THROWS_AS(read_store(dir / "nope.dcse"), IoError);
}

TEST_CASE("validation rejects bad records") {
  using R = std::vector<EmbeddingRecord>;
  CHECK_THROWS_AS(EmbeddingStore(R{{"a", View::absolute, 0, {1.0f, 2.0f}}, {"b", View::absolute, 0, {1.0f}}}),
                  ValidationError);
  CHECK_THROWS_AS(EmbeddingStore(R{{"a", View::absolute, 0, {std::nanf("")}}}), ValidationError);
  CHECK_THROWS_AS(EmbeddingStore(R{{"a", View::absolute, 0, {std::numeric_limits<float>::infinity()}}}),
                  ValidationError);
  CHECK_THROWS_AS(EmbeddingStore(R{{"a", View::absolute, 0, {}}}), ValidationError);
  CHECK_THROWS_AS(EmbeddingStore(R{{"a", View::absolute, 0, {1.0f}}, {"a", View::absolute, 0, {2.0f}}}),
                  ConflictError);
  // different layers may differ in dim
  CHECK_NOTHROW(EmbeddingStore(R{{"a", View::absolute, 0, {1.0f}}, {"a", View::absolute, 1, {1.0f, 2.0f}}}));
}

TEST_CASE("reader rejects corrupt input") {
  std::mt19937_64 gen(9);
  const auto good = serialize(random_records(gen, 3, 4, {0}));
  CHECK_THROWS_AS(deserialize("DCSX" + good.substr(4)), ValidationError);
  auto bad_version = good;
  bad_version[4] = 2;
  CHECK_THROWS_AS(deserialize(bad_version), ValidationError);
  CHECK_THROWS_AS(deserialize(good.substr(0, good.size() - 3)), ValidationError);
  CHECK_THROWS_AS(deserialize(good.substr(0, 3)), ValidationError);
  auto bad_view = serialize({{"a", View::absolute, 0, {1.0f}}});
  bad_view[8 + 2 + 1] = 7;
  CHECK_THROWS_AS(deserialize(bad_view), ValidationError);
  const std::string nan_record("DCSE\x01\x00\x00\x00\x01\x00" "a" "\x00\x00\x00\x01\x00\x00\x00"
                               "\x00\x00\xc0\x7f", 4 + 4 + 2 + 1 + 1 + 2 + 4 + 4);
  CHECK_THROWS_AS(deserialize(nan_record), ValidationError);
  CHECK(deserialize(std::string("DCSE\x01\x00\x00\x00", 8)).empty());
}

TEST_CASE("lookup helpers") {
  std::mt19937_64 gen(1);
  const EmbeddingStore store(random_records(gen, 3, 5, {4, 2}));
  CHECK(store.layers() == std::vector<std::uint16_t>{2, 4});
  CHECK(store.dim(View::absolute, 2) == 5u);
  CHECK_FALSE(store.dim(View::absolute, 3).has_value());
  CHECK(store.find("meeting_0", View::relative, 2) == nullptr);
  CHECK(store.find("meeting_1", View::relative, 2) != nullptr);
  CHECK(store.filter_layer(4).size() == 5);
  try {
    (void)store.at("meeting_9", View::absolute, 4);
    FAIL("expected a lookup failure");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("meeting_9") != std::string::npos);
  }
}

TEST_CASE("build_pairs yields T singletons and T-1 pairs") {
  std::mt19937_64 gen(2);
  for (std::size_t T : {1u, 2u, 7u}) {
    const EmbeddingStore store(random_records(gen, T, 6, {0, 1}));
    const auto ds = build_pairs(corpus_of(T), store, 1);
    CHECK(ds.abs_singletons.size() == T);
    CHECK(ds.pairs.size() == T - 1);
    CHECK(ds.dim() == 6);
    for (std::size_t t = 1; t < T; ++t) {
      CHECK(ds.pairs[t - 1].h_abs_prev == ds.abs_singletons[t - 1].h_abs);
      CHECK(ds.pairs[t - 1].h_abs_curr == ds.abs_singletons[t].h_abs);
      CHECK(ds.pairs[t - 1].h_rel_curr == widen(store.at(ds.pairs[t - 1].curr_id, View::relative, 1).vector));
    }
  }
}

TEST_CASE("build_pairs reports missing records and misordered corpora") {
  std::mt19937_64 gen(3);
  auto recs = random_records(gen, 4, 3, {0});
  std::erase_if(recs, [](const EmbeddingRecord& r) { return r.meeting_id == "meeting_2" && r.view == View::relative; });
  const EmbeddingStore store(recs);
  try {
    (void)build_pairs(corpus_of(4), store, 0);
    FAIL("expected a missing-record error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("meeting_2") != std::string::npos);
    CHECK(what.find("rel") != std::string::npos);
  }
  CHECK_THROWS_AS((void)build_pairs(corpus_of(3), store, 5), ValidationError);
  auto misordered = corpus_of(2);
  std::swap(misordered[0].date, misordered[1].date);
  CHECK_THROWS_AS((void)build_pairs(misordered, EmbeddingStore(random_records(gen, 2, 3, {0})), 0), OrderingError);
}

TEST_CASE("single-axis dataset reuses the absolute embedding") {
  std::mt19937_64 gen(4);
  const auto ds = build_pairs(corpus_of(5), EmbeddingStore(random_records(gen, 5, 4, {0})), 0);
  const auto single = with_absolute_as_relative(ds);
  for (const auto& p : single.pairs) CHECK(p.h_rel_curr == p.h_abs_curr);
  CHECK(single.abs_singletons.size() == ds.abs_singletons.size());
}

}  // TEST_SUITE
