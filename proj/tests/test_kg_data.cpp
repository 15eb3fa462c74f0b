// Copyright 2026 The BCIE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "bcie/error.hpp"

using namespace bcie;
using bcie::test::TinyGraph;

namespace {

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& body) {
  auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_SUITE("kg_data") {

TEST_CASE("ratings use a strict threshold") {
  auto dir = test::temp_dir("ratings");
  auto p = write_file(dir, "r.tsv",
                      "u1\tm1\t4.0\t0\n"
                      "u1\tm2\t3.5\t0\n"
                      "u2\tm1\t2.0\t0\n"
                      "u2\tm3\t3.6\t0\n"
                      "u3\tm2\t5.0\t0\n");
  auto r = load_ratings(p, 3.5);
  // Hand count: 4.0, 3.6 and 5.0 clear 3.5; 3.5 itself does not.
  CHECK(r.likes.size() == 3);
  for (const auto& t : r.likes) CHECK(t.relation == 0);

  auto three = write_file(dir, "r3.tsv", "a\tx\t2.0\t1\nb\tx\t3.6\t1\nc\ty\t5.0\t1\n");
  CHECK(load_ratings(three, 3.5).likes.size() == 2);
}

TEST_CASE("ratings reject malformed rows and empty results") {
  auto dir = test::temp_dir("ratings_bad");
  auto bad = write_file(dir, "bad.tsv", "u1\tm1\tfour\t0\n");
  CHECK_THROWS_AS(load_ratings(bad, 3.5), Error);
  auto short_row = write_file(dir, "short.tsv", "u1\tm1\t4.0\n");
  CHECK_THROWS_AS(load_ratings(short_row, 3.5), Error);
  auto low = write_file(dir, "low.tsv", "u1\tm1\t1.0\t0\n");
  try {
    load_ratings(low, 3.5);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kData);
  }
  CHECK_THROWS_AS(load_ratings(dir / "missing.tsv", 3.5), Error);
}

TEST_CASE("kg triples intern entities and dedup") {
  auto dir = test::temp_dir("kgtriples");
  auto ratings = write_file(dir, "r.tsv", "u1\tm1\t5\t0\nu1\tm2\t5\t0\n");
  auto rd = load_ratings(ratings, 3.5);
  auto map = write_file(dir, "map.tsv", "m1\tMovieOne\nm9\tGhost\n");
  auto triples = write_file(dir, "kg.tsv",
                            "MovieOne\tgenre\tWar\n"
                            "MovieOne\tdirected_by\tNolan\n"
                            "MovieOne\tgenre\tWar\n"
                            "Critic\tlikes\tMovieOne\n");
  auto side = load_kg_triples(triples, map, rd.vocab);
  // Two distinct facts of the mapped item plus the renamed likes fact.
  CHECK(side.triples.size() == 3);
  // War, Nolan and the unmapped head Critic become fresh entities.
  CHECK(side.entities == std::vector<std::string>{"War", "Nolan", "Critic"});
  CHECK(side.relations.front() == "likes");
  CHECK(std::find(side.relations.begin(), side.relations.end(), "kg:likes") !=
        side.relations.end());
  CHECK(side.warnings.size() == 1);  // m9 is not a rated item

  auto kg = build_user_item_kg(rd, side);
  CHECK(kg.triples().size() == 2 + 3);
  const EntityId m1 = kg.item_begin();
  CHECK(kg.side_fact_count(m1) == 3);
  for (const auto& t : kg.triples())
    if (t.relation == kg.likes_relation()) {
      CHECK(kg.is_user(t.head));
      CHECK(kg.is_item(t.tail));
    }
}

TEST_CASE("build_user_item_kg is the union of likes and side facts") {
  RatingsData rd;
  rd.vocab.users = {"a", "b"};
  rd.vocab.items = {"x", "y"};
  rd.vocab.relations = {"likes"};
  rd.likes = {{0, 0, 2}, {0, 0, 3}, {1, 0, 2}, {1, 0, 3}};
  SideInfo side;
  side.entities = {"e0", "e1"};
  side.relations = {"likes", "r"};
  side.triples = {{2, 1, 4}, {3, 1, 4}, {3, 1, 5}};
  auto kg = build_user_item_kg(rd, side);
  CHECK(kg.triples().size() == 7);
  CHECK(kg.rebuilt_by_head() == std::vector<std::vector<std::uint32_t>>(
                                    [&] {
                                      std::vector<std::vector<std::uint32_t>> v;
                                      for (EntityId e = 0; e < kg.entity_count(); ++e)
                                        v.push_back(kg.by_head(e));
                                      return v;
                                    }()));
  CHECK_NOTHROW(kg.validate());

  auto only_likes = build_user_item_kg(rd, SideInfo{});
  CHECK(only_likes.triples().size() == 4);
}

TEST_CASE("knowledge graph rejects likes outside user x item") {
  Vocabulary v;
  v.users = {"u"};
  v.items = {"i"};
  v.relations = {"likes"};
  CHECK_THROWS_AS(KnowledgeGraph(v, {{1, 0, 0}}), Error);
  CHECK_THROWS_AS(KnowledgeGraph(v, {{0, 0, 7}}), Error);
}

TEST_CASE("filter_min_facts keeps items at the threshold") {
  // Item x has 5 facts, item y has 4.
  Vocabulary v;
  v.users = {"u"};
  v.items = {"x", "y"};
  for (int k = 0; k < 6; ++k) v.entities.push_back("e" + std::to_string(k));
  v.relations = {"likes", "r"};
  std::vector<Triple> t = {{0, 0, 1}, {0, 0, 2}};
  for (EntityId e = 3; e < 8; ++e) t.push_back({1, 1, e});
  for (EntityId e = 3; e < 7; ++e) t.push_back({2, 1, e});
  KnowledgeGraph kg(v, t);
  auto f = filter_min_facts(kg, 5);
  CHECK(f.item_count() == 1);
  CHECK(f.vocab().items == std::vector<std::string>{"x"});
  // y's likes triple is gone; x keeps its like and 5 facts.
  CHECK(f.triples().size() == 6);
  CHECK_NOTHROW(f.validate());

  auto same = filter_min_facts(kg, 1);
  CHECK(same.triples().size() == kg.triples().size());
  CHECK(same.entity_count() == kg.entity_count() - 1);  // e5 had no triples at all
}

TEST_CASE("split_likes uses floor for validation and test") {
  Vocabulary v;
  v.users = {"a", "b"};
  for (int k = 0; k < 10; ++k) v.items.push_back("i" + std::to_string(k));
  v.relations = {"likes"};
  std::vector<Triple> t;
  for (EntityId i = 2; i < 12; ++i) t.push_back({0, 0, i});
  t.push_back({1, 0, 2});
  KnowledgeGraph kg(v, t);
  auto s = split_likes(kg, 0.1, 0.2, 7);
  auto count = [](const std::vector<Triple>& ts, EntityId u) {
    return std::count_if(ts.begin(), ts.end(), [&](const Triple& x) { return x.head == u; });
  };
  CHECK(count(s.train, 0) == 7);
  CHECK(count(s.validation, 0) == 1);
  CHECK(count(s.test, 0) == 2);
  CHECK(count(s.train, 1) == 1);
  CHECK(count(s.validation, 1) + count(s.test, 1) == 0);

  auto again = split_likes(kg, 0.1, 0.2, 7);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  std::set<Triple> seen;
  for (const auto* part : {&s.train, &s.validation, &s.test})
    for (const auto& x : *part) CHECK(seen.insert(x).second);
  CHECK(seen.size() == kg.triples().size());
}

TEST_CASE("side facts always stay in train") {
  TinyGraph g;
  auto s = split_likes(g.kg, 0.3, 0.3, 1);
  for (const auto* part : {&s.validation, &s.test})
    for (const auto& t : *part) CHECK(t.relation == TinyGraph::likes);
}

TEST_CASE("synthetic generator plants the cluster structure") {
  SyntheticSpec spec;
  spec.users = 4;
  spec.items = 20;
  spec.attributes = 5;
  spec.clusters = 2;
  spec.p_in = 0.9;
  spec.p_out = 0.1;
  // Empirical within-cluster like rate pooled over seeds.
  std::size_t in_pairs = 0, in_likes = 0, out_pairs = 0, out_likes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto d = generate_synthetic_kg(spec, seed);
    std::set<std::pair<EntityId, EntityId>> liked;
    for (const auto& t : d.kg.triples())
      if (t.relation == 0) liked.insert({t.head, t.tail});
    for (EntityId u = 0; u < spec.users; ++u)
      for (std::uint32_t i = 0; i < spec.items; ++i) {
        const bool same = d.user_cluster[u] == d.item_cluster[i];
        const bool like = liked.count({u, EntityId(spec.users + i)}) > 0;
        (same ? in_pairs : out_pairs)++;
        (same ? in_likes : out_likes) += like;
      }
    for (EntityId i = d.kg.item_begin(); i < d.kg.item_end(); ++i)
      CHECK(d.kg.side_fact_count(i) == spec.facts_per_item);
  }
  CHECK(std::abs(double(in_likes) / double(in_pairs) - 0.9) <= 0.1);
  CHECK(std::abs(double(out_likes) / double(out_pairs) - 0.1) <= 0.1);
}

TEST_CASE("synthetic generator is deterministic per seed") {
  SyntheticSpec spec;
  auto a = generate_synthetic_kg(spec, 3);
  auto b = generate_synthetic_kg(spec, 3);
  auto c = generate_synthetic_kg(spec, 4);
  CHECK(a.kg.triples() == b.kg.triples());
  CHECK(a.kg.triples() != c.kg.triples());
}

TEST_CASE("synthetic spec files parse key=value lines") {
  auto dir = test::temp_dir("spec");
  auto p = write_file(dir, "s.txt", "# comment\nusers=7\nitems = 30\np_in=0.5\n\nseed=9\n");
  auto spec = parse_synthetic_spec(p);
  CHECK(spec.users == 7);
  CHECK(spec.items == 30);
  CHECK(spec.p_in == 0.5);
  CHECK(spec.seed == 9);
  auto bad = write_file(dir, "bad.txt", "colour=blue\n");
  CHECK_THROWS_AS(parse_synthetic_spec(bad), Error);
}

TEST_CASE("datasets round-trip through disk") {
  SyntheticSpec spec;
  spec.users = 20;
  spec.items = 30;
  spec.attributes = 40;
  auto synth = generate_synthetic_kg(spec, 2);
  auto ds = make_dataset(synth.kg, split_likes(synth.kg, 0.1, 0.2, 2));
  auto dir = test::temp_dir("dataset");
  save_dataset(ds, dir);
  auto back = load_dataset(dir);
  CHECK(back.kg.triples() == ds.kg.triples());
  CHECK(back.split.train == ds.split.train);
  CHECK(back.split.validation == ds.split.validation);
  CHECK(back.split.test == ds.split.test);
  CHECK(back.kg.vocab().items == ds.kg.vocab().items);
  CHECK(back.kg.vocab().relations == ds.kg.vocab().relations);

  auto stats = dataset_stats(back);
  CHECK(stats.users == 20);
  CHECK(stats.items == 30);
  CHECK(stats.min_item_facts >= 5);
  CHECK(stats.train_likes + stats.valid_likes + stats.test_likes == stats.likes);
  CHECK(format_stats_table(stats).find("#Users") != std::string::npos);

  // Saving twice gives identical bytes.
  auto dir2 = test::temp_dir("dataset2");
  save_dataset(back, dir2);
  for (const char* f : {"entities.tsv", "relations.tsv", "train.tsv", "valid.tsv", "test.tsv"}) {
    std::ifstream a(dir / f), b(dir2 / f);
    std::string sa((std::istreambuf_iterator<char>(a)), {});
    std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK_MESSAGE(sa == sb, f);
  }
}

}  // TEST_SUITE
