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


// Fixtures and independent reference computations shared by the tests.
// Oracles here deliberately avoid the library's own helpers: they work from
// raw embedding rows and raw triple lists.

#ifndef BCIE_TESTS_SUPPORT_HPP
#define BCIE_TESTS_SUPPORT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "bcie/critique_engine.hpp"
#include "bcie/gauss_belief.hpp"
#include "bcie/kg_data.hpp"
#include "bcie/pipeline.hpp"
#include "bcie/simple_embed.hpp"

namespace bcie::test {

inline EmbeddingTable random_table(std::uint32_t entities, std::uint32_t relations,
                                   std::uint32_t dim, std::mt19937_64& rng,
                                   double scale = 1.0) {
  EmbeddingTable t(entities, relations, dim);
  std::normal_distribution<double> n(0.0, scale);
  for (int b = 0; b < 4; ++b)
    for (double& x : t.block(static_cast<EmbeddingTable::Block>(b))) x = n(rng);
  return t;
}

// Hand-built graph: users u0,u1; items i0..i3; entities war, drama, vet.
//   ids: u0=0 u1=1 i0=2 i1=3 i2=4 i3=5 war=6 drama=7 vet=8
//   relations: likes=0 genre=1 subject_of=2
struct TinyGraph {
  static constexpr EntityId u0 = 0, u1 = 1, i0 = 2, i1 = 3, i2 = 4, i3 = 5;
  static constexpr EntityId war = 6, drama = 7, vet = 8;
  static constexpr RelationId likes = 0, genre = 1, subject_of = 2;
  KnowledgeGraph kg;

  TinyGraph() {
    Vocabulary v;
    v.users = {"u0", "u1"};
    v.items = {"i0", "i1", "i2", "i3"};
    v.entities = {"war", "drama", "vet"};
    v.relations = {"likes", "genre", "subject_of"};
    std::vector<Triple> t = {
        {u0, likes, i0},  {u0, likes, i1},   {u1, likes, i2},        {u1, likes, i3},
        {i0, genre, war}, {i1, genre, war},  {i2, genre, war},       {i3, genre, drama},
        {vet, subject_of, i0}, {vet, subject_of, i3},
    };
    kg = KnowledgeGraph(std::move(v), std::move(t));
  }
};

// Score straight from the definition, one product at a time.
inline double oracle_score(const EmbeddingTable& e, EntityId h, RelationId r, EntityId t) {
  double a = 0.0, b = 0.0;
  for (std::uint32_t k = 0; k < e.dim(); ++k) {
    a += e.entity_head(h)[k] * e.relation_fwd(r)[k] * e.entity_tail(t)[k];
    b += e.entity_head(t)[k] * e.relation_inv(r)[k] * e.entity_tail(h)[k];
  }
  return 0.5 * (a + b);
}

// Joint Gaussian over (z_u, z) in information form with cross precision
// diag(dr), marginalized in covariance form with dense inverses.
struct DenseMarginal {
  Eigen::VectorXd h;
  Eigen::MatrixXd J;
};

inline DenseMarginal oracle_marginal(const GaussianBelief& user, const GaussianBelief& item,
                                     const std::vector<double>& dr) {
  const Eigen::Index n = static_cast<Eigen::Index>(user.size());
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd pot(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    joint(k, k) = user.J[k];
    joint(n + k, n + k) = item.J[k];
    joint(k, n + k) = dr[k];
    joint(n + k, k) = dr[k];
    pot(k) = user.h[k];
    pot(n + k) = item.h[k];
  }
  const Eigen::MatrixXd cov = joint.inverse();
  const Eigen::VectorXd mean = cov * pot;
  DenseMarginal m;
  m.J = cov.topLeftCorner(n, n).inverse();
  m.h = m.J * mean.head(n);
  return m;
}

// Central differences of the batch objective with respect to every
// parameter.
inline EmbeddingTable oracle_gradient(const EmbeddingTable& emb,
                                      std::span<const LabeledTriple> batch, Likelihood lik,
                                      double lambda, double step = 1e-6) {
  EmbeddingTable grad(emb.entity_count(), emb.relation_count(), emb.dim());
  EmbeddingTable probe = emb;
  for (int b = 0; b < 4; ++b) {
    const auto blk = static_cast<EmbeddingTable::Block>(b);
    for (std::size_t k = 0; k < probe.block(blk).size(); ++k) {
      const double x = probe.block(blk)[k];
      probe.block(blk)[k] = x + step;
      const double up = batch_objective(probe, batch, lik, lambda, nullptr);
      probe.block(blk)[k] = x - step;
      const double down = batch_objective(probe, batch, lik, lambda, nullptr);
      probe.block(blk)[k] = x;
      grad.block(blk)[k] = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

// Popularity ranking hit@k counted from scratch.
inline double oracle_popularity_hit(const KnowledgeGraph& kg, const std::vector<Triple>& train,
                                    const std::vector<Triple>& eval, std::size_t k) {
  std::map<EntityId, std::size_t> count;
  std::map<EntityId, std::set<EntityId>> known;
  for (const auto& t : train)
    if (t.relation == kg.likes_relation()) {
      ++count[t.tail];
      known[t.head].insert(t.tail);
    }
  std::vector<EntityId> order;
  for (EntityId i = kg.item_begin(); i < kg.item_end(); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](EntityId a, EntityId b) { return count[a] > count[b]; });
  std::size_t hits = 0, total = 0;
  for (const auto& t : eval) {
    if (t.relation != kg.likes_relation()) continue;
    ++total;
    std::size_t pos = 0;
    for (EntityId i : order) {
      if (known[t.head].count(i)) continue;
      if (++pos > k) break;
      if (i == t.tail) {
        ++hits;
        break;
      }
    }
  }
  return total ? double(hits) / double(total) : 0.0;
}

// Facts of an item by a raw triple scan, as (relation, anchor, side) keys.
inline std::set<std::tuple<RelationId, EntityId, ItemSide>> oracle_item_facts(
    const KnowledgeGraph& kg, EntityId item) {
  std::set<std::tuple<RelationId, EntityId, ItemSide>> out;
  for (const auto& t : kg.triples()) {
    if (t.relation == kg.likes_relation()) continue;
    if (t.head == item) out.insert({t.relation, t.tail, ItemSide::kHead});
    if (t.tail == item) out.insert({t.relation, t.head, ItemSide::kTail});
  }
  return out;
}

// Brute-force diff selection: count occurrences of every open gt fact across
// the top-k items, return the lexicographically smallest (count, key).
inline std::optional<std::tuple<RelationId, EntityId, ItemSide>> oracle_diff_choice(
    const KnowledgeGraph& kg, EntityId gt, const std::vector<EntityId>& top_k,
    const std::set<CritiqueFact>& critiqued) {
  std::optional<std::pair<std::size_t, std::tuple<RelationId, EntityId, ItemSide>>> best;
  for (const auto& key : oracle_item_facts(kg, gt)) {
    CritiqueFact f{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::nullopt};
    if (critiqued.count(f)) continue;
    std::size_t c = 0;
    for (auto item : top_k) c += oracle_item_facts(kg, item).count(key);
    std::pair<std::size_t, std::tuple<RelationId, EntityId, ItemSide>> cand{c, key};
    if (!best || cand < *best) best = cand;
  }
  if (!best) return std::nullopt;
  return best->second;
}

// Planted synthetic dataset plus a model trained with the library defaults.
// Cached per (seed, attributes) since several suites share it.
struct TrainedFixture {
  SyntheticData synth;
  Dataset ds;
  EmbeddingTable emb;
  double valid_hit = 0.0;
};

inline const TrainedFixture& trained_fixture(std::uint64_t seed = 1,
                                             std::uint32_t attributes = 400) {
  static std::map<std::pair<std::uint64_t, std::uint32_t>, std::unique_ptr<TrainedFixture>> cache;
  auto& slot = cache[{seed, attributes}];
  if (!slot) {
    slot = std::make_unique<TrainedFixture>();
    SyntheticSpec spec;
    spec.attributes = attributes;
    spec.seed = seed;
    slot->synth = generate_synthetic_kg(spec, seed);
    auto split = split_likes(slot->synth.kg, 0.1, 0.2, seed);
    slot->ds = make_dataset(slot->synth.kg, std::move(split));
    TrainConfig cfg;
    cfg.seed = seed;
    auto r = train(slot->ds, cfg);
    slot->emb = std::move(r.table);
    slot->valid_hit = r.best_valid_hit;
  }
  return *slot;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("bcie_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace bcie::test

#endif  // BCIE_TESTS_SUPPORT_HPP
