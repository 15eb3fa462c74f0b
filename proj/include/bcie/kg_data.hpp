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


#ifndef BCIE_KG_DATA_HPP
#define BCIE_KG_DATA_HPP

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bcie {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class EntityKind { kUser, kItem, kEntity };

// Name tables for the three entity ranges. Ids are dense and laid out as
// users [0, U), items [U, U + I), KG entities [U + I, E).
struct Vocabulary {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::vector<std::string> entities;
  std::vector<std::string> relations;  // relations[0] is the likes relation

  std::uint32_t entity_count() const {
    return static_cast<std::uint32_t>(users.size() + items.size() +
                                      entities.size());
  }
  std::string entity_name(EntityId id) const;
};

// Immutable after construction. Adjacency lists hold indices into triples().
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(Vocabulary vocab, std::vector<Triple> triples,
                 RelationId likes_relation = 0);

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<Triple>& triples() const { return triples_; }
  const std::vector<std::uint32_t>& by_head(EntityId e) const {
    return by_head_[e];
  }
  const std::vector<std::uint32_t>& by_tail(EntityId e) const {
    return by_tail_[e];
  }

  std::uint32_t entity_count() const { return vocab_.entity_count(); }
  std::uint32_t relation_count() const {
    return static_cast<std::uint32_t>(vocab_.relations.size());
  }
  std::uint32_t user_count() const {
    return static_cast<std::uint32_t>(vocab_.users.size());
  }
  std::uint32_t item_count() const {
    return static_cast<std::uint32_t>(vocab_.items.size());
  }
  EntityId item_begin() const { return user_count(); }
  EntityId item_end() const { return user_count() + item_count(); }
  RelationId likes_relation() const { return likes_; }

  bool is_user(EntityId e) const { return e < user_count(); }
  bool is_item(EntityId e) const { return e >= item_begin() && e < item_end(); }
  EntityKind kind(EntityId e) const;

  std::vector<EntityId> item_ids() const;
  std::vector<EntityId> user_ids() const;

  // Number of non-likes triples incident to the item.
  std::size_t side_fact_count(EntityId item) const;

  // Throws kData when an invariant is violated.
  void validate() const;

  std::vector<std::vector<std::uint32_t>> rebuilt_by_head() const;
  std::vector<std::vector<std::uint32_t>> rebuilt_by_tail() const;

 private:
  Vocabulary vocab_;
  std::vector<Triple> triples_;
  std::vector<std::vector<std::uint32_t>> by_head_;
  std::vector<std::vector<std::uint32_t>> by_tail_;
  RelationId likes_ = 0;
};

struct DatasetSplit {
  std::vector<Triple> train;  // all side facts plus the training likes
  std::vector<Triple> validation;
  std::vector<Triple> test;
};

struct RatingsData {
  Vocabulary vocab;  // users, items and the likes relation only
  std::vector<Triple> likes;
};

struct SideInfo {
  std::vector<std::string> entities;   // fresh KG entities, in id order
  std::vector<std::string> relations;  // full relation table, likes first
  std::vector<Triple> triples;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultLikeThreshold = 3.5;
inline constexpr std::size_t kDefaultMinFacts = 5;

RatingsData load_ratings(const std::filesystem::path& path,
                         double threshold = kDefaultLikeThreshold);

SideInfo load_kg_triples(const std::filesystem::path& triples_path,
                         const std::filesystem::path& item_map_path,
                         const Vocabulary& ratings_vocab);

KnowledgeGraph build_user_item_kg(const RatingsData& likes,
                                  const SideInfo& side_info);

// Drops items with fewer than min_facts side facts, every triple touching
// them, and KG entities left without triples. Ids are re-densified.
KnowledgeGraph filter_min_facts(const KnowledgeGraph& kg,
                                std::size_t min_facts = kDefaultMinFacts);

// Per-user holdout: floor(n * valid_frac) validation, floor(n * test_frac)
// test, the rest train. Side facts always go to train.
DatasetSplit split_likes(const KnowledgeGraph& kg, double valid_frac,
                         double test_frac, std::uint64_t seed);

struct SyntheticSpec {
  std::uint32_t users = 100;
  std::uint32_t items = 200;
  std::uint32_t attributes = 400;
  std::uint32_t relations = 4;
  std::uint32_t tail_relations = 1;  // relations whose facts put the item at the tail
  std::uint32_t clusters = 4;
  std::uint32_t facts_per_item = 5;
  double p_in = 0.3;
  double p_out = 0.02;
  double attribute_affinity = 0.9;  // chance an item fact uses its cluster's pool
  std::uint64_t seed = 1;
};

SyntheticSpec parse_synthetic_spec(const std::filesystem::path& path);

struct SyntheticData {
  KnowledgeGraph kg;
  std::vector<std::uint32_t> user_cluster;
  std::vector<std::uint32_t> item_cluster;
  std::vector<std::uint32_t> attribute_cluster;
};

SyntheticData generate_synthetic_kg(const SyntheticSpec& spec,
                                    std::uint64_t seed);

// A prepared dataset: the full graph plus its split. On disk this is a
// directory of TSV files written by save_dataset.
struct Dataset {
  KnowledgeGraph kg;
  DatasetSplit split;
};

struct DatasetStats {
  std::uint32_t users = 0;
  std::uint32_t items = 0;
  std::uint32_t kg_entities = 0;
  std::uint32_t kg_relations = 0;
  std::size_t likes = 0;
  std::size_t side_facts = 0;
  std::size_t min_item_facts = 0;
  std::size_t train_likes = 0;
  std::size_t valid_likes = 0;
  std::size_t test_likes = 0;
};

// Rebuilds the graph as train + validation + test so that an in-memory
// dataset matches one reloaded from disk triple for triple.
Dataset make_dataset(const KnowledgeGraph& kg, DatasetSplit split);

DatasetStats dataset_stats(const Dataset& ds);
std::string format_stats_table(const DatasetStats& stats);

void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace bcie

#endif  // BCIE_KG_DATA_HPP
