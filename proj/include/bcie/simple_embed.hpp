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


#ifndef BCIE_SIMPLE_EMBED_HPP
#define BCIE_SIMPLE_EMBED_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "bcie/kg_data.hpp"

namespace bcie {

// SimplE parameters: a head and a tail vector per entity, a forward and an
// inverse vector per relation. Each block is a row-major matrix.
class EmbeddingTable {
 public:
  enum class Block { kEntityHead = 0, kEntityTail = 1, kRelationFwd = 2, kRelationInv = 3 };

  EmbeddingTable() = default;
  EmbeddingTable(std::uint32_t entities, std::uint32_t relations, std::uint32_t dim);

  std::uint32_t dim() const { return dim_; }
  std::uint32_t entity_count() const { return entities_; }
  std::uint32_t relation_count() const { return relations_; }

  std::span<double> row(Block b, std::uint32_t index);
  std::span<const double> row(Block b, std::uint32_t index) const;

  std::span<const double> entity_head(EntityId e) const { return row(Block::kEntityHead, e); }
  std::span<const double> entity_tail(EntityId e) const { return row(Block::kEntityTail, e); }
  std::span<const double> relation_fwd(RelationId r) const { return row(Block::kRelationFwd, r); }
  std::span<const double> relation_inv(RelationId r) const { return row(Block::kRelationInv, r); }
  std::span<double> entity_head(EntityId e) { return row(Block::kEntityHead, e); }
  std::span<double> entity_tail(EntityId e) { return row(Block::kEntityTail, e); }
  std::span<double> relation_fwd(RelationId r) { return row(Block::kRelationFwd, r); }
  std::span<double> relation_inv(RelationId r) { return row(Block::kRelationInv, r); }

  std::vector<double>& block(Block b) { return blocks_[static_cast<int>(b)]; }
  const std::vector<double>& block(Block b) const { return blocks_[static_cast<int>(b)]; }

  bool all_finite() const;
  double squared_norm() const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::uint32_t dim_ = 0;
  std::uint32_t entities_ = 0;
  std::uint32_t relations_ = 0;
  std::vector<double> blocks_[4];
};

enum class Likelihood { kLogistic, kGaussian };

struct TrainConfig {
  std::uint32_t dim = 16;
  double lr = 0.15;
  double lambda = 1e-3;
  std::uint32_t neg_ratio = 2;
  std::uint32_t batch_size = 128;
  std::uint32_t epochs = 400;
  Likelihood likelihood = Likelihood::kGaussian;
  std::uint64_t seed = 1;
  double init_scale = 0.1;
  std::uint32_t eval_every = 5;  // epochs between validation passes
  std::uint32_t hit_k = 10;

  void validate() const;
};

// Sum_k v_k * w_k * x_k.
double triple_product(std::span<const double> v, std::span<const double> w,
                      std::span<const double> x);

double score(const EmbeddingTable& emb, EntityId head, RelationId relation, EntityId tail);

// k corruptions of `triple`, each replacing the head or the tail (fair coin)
// with a different entity drawn from the same namespace.
std::vector<Triple> negative_sample(const KnowledgeGraph& kg, const Triple& triple,
                                    std::size_t k, std::mt19937_64& rng);

struct LabeledTriple {
  Triple triple;
  double label = 1.0;  // +1 observed, -1 corrupted
};

// Sum over the batch of loss(label, score) + lambda * (squared norm of the
// six vectors the triple touches). When `grad` is non-null it must have the
// shape of `emb`; gradients are accumulated into it.
double batch_objective(const EmbeddingTable& emb, std::span<const LabeledTriple> batch,
                       Likelihood likelihood, double lambda, EmbeddingTable* grad);

struct EpochLog {
  std::uint32_t epoch = 0;
  double loss = 0.0;       // mean batch objective over the epoch
  double valid_hit = -1.0; // negative when not evaluated
};

struct TrainResult {
  EmbeddingTable table;
  std::vector<EpochLog> log;
  std::uint32_t best_epoch = 0;  // 0 means the initialization
  double best_valid_hit = -1.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

EmbeddingTable init_embeddings(std::uint32_t entities, std::uint32_t relations,
                               std::uint32_t dim, double init_scale, std::mt19937_64& rng);

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Candidates minus exclusions, by descending score(user, likes, item); ties
// go to the smaller item id.
std::vector<EntityId> rank_items(const EmbeddingTable& emb, EntityId user, RelationId likes,
                                 std::span<const EntityId> candidates,
                                 std::span<const EntityId> exclude);

// Same contract, scoring from a 2d user-space vector laid out as
// [head part ; tail part].
std::vector<EntityId> rank_items_from_mean(const EmbeddingTable& emb, RelationId likes,
                                           std::span<const double> user_mean,
                                           std::span<const EntityId> candidates,
                                           std::span<const EntityId> exclude);

// Per-user sorted item lists built from the likes triples of `triples`.
std::vector<std::vector<EntityId>> liked_items(const KnowledgeGraph& kg,
                                               std::span<const Triple> triples);

// Fraction of likes triples in `eval` whose item lands in the user's top k
// after excluding the user's `known` items.
double link_prediction_hit_rate(const EmbeddingTable& emb, const KnowledgeGraph& kg,
                                const std::vector<std::vector<EntityId>>& known,
                                std::span<const Triple> eval, std::uint32_t k);

// Items ranked by like count in `train`, ties by id; per-user exclusions
// applied at evaluation time.
double popularity_hit_rate(const KnowledgeGraph& kg, std::span<const Triple> train,
                           std::span<const Triple> eval, std::uint32_t k);

void save_checkpoint(const EmbeddingTable& emb, const std::filesystem::path& path);
EmbeddingTable load_checkpoint(const std::filesystem::path& path);

}  // namespace bcie

#endif  // BCIE_SIMPLE_EMBED_HPP
