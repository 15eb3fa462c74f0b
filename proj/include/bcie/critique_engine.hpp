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


#ifndef BCIE_CRITIQUE_ENGINE_HPP
#define BCIE_CRITIQUE_ENGINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bcie/critique_fact.hpp"
#include "bcie/gauss_belief.hpp"
#include "bcie/kg_data.hpp"
#include "bcie/simple_embed.hpp"
#include "json.hpp"

namespace bcie {

enum class Strategy { kBcie, kMappedItems, kDirect };
enum class SelectionMode { kDiff, kRandom };

const char* strategy_name(Strategy s);
const char* mode_name(SelectionMode m);
std::optional<Strategy> parse_strategy(const std::string& s);
std::optional<SelectionMode> parse_mode(const std::string& s);

struct SessionConfig {
  std::uint32_t top_k = 10;
  std::uint32_t max_steps = 5;
  double alpha = 20.0;  // evidence precision
  double j_m = 5.0;     // item prior precision
  double j0 = 1.0;      // initial user precision
  double eps = 1e-6;   // precision floor
  CouplingSign sign = CouplingSign::kCompat;
  std::uint32_t mapped_items = 10;
  double evidence_magnitude = 0.0;  // 0 selects the mean item-embedding norm
  bool stop_at_top1 = false;
  bool record_beliefs = false;

  void validate() const;
};

// Read-only view over a trained model and its graph, shared by sessions.
class CritiqueModel {
 public:
  CritiqueModel(const KnowledgeGraph& kg, const EmbeddingTable& emb,
                std::span<const Triple> train);

  const KnowledgeGraph& kg() const { return *kg_; }
  const EmbeddingTable& emb() const { return *emb_; }
  RelationId likes() const { return kg_->likes_relation(); }

  // Sorted train-liked items of a user.
  const std::vector<EntityId>& train_liked(EntityId user) const { return train_liked_[user]; }
  const std::vector<EntityId>& items() const { return items_; }
  double mean_item_norm() const { return item_norm_; }

  // Sorted, deduplicated facts of one item.
  const std::vector<CritiqueFact>& item_facts(EntityId item) const;

  std::vector<double> user_centroid() const;

 private:
  const KnowledgeGraph* kg_;
  const EmbeddingTable* emb_;
  std::vector<std::vector<EntityId>> train_liked_;
  std::vector<EntityId> items_;
  std::vector<std::vector<CritiqueFact>> item_facts_;
  double item_norm_ = 0.0;
};

// Deduplicated facts (by relation, anchor, side) incident to `items`, in key
// order; each keeps the first item of `items` that carries it.
std::vector<CritiqueFact> facts_for_items(const KnowledgeGraph& kg,
                                          std::span<const EntityId> items);

// Sorted items i for which fact.instantiate(i) is in the graph.
std::vector<EntityId> items_satisfying(const KnowledgeGraph& kg, const CritiqueFact& fact);

struct SessionState {
  std::optional<EntityId> user;  // nullopt for a cold start
  GaussianBelief belief;
  std::uint32_t step = 0;
  std::set<CritiqueFact> critiqued;
  std::vector<EntityId> candidates;    // sorted
  std::vector<EntityId> last_ranking;  // every candidate, best first
  Strategy strategy = Strategy::kBcie;
  SessionConfig config;

  std::span<const EntityId> top_k() const;
};

SessionState start_session(const CritiqueModel& model, std::optional<EntityId> user,
                           Strategy strategy, const SessionConfig& cfg);

// Ground-truth fact appearing in the fewest top-k item fact sets; ties go to
// the smallest (relation, anchor, side). nullopt when every fact of the
// ground truth has been critiqued.
std::optional<CritiqueFact> select_critique_diff(const CritiqueModel& model, EntityId gt_item,
                                                 std::span<const EntityId> ranking_top_k,
                                                 const std::set<CritiqueFact>& critiqued);

std::optional<CritiqueFact> select_critique_random(const CritiqueModel& model, EntityId gt_item,
                                                   const std::set<CritiqueFact>& critiqued,
                                                   std::mt19937_64& rng);

SessionState apply_critique_bcie(const CritiqueModel& model, const SessionState& state,
                                 const CritiqueFact& fact);
SessionState apply_critique_mapped_items(const CritiqueModel& model, const SessionState& state,
                                         const CritiqueFact& fact);
SessionState apply_critique_direct(const CritiqueModel& model, const SessionState& state,
                                   const CritiqueFact& fact);
// Dispatches on state.strategy.
SessionState apply_critique(const CritiqueModel& model, const SessionState& state,
                            const CritiqueFact& fact);

struct NarcInputs {
  double ar_pre = 0.0;
  double ar_post = 0.0;
  double narc = 0.0;
  std::size_t items = 0;
};

struct StepRecord {
  std::uint32_t step = 0;
  std::vector<EntityId> ranking_top_k;
  std::optional<CritiqueFact> fact;
  std::optional<std::size_t> gt_rank;  // 1-based
  std::optional<int> hit5;
  std::optional<int> hit10;
  std::optional<NarcInputs> narc;
  std::optional<GaussianBelief> belief;
};

struct SessionTrace {
  std::optional<EntityId> user;
  std::optional<EntityId> gt_item;
  Strategy strategy = Strategy::kBcie;
  SelectionMode mode = SelectionMode::kDiff;
  std::uint64_t run = 0;
  std::uint64_t session = 0;
  std::vector<StepRecord> steps;
  std::string outcome;  // completed | exhausted | top1 | accepted | abandoned | open
};

// One conversation: the state plus the per-step records. Shared by the
// simulator and the live service so both produce the same traces.
class CritiqueSession {
 public:
  CritiqueSession(const CritiqueModel& model, std::optional<EntityId> user,
                  std::optional<EntityId> target, Strategy strategy, const SessionConfig& cfg);

  const SessionState& state() const { return state_; }
  const SessionTrace& trace() const { return trace_; }
  SessionTrace& trace() { return trace_; }
  bool finished() const { return state_.step >= state_.config.max_steps; }

  // Facts of the current top-k items, plus the target's facts when a target
  // item was declared; already-critiqued facts are left out.
  std::vector<CritiqueFact> presented_facts() const;

  // Throws kConflict for a repeated fact or when max_steps is reached.
  const StepRecord& critique(const CritiqueFact& fact);

 private:
  StepRecord make_record(std::optional<CritiqueFact> fact, std::optional<NarcInputs> narc) const;

  const CritiqueModel* model_;
  std::optional<EntityId> target_;
  SessionState state_;
  SessionTrace trace_;
};

SessionTrace run_session(const CritiqueModel& model, EntityId user, EntityId gt_item,
                         Strategy strategy, SelectionMode mode, const SessionConfig& cfg,
                         std::uint64_t seed);

// JSON form of a step record: step, ranking_topK, fact, gt_rank, hit5,
// hit10, narc_inputs (plus belief when recorded).
nlohmann::json record_to_json(const StepRecord& r);
nlohmann::json trace_to_json(const SessionTrace& t);
StepRecord record_from_json(const nlohmann::json& j);

// One line per step, each carrying the session identifiers.
std::string trace_to_jsonl(const SessionTrace& t);
// Regroups JSONL step lines by (strategy, mode, run, session).
std::vector<SessionTrace> parse_trace_jsonl(const std::string& text);

}  // namespace bcie

#endif  // BCIE_CRITIQUE_ENGINE_HPP
