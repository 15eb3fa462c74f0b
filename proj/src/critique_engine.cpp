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


#include "bcie/critique_engine.hpp"

#include <algorithm>
#include <sstream>

#include "bcie/error.hpp"
#include "bcie/eval_metrics.hpp"

namespace bcie {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kBcie: return "bcie";
    case Strategy::kMappedItems: return "mapped_items";
    case Strategy::kDirect: return "direct";
  }
  return "?";
}

const char* mode_name(SelectionMode m) { return m == SelectionMode::kDiff ? "diff" : "random"; }

std::optional<Strategy> parse_strategy(const std::string& s) {
  if (s == "bcie") return Strategy::kBcie;
  if (s == "mapped_items") return Strategy::kMappedItems;
  if (s == "direct") return Strategy::kDirect;
  return std::nullopt;
}

std::optional<SelectionMode> parse_mode(const std::string& s) {
  if (s == "diff") return SelectionMode::kDiff;
  if (s == "random") return SelectionMode::kRandom;
  return std::nullopt;
}

void SessionConfig::validate() const {
  if (top_k < 1) fail(ErrorCode::kUsage, "top_k must be at least 1");
  if (!(alpha > 0.0)) fail(ErrorCode::kUsage, "alpha must be positive");
  if (!(j_m > 0.0)) fail(ErrorCode::kUsage, "j_m must be positive");
  if (!(j0 > 0.0)) fail(ErrorCode::kUsage, "j0 must be positive");
  if (!(eps > 0.0)) fail(ErrorCode::kUsage, "eps must be positive");
  if (mapped_items < 1) fail(ErrorCode::kUsage, "mapped_items must be at least 1");
  if (!(evidence_magnitude >= 0.0)) fail(ErrorCode::kUsage, "evidence magnitude must be >= 0");
}

std::vector<CritiqueFact> facts_for_items(const KnowledgeGraph& kg,
                                          std::span<const EntityId> items) {
  std::map<CritiqueFact, EntityId> found;
  for (auto item : items) {
    for (auto idx : kg.by_head(item)) {
      const auto& t = kg.triples()[idx];
      if (t.relation == kg.likes_relation()) continue;
      found.try_emplace(CritiqueFact{t.relation, t.tail, ItemSide::kHead, std::nullopt}, item);
    }
    for (auto idx : kg.by_tail(item)) {
      const auto& t = kg.triples()[idx];
      if (t.relation == kg.likes_relation()) continue;
      found.try_emplace(CritiqueFact{t.relation, t.head, ItemSide::kTail, std::nullopt}, item);
    }
  }
  std::vector<CritiqueFact> out;
  out.reserve(found.size());
  for (const auto& [fact, item] : found) {
    out.push_back(fact);
    out.back().source_item = item;
  }
  return out;
}

std::vector<EntityId> items_satisfying(const KnowledgeGraph& kg, const CritiqueFact& fact) {
  std::vector<EntityId> out;
  if (fact.anchor >= kg.entity_count()) return out;
  if (fact.item_side == ItemSide::kHead) {
    for (auto idx : kg.by_tail(fact.anchor)) {
      const auto& t = kg.triples()[idx];
      if (t.relation == fact.relation && kg.is_item(t.head)) out.push_back(t.head);
    }
  } else {
    for (auto idx : kg.by_head(fact.anchor)) {
      const auto& t = kg.triples()[idx];
      if (t.relation == fact.relation && kg.is_item(t.tail)) out.push_back(t.tail);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CritiqueModel::CritiqueModel(const KnowledgeGraph& kg, const EmbeddingTable& emb,
                             std::span<const Triple> train)
    : kg_(&kg), emb_(&emb) {
  if (emb.entity_count() != kg.entity_count() || emb.relation_count() != kg.relation_count())
    fail(ErrorCode::kData, "checkpoint shape (" + std::to_string(emb.entity_count()) +
                               " entities, " + std::to_string(emb.relation_count()) +
                               " relations) does not match the dataset");
  train_liked_ = liked_items(kg, train);
  items_ = kg.item_ids();
  item_facts_.resize(kg.item_count());
  for (auto item : items_) {
    const EntityId one[] = {item};
    item_facts_[item - kg.item_begin()] = facts_for_items(kg, one);
  }
  item_norm_ = bcie::mean_item_norm(emb, items_);
}

const std::vector<CritiqueFact>& CritiqueModel::item_facts(EntityId item) const {
  if (!kg_->is_item(item)) fail(ErrorCode::kUsage, "entity " + std::to_string(item) + " is not an item");
  return item_facts_[item - kg_->item_begin()];
}

std::vector<double> CritiqueModel::user_centroid() const {
  std::vector<double> c(2 * std::size_t(emb_->dim()), 0.0);
  if (kg_->user_count() == 0) return c;
  for (EntityId u = 0; u < kg_->user_count(); ++u) {
    auto z = user_space_layout(*emb_, u);
    for (std::size_t k = 0; k < z.size(); ++k) c[k] += z[k];
  }
  for (double& x : c) x /= double(kg_->user_count());
  return c;
}

std::span<const EntityId> SessionState::top_k() const {
  return std::span<const EntityId>(last_ranking)
      .first(std::min<std::size_t>(config.top_k, last_ranking.size()));
}

SessionState start_session(const CritiqueModel& model, std::optional<EntityId> user,
                           Strategy strategy, const SessionConfig& cfg) {
  cfg.validate();
  SessionState s;
  s.user = user;
  s.strategy = strategy;
  s.config = cfg;
  std::vector<double> mean;
  if (user) {
    if (!model.kg().is_user(*user)) fail(ErrorCode::kNotFound, "unknown user " + std::to_string(*user));
    const auto& liked = model.train_liked(*user);
    for (auto i : model.items())
      if (!std::binary_search(liked.begin(), liked.end(), i)) s.candidates.push_back(i);
    mean = user_space_layout(model.emb(), *user);
  } else {
    s.candidates = model.items();
    mean = model.user_centroid();
  }
  if (s.candidates.empty()) fail(ErrorCode::kData, "no candidate items for this user");
  s.belief = belief_from_mean(mean, cfg.j0);
  s.last_ranking = rank_items_from_mean(model.emb(), model.likes(), mean, s.candidates, {});
  return s;
}

std::optional<CritiqueFact> select_critique_diff(const CritiqueModel& model, EntityId gt_item,
                                                 std::span<const EntityId> ranking_top_k,
                                                 const std::set<CritiqueFact>& critiqued) {
  std::optional<CritiqueFact> best;
  std::size_t best_count = 0;
  // item_facts is in key order, so the first minimum wins ties.
  for (const auto& fact : model.item_facts(gt_item)) {
    if (critiqued.count(fact)) continue;
    std::size_t count = 0;
    for (auto item : ranking_top_k) {
      const auto& facts = model.item_facts(item);
      count += std::binary_search(facts.begin(), facts.end(), fact);
    }
    if (!best || count < best_count) {
      best = fact;
      best_count = count;
    }
  }
  return best;
}

std::optional<CritiqueFact> select_critique_random(const CritiqueModel& model, EntityId gt_item,
                                                   const std::set<CritiqueFact>& critiqued,
                                                   std::mt19937_64& rng) {
  std::vector<CritiqueFact> open;
  for (const auto& fact : model.item_facts(gt_item))
    if (!critiqued.count(fact)) open.push_back(fact);
  if (open.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
  return open[pick(rng)];
}

namespace {

SessionState begin_update(const SessionState& state, const CritiqueFact& fact) {
  if (state.critiqued.count(fact))
    fail(ErrorCode::kConflict, "fact " + fact_id(fact) + " was already critiqued");
  if (state.step >= state.config.max_steps)
    fail(ErrorCode::kConflict, "session reached max_steps = " +
                                   std::to_string(state.config.max_steps));
  SessionState next = state;
  next.critiqued.insert(fact);
  ++next.step;
  return next;
}

double evidence_magnitude(const CritiqueModel& model, const SessionConfig& cfg) {
  if (cfg.evidence_magnitude > 0.0) return cfg.evidence_magnitude;
  return model.mean_item_norm() > 0.0 ? model.mean_item_norm() : 1.0;
}

void rerank(const CritiqueModel& model, SessionState& s) {
  s.last_ranking = rank_items_from_mean(model.emb(), model.likes(), posterior_mean(s.belief),
                                        s.candidates, {});
}

}  // namespace

SessionState apply_critique_bcie(const CritiqueModel& model, const SessionState& state,
                                 const CritiqueFact& fact) {
  SessionState next = begin_update(state, fact);
  const auto& cfg = state.config;
  auto evidence = evidence_from_critique(model.emb(), fact, cfg.alpha,
                                         evidence_magnitude(model, cfg));
  if (!evidence) return next;
  auto prior = item_prior(model.emb(), state.top_k(), cfg.j_m);
  auto post = item_posterior(prior, *evidence);
  next.belief = marginal_user_update(state.belief, post,
                                     relation_diagonal(model.emb(), model.likes(), cfg.sign),
                                     cfg.eps);
  rerank(model, next);
  return next;
}

SessionState apply_critique_mapped_items(const CritiqueModel& model, const SessionState& state,
                                         const CritiqueFact& fact) {
  SessionState next = begin_update(state, fact);
  const auto& cfg = state.config;
  auto mapped = items_satisfying(model.kg(), fact);
  if (mapped.empty()) return next;
  if (mapped.size() > cfg.mapped_items) mapped.resize(cfg.mapped_items);
  auto post = item_prior(model.emb(), mapped, cfg.j_m + cfg.alpha);
  next.belief = marginal_user_update(state.belief, post,
                                     relation_diagonal(model.emb(), model.likes(), cfg.sign),
                                     cfg.eps);
  rerank(model, next);
  return next;
}

SessionState apply_critique_direct(const CritiqueModel& model, const SessionState& state,
                                   const CritiqueFact& fact) {
  SessionState next = begin_update(state, fact);
  const auto& cfg = state.config;
  auto evidence = evidence_from_critique(model.emb(), fact, cfg.alpha,
                                         evidence_magnitude(model, cfg));
  if (!evidence) return next;
  next.belief = item_posterior(state.belief, *evidence);
  rerank(model, next);
  return next;
}

SessionState apply_critique(const CritiqueModel& model, const SessionState& state,
                            const CritiqueFact& fact) {
  switch (state.strategy) {
    case Strategy::kBcie: return apply_critique_bcie(model, state, fact);
    case Strategy::kMappedItems: return apply_critique_mapped_items(model, state, fact);
    case Strategy::kDirect: return apply_critique_direct(model, state, fact);
  }
  fail(ErrorCode::kUsage, "unknown strategy");
}

CritiqueSession::CritiqueSession(const CritiqueModel& model, std::optional<EntityId> user,
                                 std::optional<EntityId> target, Strategy strategy,
                                 const SessionConfig& cfg)
    : model_(&model), target_(target) {
  state_ = start_session(model, user, strategy, cfg);
  if (target_) {
    if (!model.kg().is_item(*target_))
      fail(ErrorCode::kUsage, "target " + std::to_string(*target_) + " is not an item");
    if (!std::binary_search(state_.candidates.begin(), state_.candidates.end(), *target_))
      fail(ErrorCode::kUsage, "target item " + std::to_string(*target_) +
                                  " is not a candidate (already liked in train)");
  }
  trace_.user = user;
  trace_.gt_item = target;
  trace_.strategy = strategy;
  trace_.outcome = "open";
  trace_.steps.push_back(make_record(std::nullopt, std::nullopt));
}

std::vector<CritiqueFact> CritiqueSession::presented_facts() const {
  auto top = state_.top_k();
  std::vector<EntityId> items(top.begin(), top.end());
  if (target_ && std::find(items.begin(), items.end(), *target_) == items.end())
    items.push_back(*target_);
  std::vector<CritiqueFact> out;
  for (auto& f : facts_for_items(model_->kg(), items))
    if (!state_.critiqued.count(f)) out.push_back(f);
  return out;
}

const StepRecord& CritiqueSession::critique(const CritiqueFact& requested) {
  if (state_.critiqued.count(requested))
    fail(ErrorCode::kConflict, "fact " + fact_id(requested) + " was already critiqued");
  if (finished())
    fail(ErrorCode::kConflict, "session reached max_steps = " +
                                   std::to_string(state_.config.max_steps));
  auto presented = presented_facts();
  auto it = std::lower_bound(presented.begin(), presented.end(), requested);
  if (it == presented.end() || !(*it == requested))
    fail(ErrorCode::kUsage, "fact " + fact_id(requested) + " was not presented in this step");
  const CritiqueFact fact = *it;

  auto satisfying = items_satisfying(model_->kg(), fact);
  std::vector<EntityId> rankable;
  for (auto i : satisfying)
    if (std::binary_search(state_.candidates.begin(), state_.candidates.end(), i))
      rankable.push_back(i);

  SessionState next = apply_critique(*model_, state_, fact);
  std::optional<NarcInputs> narc_in;
  if (!rankable.empty()) {
    NarcInputs n;
    n.ar_pre = average_rank(state_.last_ranking, rankable);
    n.ar_post = average_rank(next.last_ranking, rankable);
    n.narc = narc(n.ar_pre, n.ar_post);
    n.items = rankable.size();
    narc_in = n;
  }
  state_ = std::move(next);
  trace_.steps.push_back(make_record(fact, narc_in));
  return trace_.steps.back();
}

StepRecord CritiqueSession::make_record(std::optional<CritiqueFact> fact,
                                        std::optional<NarcInputs> narc_in) const {
  StepRecord r;
  r.step = state_.step;
  auto top = state_.top_k();
  r.ranking_top_k.assign(top.begin(), top.end());
  r.fact = fact;
  r.narc = narc_in;
  if (target_) {
    r.gt_rank = rank_position(state_.last_ranking, *target_);
    r.hit5 = hit_rate_at_k(state_.last_ranking, *target_, 5);
    r.hit10 = hit_rate_at_k(state_.last_ranking, *target_, 10);
  }
  if (state_.config.record_beliefs) r.belief = state_.belief;
  return r;
}

SessionTrace run_session(const CritiqueModel& model, EntityId user, EntityId gt_item,
                         Strategy strategy, SelectionMode mode, const SessionConfig& cfg,
                         std::uint64_t seed) {
  CritiqueSession session(model, user, gt_item, strategy, cfg);
  session.trace().mode = mode;
  std::mt19937_64 rng(seed);
  std::string outcome = "completed";
  while (!session.finished()) {
    if (cfg.stop_at_top1 && session.trace().steps.back().gt_rank == std::size_t{1}) {
      outcome = "top1";
      break;
    }
    const auto& state = session.state();
    auto fact = mode == SelectionMode::kDiff
                    ? select_critique_diff(model, gt_item, state.top_k(), state.critiqued)
                    : select_critique_random(model, gt_item, state.critiqued, rng);
    if (!fact) {
      outcome = "exhausted";
      break;
    }
    session.critique(*fact);
  }
  session.trace().outcome = outcome;
  return session.trace();
}

nlohmann::json record_to_json(const StepRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["ranking_topK"] = r.ranking_top_k;
  if (r.fact)
    j["fact"] = {{"relation", r.fact->relation},
                 {"anchor", r.fact->anchor},
                 {"side", side_name(r.fact->item_side)}};
  else
    j["fact"] = nullptr;
  j["gt_rank"] = r.gt_rank ? nlohmann::json(*r.gt_rank) : nlohmann::json(nullptr);
  j["hit5"] = r.hit5 ? nlohmann::json(*r.hit5) : nlohmann::json(nullptr);
  j["hit10"] = r.hit10 ? nlohmann::json(*r.hit10) : nlohmann::json(nullptr);
  if (r.narc)
    j["narc_inputs"] = {{"ar_pre", r.narc->ar_pre},
                        {"ar_post", r.narc->ar_post},
                        {"narc", r.narc->narc},
                        {"items", r.narc->items}};
  else
    j["narc_inputs"] = nullptr;
  if (r.belief) j["belief"] = format_belief(*r.belief);
  return j;
}

StepRecord record_from_json(const nlohmann::json& j) {
  StepRecord r;
  r.step = j.at("step").get<std::uint32_t>();
  r.ranking_top_k = j.at("ranking_topK").get<std::vector<EntityId>>();
  if (!j.at("fact").is_null()) {
    const auto& f = j.at("fact");
    CritiqueFact fact;
    fact.relation = f.at("relation").get<RelationId>();
    fact.anchor = f.at("anchor").get<EntityId>();
    fact.item_side = f.at("side").get<std::string>() == "head" ? ItemSide::kHead : ItemSide::kTail;
    r.fact = fact;
  }
  if (!j.at("gt_rank").is_null()) r.gt_rank = j.at("gt_rank").get<std::size_t>();
  if (!j.at("hit5").is_null()) r.hit5 = j.at("hit5").get<int>();
  if (!j.at("hit10").is_null()) r.hit10 = j.at("hit10").get<int>();
  if (!j.at("narc_inputs").is_null()) {
    const auto& n = j.at("narc_inputs");
    r.narc = NarcInputs{n.at("ar_pre").get<double>(), n.at("ar_post").get<double>(),
                        n.at("narc").get<double>(), n.at("items").get<std::size_t>()};
  }
  if (j.contains("belief")) r.belief = parse_belief(j.at("belief").get<std::string>());
  return r;
}

namespace {

nlohmann::json optional_id(const std::optional<EntityId>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json trace_to_json(const SessionTrace& t) {
  nlohmann::json j;
  j["user"] = optional_id(t.user);
  j["target_item"] = optional_id(t.gt_item);
  j["strategy"] = strategy_name(t.strategy);
  j["outcome"] = t.outcome;
  j["records"] = nlohmann::json::array();
  for (const auto& r : t.steps) j["records"].push_back(record_to_json(r));
  return j;
}

std::string trace_to_jsonl(const SessionTrace& t) {
  std::string out;
  for (const auto& r : t.steps) {
    auto j = record_to_json(r);
    j["run"] = t.run;
    j["session"] = t.session;
    j["user"] = optional_id(t.user);
    j["gt_item"] = optional_id(t.gt_item);
    j["strategy"] = strategy_name(t.strategy);
    j["mode"] = mode_name(t.mode);
    j["outcome"] = t.outcome;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SessionTrace> parse_trace_jsonl(const std::string& text) {
  std::map<std::tuple<std::string, std::string, std::uint64_t, std::uint64_t>, SessionTrace>
      grouped;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kData, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto key = std::make_tuple(j.at("strategy").get<std::string>(),
                                     j.at("mode").get<std::string>(), j.at("run").get<std::uint64_t>(),
                                     j.at("session").get<std::uint64_t>());
    auto& t = grouped[key];
    t.run = std::get<2>(key);
    t.session = std::get<3>(key);
    if (!j.at("user").is_null()) t.user = j.at("user").get<EntityId>();
    if (!j.at("gt_item").is_null()) t.gt_item = j.at("gt_item").get<EntityId>();
    auto strategy = parse_strategy(j.at("strategy").get<std::string>());
    auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!strategy || !mode) fail(ErrorCode::kData, "trace line " + std::to_string(line_no) +
                                                       ": unknown strategy or mode");
    t.strategy = *strategy;
    t.mode = *mode;
    t.outcome = j.value("outcome", std::string());
    t.steps.push_back(record_from_json(j));
  }
  std::vector<SessionTrace> out;
  for (auto& [key, t] : grouped) out.push_back(std::move(t));
  return out;
}

}  // namespace bcie
