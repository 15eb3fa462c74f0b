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


#include "bcie/session_service.hpp"

#include <fstream>
#include <random>

#include "bcie/error.hpp"
#include "bcie/gauss_belief.hpp"
#include "bcie/pipeline.hpp"

namespace bcie {

using nlohmann::json;

namespace {

std::string new_session_id() {
  // 128 bits from the OS entropy source.
  std::random_device rd;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = rd();
    for (int n = 0; n < 8; ++n) {
      id.push_back(kHex[word & 0xF]);
      word >>= 4;
    }
  }
  return id;
}

json error_body(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", error_code_name(code)}, {"message", message}}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::string p = path.substr(0, path.find('?'));
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= p.size()) {
    auto next = p.find('/', pos);
    if (next == std::string::npos) next = p.size();
    if (next > pos) parts.push_back(p.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kDimension: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kExhausted: return 409;
    case ErrorCode::kGone: return 410;
    case ErrorCode::kData: return 422;
    default: return 500;
  }
}

SessionService::SessionService(std::shared_ptr<const Dataset> ds,
                               std::shared_ptr<const EmbeddingTable> emb, ServiceConfig cfg)
    : ds_(std::move(ds)), emb_(std::move(emb)), cfg_(std::move(cfg)), now_(Clock::now) {
  if (!ds_ || !emb_) fail(ErrorCode::kUsage, "service needs a dataset and a model");
  cfg_.session.validate();
  model_ = std::make_unique<CritiqueModel>(ds_->kg, *emb_, ds_->split.train);
}

std::optional<EntityId> SessionService::resolve_entity(const json& ref, bool want_user) const {
  const auto& kg = ds_->kg;
  const auto ok = [&](EntityId e) { return want_user ? kg.is_user(e) : kg.is_item(e); };
  if (ref.is_number_unsigned() || ref.is_number_integer()) {
    const auto v = ref.get<std::int64_t>();
    if (v >= 0 && v < std::int64_t(kg.entity_count()) && ok(EntityId(v))) return EntityId(v);
    return std::nullopt;
  }
  if (!ref.is_string()) fail(ErrorCode::kUsage, "entity reference must be an id or a name");
  const auto name = ref.get<std::string>();
  const auto& names = want_user ? kg.vocab().users : kg.vocab().items;
  const EntityId base = want_user ? 0 : kg.item_begin();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return EntityId(base + i);
  return std::nullopt;
}

json SessionService::fact_json(const CritiqueFact& f) const {
  const auto& vocab = ds_->kg.vocab();
  return {{"fact_id", fact_id(f)},
          {"relation", vocab.relations.at(f.relation)},
          {"anchor", f.anchor},
          {"anchor_name", vocab.entity_name(f.anchor)},
          {"side", side_name(f.item_side)}};
}

json SessionService::payload(const std::string& id, const CritiqueSession& s) const {
  const auto& st = s.state();
  const auto& kg = ds_->kg;
  const auto mean = posterior_mean(st.belief);
  const std::size_t d = emb_->dim();
  const auto fwd = emb_->row(EmbeddingTable::Block::kRelationFwd, model_->likes());
  const auto inv = emb_->row(EmbeddingTable::Block::kRelationInv, model_->likes());

  auto facts_of = [&](EntityId item) {
    json arr = json::array();
    for (const auto& f : model_->item_facts(item))
      if (!st.critiqued.contains(f)) arr.push_back(fact_json(f));
    return arr;
  };

  json items = json::array();
  for (EntityId item : st.top_k()) {
    // Score of the posterior-mean user, as used for the ranking.
    const auto head = emb_->row(EmbeddingTable::Block::kEntityHead, item);
    const auto tail = emb_->row(EmbeddingTable::Block::kEntityTail, item);
    double score = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      score += 0.5 * (mean[k] * fwd[k] * tail[k] + mean[d + k] * inv[k] * head[k]);
    items.push_back({{"id", item},
                     {"name", kg.vocab().entity_name(item)},
                     {"score", score},
                     {"facts", facts_of(item)}});
  }
  json out = {{"session_id", id},
              {"step", st.step},
              {"max_steps", st.config.max_steps},
              {"strategy", strategy_name(st.strategy)},
              {"finished", s.finished()},
              {"items", std::move(items)}};
  if (st.user) out["user_id"] = *st.user;
  const auto& tr = s.trace();
  if (tr.gt_item) {
    out["target"] = {{"id", *tr.gt_item},
                     {"name", kg.vocab().entity_name(*tr.gt_item)},
                     {"facts", facts_of(*tr.gt_item)}};
    const auto& last = tr.steps.back();
    if (last.gt_rank) out["gt_rank"] = *last.gt_rank;
    json traj = json::array();
    for (const auto& r : tr.steps)
      traj.push_back(r.gt_rank ? json(*r.gt_rank) : json(nullptr));
    out["rank_trajectory"] = std::move(traj);
  }
  return out;
}

void SessionService::sweep_locked(Clock::time_point now) {
  for (auto it = live_.begin(); it != live_.end();) {
    const auto last = Clock::time_point(Clock::duration(
        it->second->last_used.load(std::memory_order_relaxed)));
    if (now - last > cfg_.ttl) {
      tombstones_.insert(it->first);
      it = live_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<SessionService::Live> SessionService::acquire(const std::string& id) {
  std::lock_guard lock(store_mu_);
  sweep_locked(now_());
  if (tombstones_.contains(id)) fail(ErrorCode::kGone, "session " + id + " is closed or expired");
  auto it = live_.find(id);
  if (it == live_.end()) fail(ErrorCode::kNotFound, "unknown session " + id);
  it->second->last_used.store(now_().time_since_epoch().count(), std::memory_order_relaxed);
  return it->second;
}

json SessionService::create_session(const json& req) {
  static const std::set<std::string> kKeys{"user_id", "cold_start", "strategy", "target_item",
                                           "config"};
  if (!req.is_object()) fail(ErrorCode::kUsage, "request body must be a JSON object");
  for (const auto& [k, v] : req.items())
    if (!kKeys.contains(k)) fail(ErrorCode::kUsage, "unknown field '" + k + "'");

  const bool cold = req.value("cold_start", false);
  std::optional<EntityId> user;
  if (!cold) {
    if (!req.contains("user_id")) fail(ErrorCode::kUsage, "user_id or cold_start is required");
    user = resolve_entity(req["user_id"], true);
    if (!user) fail(ErrorCode::kNotFound, "unknown user " + req["user_id"].dump());
  }
  Strategy strategy = cfg_.strategy;
  if (req.contains("strategy")) {
    auto s = parse_strategy(req["strategy"].get<std::string>());
    if (!s) fail(ErrorCode::kUsage, "unknown strategy " + req["strategy"].dump());
    strategy = *s;
  }
  std::optional<EntityId> target;
  if (req.contains("target_item") && !req["target_item"].is_null()) {
    target = resolve_entity(req["target_item"], false);
    if (!target) fail(ErrorCode::kNotFound, "unknown item " + req["target_item"].dump());
  }
  SessionConfig cfg = cfg_.session;
  if (req.contains("config")) cfg = session_config_from_json(req["config"], cfg);

  auto live = std::make_shared<Live>();
  live->session = std::make_unique<CritiqueSession>(*model_, user, target, strategy, cfg);
  live->session->trace().outcome = "open";
  live->last_used.store(now_().time_since_epoch().count());

  std::string id;
  {
    std::lock_guard lock(store_mu_);
    sweep_locked(now_());
    do {
      id = new_session_id();
    } while (live_.contains(id) || tombstones_.contains(id));
    live_.emplace(id, live);
  }
  std::lock_guard lock(live->mu);
  return payload(id, *live->session);
}

json SessionService::critique(const std::string& id, const json& req) {
  if (!req.is_object() || !req.contains("fact_id") || !req["fact_id"].is_string())
    fail(ErrorCode::kUsage, "fact_id is required");
  const auto fid = req["fact_id"].get<std::string>();
  auto fact = parse_fact_id(fid);
  if (!fact) fail(ErrorCode::kUsage, "malformed fact_id '" + fid + "'");
  auto live = acquire(id);
  std::lock_guard lock(live->mu);
  if (live->closed) fail(ErrorCode::kGone, "session " + id + " is closed");
  live->session->critique(*fact);
  return payload(id, *live->session);
}

json SessionService::get_session(const std::string& id) {
  auto live = acquire(id);
  std::lock_guard lock(live->mu);
  if (live->closed) fail(ErrorCode::kGone, "session " + id + " is closed");
  auto j = trace_to_json(live->session->trace());
  j["session_id"] = id;
  return j;
}

json SessionService::close_session(const std::string& id, const json& req) {
  const std::string outcome = req.is_object() ? req.value("outcome", std::string{}) : "";
  if (outcome != "accepted" && outcome != "abandoned")
    fail(ErrorCode::kUsage, "outcome must be 'accepted' or 'abandoned'");
  auto live = acquire(id);
  std::lock_guard lock(live->mu);
  if (live->closed) fail(ErrorCode::kGone, "session " + id + " is already closed");
  live->session->trace().outcome = outcome;
  auto j = trace_to_json(live->session->trace());
  j["session_id"] = id;
  if (!cfg_.traces_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg_.traces_dir, ec);
    const auto path = cfg_.traces_dir / (id + ".json");
    std::ofstream out(path);
    if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
    out << j.dump(2) << '\n';
  }
  live->closed = true;
  {
    std::lock_guard store(store_mu_);
    live_.erase(id);
    tombstones_.insert(id);
  }
  return j;
}

json SessionService::health() const {
  return {{"status", "ok"},
          {"model",
           {{"dim", emb_->dim()},
            {"entities", emb_->entity_count()},
            {"relations", emb_->relation_count()}}}};
}

std::size_t SessionService::live_sessions() const {
  std::lock_guard lock(store_mu_);
  return live_.size();
}

HttpResponse SessionService::handle(const std::string& method, const std::string& path,
                                    const std::string& body) {
  try {
    json req = json::object();
    if (!body.empty()) {
      req = json::parse(body, nullptr, false);
      if (req.is_discarded()) fail(ErrorCode::kUsage, "request body is not valid JSON");
    }
    const auto parts = split_path(path);
    const bool get = method == "GET";
    const bool post = method == "POST";
    auto method_error = [&]() -> HttpResponse {
      return {405, error_body(ErrorCode::kUsage, "method " + method + " not allowed")};
    };
    if (parts.size() == 1 && parts[0] == "health") {
      if (!get) return method_error();
      return {200, health()};
    }
    if (parts.size() >= 2 && parts[0] == "api" && parts[1] == "sessions") {
      if (parts.size() == 2) {
        if (!post) return method_error();
        return {200, create_session(req)};
      }
      if (parts.size() == 3) {
        if (!get) return method_error();
        return {200, get_session(parts[2])};
      }
      if (parts.size() == 4 && (parts[3] == "critique" || parts[3] == "close")) {
        if (!post) return method_error();
        return {200, parts[3] == "critique" ? critique(parts[2], req)
                                            : close_session(parts[2], req)};
      }
    }
    return {404, error_body(ErrorCode::kNotFound, "no route for " + method + " " + path)};
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(e.code(), e.what())};
  } catch (const json::exception& e) {
    return {400, error_body(ErrorCode::kUsage, e.what())};
  } catch (const std::exception& e) {
    return {500, {{"error", {{"code", "internal"}, {"message", e.what()}}}}};
  }
}

}  // namespace bcie
