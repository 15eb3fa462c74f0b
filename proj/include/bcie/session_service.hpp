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


#ifndef BCIE_SESSION_SERVICE_HPP
#define BCIE_SESSION_SERVICE_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <set>

#include "json.hpp"

#include "bcie/critique_engine.hpp"
#include "bcie/error.hpp"

namespace bcie {

struct ServiceConfig {
  SessionConfig session;
  Strategy strategy = Strategy::kBcie;
  std::chrono::seconds ttl{30 * 60};
  std::filesystem::path traces_dir;  // empty: closed traces are not persisted
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

// Live critiquing sessions over one immutable model. Requests for different
// sessions may run concurrently; requests for the same session serialize on
// that session's mutex.
class SessionService {
 public:
  using Clock = std::chrono::steady_clock;

  SessionService(std::shared_ptr<const Dataset> ds, std::shared_ptr<const EmbeddingTable> emb,
                 ServiceConfig cfg);

  // Transport-agnostic entry point. Errors come back as
  // {"error": {"code", "message"}} with the matching status.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::string& body);

  nlohmann::json create_session(const nlohmann::json& req);
  nlohmann::json critique(const std::string& id, const nlohmann::json& req);
  nlohmann::json get_session(const std::string& id);
  nlohmann::json close_session(const std::string& id, const nlohmann::json& req);
  nlohmann::json health() const;

  std::size_t live_sessions() const;
  const CritiqueModel& model() const { return *model_; }

  // Test hook for expiry.
  void set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

 private:
  struct Live {
    std::mutex mu;
    std::unique_ptr<CritiqueSession> session;
    std::atomic<Clock::rep> last_used{0};  // read by the sweep without mu
    bool closed = false;
  };

  std::shared_ptr<Live> acquire(const std::string& id);
  void sweep_locked(Clock::time_point now);
  nlohmann::json payload(const std::string& id, const CritiqueSession& s) const;
  nlohmann::json fact_json(const CritiqueFact& f) const;
  std::optional<EntityId> resolve_entity(const nlohmann::json& ref, bool want_user) const;

  std::shared_ptr<const Dataset> ds_;
  std::shared_ptr<const EmbeddingTable> emb_;
  std::unique_ptr<CritiqueModel> model_;
  ServiceConfig cfg_;
  std::function<Clock::time_point()> now_;

  mutable std::mutex store_mu_;
  std::unordered_map<std::string, std::shared_ptr<Live>> live_;
  std::unordered_set<std::string> tombstones_;
};

// Status code for an error category.
int http_status(ErrorCode code);

}  // namespace bcie

#endif  // BCIE_SESSION_SERVICE_HPP
