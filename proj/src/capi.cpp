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


#include "bcie/bcie.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "bcie/error.hpp"
#include "bcie/pipeline.hpp"
#include "bcie/session_service.hpp"

using nlohmann::json;

struct bcie_dataset {
  std::shared_ptr<const bcie::Dataset> ds;
};

struct bcie_model {
  std::shared_ptr<const bcie::EmbeddingTable> emb;
  std::uint32_t best_epoch = 0;
  double best_valid_hit = -1.0;
  std::size_t epochs_run = 0;
};

struct bcie_service {
  std::unique_ptr<bcie::SessionService> svc;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_json_arg(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bcie::fail(bcie::ErrorCode::kUsage, std::string(what) + " is not valid JSON");
  return j;
}

template <typename F>
bcie_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return BCIE_OK;
  } catch (const bcie::Error& e) {
    g_last_error = e.what();
    return static_cast<bcie_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return BCIE_ERR_USAGE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BCIE_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) bcie::fail(bcie::ErrorCode::kUsage, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* bcie_version(void) { return "0.1.0"; }

const char* bcie_last_error(void) { return g_last_error.c_str(); }

void bcie_string_free(char* s) { std::free(s); }

bcie_status bcie_prepare(const char* options_json, const char* out_dir, bcie_dataset** out,
                         char** info_json) {
  return guard([&] {
    require(out, "out");
    auto opts = bcie::prepare_options_from_json(parse_json_arg(options_json, "options"));
    auto prepared = bcie::build_dataset(opts);
    if (out_dir) bcie::save_dataset(prepared.dataset, out_dir);
    if (info_json) {
      const auto stats = bcie::dataset_stats(prepared.dataset);
      json info = {{"stats", bcie::to_json(stats)},
                   {"table", bcie::format_stats_table(stats)},
                   {"warnings", prepared.warnings}};
      *info_json = dup_string(info.dump());
    }
    *out = new bcie_dataset{std::make_shared<const bcie::Dataset>(std::move(prepared.dataset))};
  });
}

bcie_status bcie_dataset_load(const char* dir, bcie_dataset** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new bcie_dataset{std::make_shared<const bcie::Dataset>(bcie::load_dataset(dir))};
  });
}

bcie_status bcie_dataset_stats(const bcie_dataset* ds, char** stats_json) {
  return guard([&] {
    require(ds, "dataset");
    require(stats_json, "stats_json");
    const auto stats = bcie::dataset_stats(*ds->ds);
    json j = bcie::to_json(stats);
    j["table"] = bcie::format_stats_table(stats);
    *stats_json = dup_string(j.dump());
  });
}

void bcie_dataset_free(bcie_dataset* ds) { delete ds; }

bcie_status bcie_train(const bcie_dataset* ds, const char* config_json, bcie_epoch_fn on_epoch,
                       void* user, bcie_model** out) {
  return guard([&] {
    require(ds, "dataset");
    require(out, "out");
    auto cfg = bcie::train_config_from_json(parse_json_arg(config_json, "config"));
    bcie::EpochCallback cb;
    if (on_epoch) {
      cb = [&](const bcie::EpochLog& log) {
        json j = {{"epoch", log.epoch},
                  {"loss", log.loss},
                  {"valid_hit", log.valid_hit < 0 ? json(nullptr) : json(log.valid_hit)}};
        on_epoch(j.dump().c_str(), user);
      };
    }
    auto result = bcie::train(*ds->ds, cfg, cb);
    auto* m = new bcie_model;
    m->emb = std::make_shared<const bcie::EmbeddingTable>(std::move(result.table));
    m->best_epoch = result.best_epoch;
    m->best_valid_hit = result.best_valid_hit;
    m->epochs_run = result.log.size();
    *out = m;
  });
}

bcie_status bcie_model_info(const bcie_model* m, char** info_json) {
  return guard([&] {
    require(m, "model");
    require(info_json, "info_json");
    json j = {{"dim", m->emb->dim()},
              {"entities", m->emb->entity_count()},
              {"relations", m->emb->relation_count()},
              {"best_epoch", m->best_epoch},
              {"best_valid_hit", m->best_valid_hit < 0 ? json(nullptr) : json(m->best_valid_hit)},
              {"epochs_run", m->epochs_run}};
    *info_json = dup_string(j.dump());
  });
}

bcie_status bcie_model_save(const bcie_model* m, const char* path) {
  return guard([&] {
    require(m, "model");
    require(path, "path");
    bcie::save_checkpoint(*m->emb, path);
  });
}

bcie_status bcie_model_load(const char* path, bcie_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto* m = new bcie_model;
    m->emb = std::make_shared<const bcie::EmbeddingTable>(bcie::load_checkpoint(path));
    *out = m;
  });
}

void bcie_model_free(bcie_model* m) { delete m; }

bcie_status bcie_evaluate(const bcie_dataset* ds, const bcie_model* m, const uint32_t* ks,
                          size_t n_ks, char** csv) {
  return guard([&] {
    require(ds, "dataset");
    require(m, "model");
    require(csv, "csv");
    if (n_ks > 0) require(ks, "ks");
    std::vector<std::uint32_t> k_list(ks, ks + n_ks);
    if (k_list.empty()) k_list = {5, 10};
    *csv = dup_string(bcie::evaluate_csv(*ds->ds, *m->emb, k_list));
  });
}

bcie_status bcie_simulate(const bcie_dataset* ds, const bcie_model* m, const char* options_json,
                          const char* out_dir, char** summary) {
  return guard([&] {
    require(ds, "dataset");
    require(m, "model");
    auto opts = bcie::simulate_options_from_json(parse_json_arg(options_json, "options"));
    auto result = bcie::simulate(*ds->ds, *m->emb, opts);
    if (out_dir) {
      std::filesystem::create_directories(out_dir);
      bcie::write_simulation(result, out_dir);
    }
    if (summary) *summary = dup_string(bcie::report_summary(result.report));
  });
}

bcie_status bcie_service_create(const bcie_dataset* ds, const bcie_model* m,
                                const char* config_json, bcie_service** out) {
  return guard([&] {
    require(ds, "dataset");
    require(m, "model");
    require(out, "out");
    const auto j = parse_json_arg(config_json, "config");
    for (const auto& [k, v] : j.items())
      if (k != "session" && k != "strategy" && k != "ttl_seconds" && k != "traces_dir")
        bcie::fail(bcie::ErrorCode::kUsage, "unknown service option '" + k + "'");
    bcie::ServiceConfig cfg;
    if (j.contains("session")) cfg.session = bcie::session_config_from_json(j["session"]);
    if (j.contains("strategy")) {
      auto s = bcie::parse_strategy(j["strategy"].get<std::string>());
      if (!s) bcie::fail(bcie::ErrorCode::kUsage, "unknown strategy");
      cfg.strategy = *s;
    }
    if (j.contains("ttl_seconds")) {
      const auto ttl = j["ttl_seconds"].get<std::int64_t>();
      if (ttl <= 0) bcie::fail(bcie::ErrorCode::kUsage, "ttl_seconds must be positive");
      cfg.ttl = std::chrono::seconds(ttl);
    }
    if (j.contains("traces_dir")) cfg.traces_dir = j["traces_dir"].get<std::string>();
    auto* s = new bcie_service;
    try {
      s->svc = std::make_unique<bcie::SessionService>(ds->ds, m->emb, std::move(cfg));
    } catch (...) {
      delete s;
      throw;
    }
    *out = s;
  });
}

bcie_status bcie_service_handle(bcie_service* svc, const char* method, const char* path,
                                const char* body, int* http_status, char** response_json) {
  return guard([&] {
    require(svc, "service");
    require(method, "method");
    require(path, "path");
    require(http_status, "http_status");
    require(response_json, "response_json");
    auto r = svc->svc->handle(method, path, body ? body : "");
    *http_status = r.status;
    *response_json = dup_string(r.body.dump());
  });
}

void bcie_service_free(bcie_service* svc) { delete svc; }

}  // extern "C"
