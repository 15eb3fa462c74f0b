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


#include "bcie/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "bcie/error.hpp"

namespace bcie {

PreparedDataset build_dataset(const PrepareOptions& opts) {
  PreparedDataset out;
  KnowledgeGraph kg;
  if (opts.synthetic || opts.synthetic_spec) {
    SyntheticSpec spec = opts.synthetic_spec ? *opts.synthetic_spec
                                             : parse_synthetic_spec(*opts.synthetic);
    kg = generate_synthetic_kg(spec, spec.seed).kg;
  } else {
    if (!opts.ratings || !opts.triples || !opts.item_map)
      fail(ErrorCode::kUsage, "prepare needs --ratings, --triples and --item-map, or --synthetic");
    auto likes = load_ratings(*opts.ratings, opts.threshold);
    auto side = load_kg_triples(*opts.triples, *opts.item_map, likes.vocab);
    out.warnings = side.warnings;
    kg = build_user_item_kg(likes, side);
  }
  kg = filter_min_facts(kg, opts.min_facts);
  auto split = split_likes(kg, opts.valid_frac, opts.test_frac, opts.seed);
  out.dataset = make_dataset(kg, std::move(split));
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over the three inputs
  auto step = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return step(step(step(seed) ^ a) ^ b);
}

}  // namespace

std::string evaluate_csv(const Dataset& ds, const EmbeddingTable& emb,
                         const std::vector<std::uint32_t>& ks) {
  if (ks.empty()) fail(ErrorCode::kUsage, "evaluate: no k given");
  if (emb.entity_count() != ds.kg.entity_count() || emb.relation_count() != ds.kg.relation_count())
    fail(ErrorCode::kData, "checkpoint shape does not match the dataset");
  const auto known = liked_items(ds.kg, ds.split.train);
  std::string header = "model";
  std::string model_row = "simple";
  std::string pop_row = "popularity";
  for (auto k : ks) {
    if (k < 1) fail(ErrorCode::kUsage, "evaluate: k must be at least 1");
    header += ",hit@" + std::to_string(k);
    model_row += "," + fmt(link_prediction_hit_rate(emb, ds.kg, known, ds.split.test, k));
    pop_row += "," + fmt(popularity_hit_rate(ds.kg, ds.split.train, ds.split.test, k));
  }
  return header + "\n" + model_row + "\n" + pop_row + "\n";
}

namespace {

struct Job {
  std::uint32_t run;
  Strategy strategy;
  std::size_t session;
};

std::vector<Triple> likes_targets(const KnowledgeGraph& kg, std::span<const Triple> triples,
                                  std::size_t max_sessions) {
  std::vector<Triple> targets;
  for (const auto& t : triples)
    if (t.relation == kg.likes_relation()) targets.push_back(t);
  if (max_sessions > 0 && targets.size() > max_sessions) targets.resize(max_sessions);
  if (targets.empty()) fail(ErrorCode::kData, "no likes triples to simulate");
  return targets;
}

// Runs every job on a pool of `workers` threads; traces land at the job's
// index so the output order never depends on scheduling.
std::vector<SessionTrace> run_jobs(const CritiqueModel& model, const std::vector<Triple>& targets,
                                   const std::vector<Job>& jobs, SelectionMode mode,
                                   const std::map<Strategy, SessionConfig>& configs,
                                   std::uint64_t seed, std::uint32_t workers) {
  std::vector<SessionTrace> traces(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::optional<Error> first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const auto& job = jobs[idx];
      const auto& t = targets[job.session];
      try {
        auto trace = run_session(model, t.head, t.tail, job.strategy, mode,
                                 configs.at(job.strategy),
                                 mix_seed(seed, job.run, job.session));
        trace.run = job.run;
        trace.session = job.session;
        traces[idx] = std::move(trace);
      } catch (const Error& e) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = e;
        next.store(jobs.size());
      }
    }
  };
  const auto n_workers = std::max<std::uint32_t>(1, workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) throw *first_error;
  return traces;
}

}  // namespace

SimulationResult simulate(const Dataset& ds, const EmbeddingTable& emb,
                          const SimulateOptions& opts) {
  if (opts.runs < 1) fail(ErrorCode::kUsage, "runs must be at least 1");
  if (opts.strategies.empty()) fail(ErrorCode::kUsage, "no strategy selected");
  std::map<Strategy, SessionConfig> configs;
  for (auto s : opts.strategies) {
    auto it = opts.per_strategy.find(s);
    if (it != opts.per_strategy.end())
      configs[s] = it->second;
    else if (opts.tune)
      configs[s] = tune_session_config(ds, emb, s, opts.mode, opts.session, opts.grid, *opts.tune,
                                       opts.workers)
                       .best;
    else
      configs[s] = opts.session;
    configs[s].validate();
    if (configs[s].max_steps != opts.session.max_steps)
      fail(ErrorCode::kUsage, "per-strategy configs must share max_steps");
  }
  CritiqueModel model(ds.kg, emb, ds.split.train);
  auto targets = likes_targets(ds.kg, ds.split.test, opts.max_sessions);

  std::vector<Job> jobs;
  for (std::uint32_t r = 0; r < opts.runs; ++r)
    for (auto s : opts.strategies)
      for (std::size_t n = 0; n < targets.size(); ++n) jobs.push_back({r, s, n});

  SimulationResult result;
  result.traces = run_jobs(model, targets, jobs, opts.mode, configs, opts.seed, opts.workers);
  result.report = aggregate(result.traces, opts.session.max_steps);
  result.configs = std::move(configs);
  return result;
}

TuneResult tune_session_config(const Dataset& ds, const EmbeddingTable& emb, Strategy strategy,
                               SelectionMode mode, const SessionConfig& base,
                               const TuneGrid& grid, TuneObjective objective,
                               std::uint32_t workers, std::size_t max_sessions) {
  if (grid.j0.empty() || grid.j_m.empty() || grid.alpha.empty())
    fail(ErrorCode::kUsage, "tuning grid has an empty axis");
  CritiqueModel model(ds.kg, emb, ds.split.train);
  auto targets = likes_targets(ds.kg, ds.split.validation, max_sessions);
  std::vector<Job> jobs;
  for (std::size_t n = 0; n < targets.size(); ++n) jobs.push_back({0, strategy, n});

  TuneResult result;
  bool have_best = false;
  for (double j0 : grid.j0) {
    for (double j_m : grid.j_m) {
      for (double alpha : grid.alpha) {
        SessionConfig cfg = base;
        cfg.j0 = j0;
        cfg.j_m = j_m;
        cfg.alpha = alpha;
        cfg.validate();
        auto traces = run_jobs(model, targets, jobs, mode, {{strategy, cfg}}, 0, workers);
        auto report = aggregate(traces, cfg.max_steps);
        const auto& block = report.blocks.front();
        double value = 0.0;
        if (objective == TuneObjective::kNarc) {
          value = block.narc_count ? block.narc_mean : -std::numeric_limits<double>::infinity();
        } else {
          for (std::size_t s = 1; s < block.steps.size(); ++s) value += block.steps[s].hit10_mean;
          value /= double(std::max<std::size_t>(block.steps.size() - 1, 1));
        }
        result.evaluated.emplace_back(cfg, value);
        if (!have_best || value > result.best_value) {
          have_best = true;
          result.best = cfg;
          result.best_value = value;
        }
      }
    }
  }
  return result;
}

void write_simulation(const SimulationResult& result, const std::filesystem::path& dir) {
  emit_report(result.report, dir);
  std::ofstream out(dir / "traces.jsonl", std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + (dir / "traces.jsonl").string());
  for (const auto& t : result.traces) out << trace_to_jsonl(t);
  if (!out) fail(ErrorCode::kIo, "write failed for traces.jsonl");
  nlohmann::json configs = nlohmann::json::object();
  for (const auto& [s, c] : result.configs) configs[strategy_name(s)] = to_json(c);
  std::ofstream cfg_out(dir / "configs.json", std::ios::binary);
  cfg_out << configs.dump(2) << '\n';
  if (!cfg_out) fail(ErrorCode::kIo, "write failed for configs.json");
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    const char* what) {
  if (j.is_null()) return;
  if (!j.is_object()) fail(ErrorCode::kUsage, std::string(what) + " options must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(ErrorCode::kUsage, std::string("unknown ") + what + " option '" + k + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (j.is_null() || !j.contains(key) || j.at(key).is_null()) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kUsage, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

PrepareOptions prepare_options_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"ratings", "triples", "item_map", "synthetic", "threshold", "min_facts",
                     "valid_frac", "test_frac", "seed"},
                 "prepare");
  PrepareOptions o;
  auto path = [&](const char* key, std::optional<std::filesystem::path>& field) {
    std::string s;
    read(j, key, s);
    if (!s.empty()) field = s;
  };
  path("ratings", o.ratings);
  path("triples", o.triples);
  path("item_map", o.item_map);
  path("synthetic", o.synthetic);
  read(j, "threshold", o.threshold);
  read(j, "min_facts", o.min_facts);
  read(j, "valid_frac", o.valid_frac);
  read(j, "test_frac", o.test_frac);
  read(j, "seed", o.seed);
  return o;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"dim", "lr", "lambda", "neg_ratio", "batch_size", "epochs", "likelihood",
                     "seed", "init_scale", "eval_every", "hit_k"},
                 "train");
  TrainConfig c;
  read(j, "dim", c.dim);
  read(j, "lr", c.lr);
  read(j, "lambda", c.lambda);
  read(j, "neg_ratio", c.neg_ratio);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "init_scale", c.init_scale);
  read(j, "eval_every", c.eval_every);
  read(j, "hit_k", c.hit_k);
  std::string likelihood;
  read(j, "likelihood", likelihood);
  if (likelihood == "logistic")
    c.likelihood = Likelihood::kLogistic;
  else if (likelihood == "gaussian")
    c.likelihood = Likelihood::kGaussian;
  else if (!likelihood.empty())
    fail(ErrorCode::kUsage, "likelihood must be logistic or gaussian");
  c.validate();
  return c;
}

SessionConfig session_config_from_json(const nlohmann::json& j, SessionConfig c) {
  reject_unknown(j, {"top_k", "max_steps", "alpha", "j_m", "j0", "eps", "sign", "mapped_items",
                     "evidence_magnitude", "stop_at_top1", "record_beliefs"},
                 "session");
  read(j, "top_k", c.top_k);
  read(j, "max_steps", c.max_steps);
  read(j, "alpha", c.alpha);
  read(j, "j_m", c.j_m);
  read(j, "j0", c.j0);
  read(j, "eps", c.eps);
  read(j, "mapped_items", c.mapped_items);
  read(j, "evidence_magnitude", c.evidence_magnitude);
  read(j, "stop_at_top1", c.stop_at_top1);
  read(j, "record_beliefs", c.record_beliefs);
  std::string sign;
  read(j, "sign", sign);
  if (sign == "paper")
    c.sign = CouplingSign::kPaper;
  else if (sign == "compat")
    c.sign = CouplingSign::kCompat;
  else if (!sign.empty())
    fail(ErrorCode::kUsage, "sign must be paper or compat");
  c.validate();
  return c;
}

SimulateOptions simulate_options_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"strategy", "mode", "runs", "seed", "workers", "max_sessions", "session",
                     "tune"},
                 "simulate");
  SimulateOptions o;
  std::string strategy, mode;
  read(j, "strategy", strategy);
  read(j, "mode", mode);
  if (strategy == "all") {
    o.strategies = {Strategy::kBcie, Strategy::kMappedItems, Strategy::kDirect};
  } else if (!strategy.empty()) {
    auto s = parse_strategy(strategy);
    if (!s) fail(ErrorCode::kUsage, "strategy must be bcie, mapped_items, direct or all");
    o.strategies = {*s};
  }
  if (!mode.empty()) {
    auto m = parse_mode(mode);
    if (!m) fail(ErrorCode::kUsage, "mode must be diff or random");
    o.mode = *m;
  }
  read(j, "runs", o.runs);
  read(j, "seed", o.seed);
  read(j, "workers", o.workers);
  read(j, "max_sessions", o.max_sessions);
  if (!j.is_null() && j.contains("session")) o.session = session_config_from_json(j.at("session"));
  std::string tune;
  read(j, "tune", tune);
  if (tune == "narc")
    o.tune = TuneObjective::kNarc;
  else if (tune == "hit10")
    o.tune = TuneObjective::kMeanHit10;
  else if (tune == "auto")
    o.tune = o.session.max_steps == 1 ? TuneObjective::kNarc : TuneObjective::kMeanHit10;
  else if (!tune.empty() && tune != "none")
    fail(ErrorCode::kUsage, "tune must be none, auto, narc or hit10");
  return o;
}

nlohmann::json to_json(const SessionConfig& c) {
  return {{"top_k", c.top_k},
          {"max_steps", c.max_steps},
          {"alpha", c.alpha},
          {"j_m", c.j_m},
          {"j0", c.j0},
          {"eps", c.eps},
          {"sign", c.sign == CouplingSign::kPaper ? "paper" : "compat"},
          {"mapped_items", c.mapped_items},
          {"evidence_magnitude", c.evidence_magnitude},
          {"stop_at_top1", c.stop_at_top1},
          {"record_beliefs", c.record_beliefs}};
}

nlohmann::json to_json(const DatasetStats& s) {
  return {{"users", s.users},          {"items", s.items},
          {"kg_entities", s.kg_entities}, {"kg_relations", s.kg_relations},
          {"likes", s.likes},          {"side_facts", s.side_facts},
          {"min_item_facts", s.min_item_facts}, {"train_likes", s.train_likes},
          {"valid_likes", s.valid_likes}, {"test_likes", s.test_likes}};
}

}  // namespace bcie
