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


#ifndef BCIE_PIPELINE_HPP
#define BCIE_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcie/critique_engine.hpp"
#include "bcie/eval_metrics.hpp"
#include "bcie/kg_data.hpp"
#include "bcie/simple_embed.hpp"
#include "json.hpp"

namespace bcie {

struct PrepareOptions {
  std::optional<std::filesystem::path> ratings;
  std::optional<std::filesystem::path> triples;
  std::optional<std::filesystem::path> item_map;
  std::optional<std::filesystem::path> synthetic;  // key=value spec file
  std::optional<SyntheticSpec> synthetic_spec;     // in-memory alternative
  double threshold = kDefaultLikeThreshold;
  std::size_t min_facts = kDefaultMinFacts;
  double valid_frac = 0.1;
  double test_frac = 0.2;
  std::uint64_t seed = 1;
};

struct PreparedDataset {
  Dataset dataset;
  std::vector<std::string> warnings;
};

PreparedDataset build_dataset(const PrepareOptions& opts);

// Likes test hit@k for the trained model and for the popularity ranking.
// One header row "model,hit@k1,hit@k2,..." then rows "simple" and "popularity".
std::string evaluate_csv(const Dataset& ds, const EmbeddingTable& emb,
                         const std::vector<std::uint32_t>& ks);

// Grid over the three precisions. Each point runs validation-likes sessions
// and is scored by the objective; the best point wins, earlier grid points
// win ties.
struct TuneGrid {
  std::vector<double> j0{0.1, 0.2, 0.5, 1.0, 2.0};
  std::vector<double> j_m{1.0, 5.0};
  std::vector<double> alpha{0.1, 1.0, 20.0};
};

enum class TuneObjective {
  kNarc,       // mean NARC over critique events
  kMeanHit10,  // hit@10 averaged over steps 1..max_steps
};

struct SimulateOptions {
  std::vector<Strategy> strategies{Strategy::kBcie};
  SelectionMode mode = SelectionMode::kDiff;
  SessionConfig session;
  std::map<Strategy, SessionConfig> per_strategy;  // overrides `session`
  std::uint32_t runs = 3;
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;
  std::size_t max_sessions = 0;  // 0 runs one session per test likes triple
  // When set, strategies without a per_strategy entry get their precisions
  // tuned on validation sessions first.
  std::optional<TuneObjective> tune;
  TuneGrid grid;
};

struct SimulationResult {
  std::vector<SessionTrace> traces;  // ordered by (run, strategy, session)
  RankReport report;
  std::map<Strategy, SessionConfig> configs;  // as used, per strategy
};

struct TuneResult {
  SessionConfig best;
  double best_value = 0.0;
  std::vector<std::pair<SessionConfig, double>> evaluated;
};

SimulationResult simulate(const Dataset& ds, const EmbeddingTable& emb,
                          const SimulateOptions& opts);

TuneResult tune_session_config(const Dataset& ds, const EmbeddingTable& emb, Strategy strategy,
                               SelectionMode mode, const SessionConfig& base,
                               const TuneGrid& grid, TuneObjective objective,
                               std::uint32_t workers = 1, std::size_t max_sessions = 0);

// traces.jsonl, report.csv, summary.txt and configs.json.
void write_simulation(const SimulationResult& result, const std::filesystem::path& dir);

// Option parsing from JSON objects. Unknown keys are usage errors; missing
// keys keep the defaults above.
PrepareOptions prepare_options_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
SessionConfig session_config_from_json(const nlohmann::json& j, SessionConfig base = {});
SimulateOptions simulate_options_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionConfig& c);

nlohmann::json to_json(const DatasetStats& s);

}  // namespace bcie

#endif  // BCIE_PIPELINE_HPP
