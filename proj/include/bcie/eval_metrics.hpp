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


#ifndef BCIE_EVAL_METRICS_HPP
#define BCIE_EVAL_METRICS_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bcie/critique_engine.hpp"

namespace bcie {

// 1-based position; throws kData when the item is absent.
std::size_t rank_position(std::span<const EntityId> ranking, EntityId item);

double average_rank(std::span<const EntityId> ranking, std::span<const EntityId> items);

// (ar_pre - ar_post) / ar_pre; positive when the items moved up.
double narc(double ar_pre, double ar_post);

int hit_rate_at_k(std::span<const EntityId> ranking, EntityId gt_item, std::size_t k);

struct StepStats {
  double hit5_mean = 0.0;
  double hit5_se = 0.0;
  double hit10_mean = 0.0;
  double hit10_se = 0.0;
  double narc_mean = 0.0;  // NaN when no critique happened at this step
  std::size_t narc_count = 0;
};

struct ReportBlock {
  Strategy strategy = Strategy::kBcie;
  SelectionMode mode = SelectionMode::kDiff;
  std::size_t runs = 0;
  std::size_t sessions = 0;  // per run, summed over runs
  std::vector<StepStats> steps;  // max_steps + 1 entries
  double narc_mean = 0.0;       // pooled over every critique event
  std::size_t narc_count = 0;
};

struct RankReport {
  std::vector<ReportBlock> blocks;  // ordered by (strategy, mode)
};

// Groups traces by (strategy, mode, run). Per step: mean and standard error
// across a run's sessions, then averaged across runs (errors combined as
// sqrt(sum se_r^2) / runs). Sessions that stop early carry their last record
// forward. NARC is pooled over critique events.
RankReport aggregate(std::span<const SessionTrace> traces, std::uint32_t max_steps);

// Columns: strategy,mode,step,hit5_mean,hit5_se,hit10_mean,hit10_se,narc_mean
std::string report_csv(const RankReport& report);
RankReport parse_report_csv(const std::string& csv);
std::string report_summary(const RankReport& report);

// Writes report.csv and summary.txt into `dir`.
void emit_report(const RankReport& report, const std::filesystem::path& dir);

}  // namespace bcie

#endif  // BCIE_EVAL_METRICS_HPP
