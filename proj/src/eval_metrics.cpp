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


#include "bcie/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "bcie/error.hpp"

namespace bcie {

std::size_t rank_position(std::span<const EntityId> ranking, EntityId item) {
  auto it = std::find(ranking.begin(), ranking.end(), item);
  if (it == ranking.end())
    fail(ErrorCode::kData, "item " + std::to_string(item) + " is not in the ranking");
  return static_cast<std::size_t>(it - ranking.begin()) + 1;
}

double average_rank(std::span<const EntityId> ranking, std::span<const EntityId> items) {
  if (items.empty()) fail(ErrorCode::kUsage, "average_rank: empty item set");
  std::vector<EntityId> wanted(items.begin(), items.end());
  std::sort(wanted.begin(), wanted.end());
  double sum = 0.0;
  std::size_t found = 0;
  for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
    if (std::binary_search(wanted.begin(), wanted.end(), ranking[pos])) {
      sum += double(pos + 1);
      ++found;
    }
  }
  if (found != wanted.size()) fail(ErrorCode::kData, "average_rank: items missing from ranking");
  return sum / double(found);
}

double narc(double ar_pre, double ar_post) {
  if (!(ar_pre > 0.0)) fail(ErrorCode::kUsage, "narc: ar_pre must be positive");
  return (ar_pre - ar_post) / ar_pre;
}

int hit_rate_at_k(std::span<const EntityId> ranking, EntityId gt_item, std::size_t k) {
  if (k < 1) fail(ErrorCode::kUsage, "hit_rate_at_k: k must be at least 1");
  return rank_position(ranking, gt_item) <= k ? 1 : 0;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / double(xs.size() - 1)) / std::sqrt(double(xs.size()));
  }
  return r;
}

const StepRecord& record_at(const SessionTrace& t, std::uint32_t step) {
  if (t.steps.empty()) fail(ErrorCode::kData, "aggregate: trace without records");
  const StepRecord* last = &t.steps.front();
  for (const auto& r : t.steps) {
    if (r.step > step) break;
    last = &r;
  }
  return *last;
}

}  // namespace

RankReport aggregate(std::span<const SessionTrace> traces, std::uint32_t max_steps) {
  if (traces.empty()) fail(ErrorCode::kUsage, "aggregate: no traces");
  // Sorting first makes the floating-point sums independent of input order.
  std::vector<const SessionTrace*> sorted;
  for (const auto& t : traces) sorted.push_back(&t);
  auto key = [](const SessionTrace* t) {
    return std::make_tuple(int(t->strategy), int(t->mode), t->run, t->session,
                           t->user.value_or(0), t->gt_item.value_or(0));
  };
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](const auto* a, const auto* b) { return key(a) < key(b); });

  using BlockKey = std::pair<int, int>;
  std::map<BlockKey, std::map<std::uint64_t, std::vector<const SessionTrace*>>> groups;
  for (const auto* t : sorted) groups[{int(t->strategy), int(t->mode)}][t->run].push_back(t);

  RankReport report;
  for (const auto& [bkey, runs] : groups) {
    ReportBlock block;
    block.strategy = static_cast<Strategy>(bkey.first);
    block.mode = static_cast<SelectionMode>(bkey.second);
    block.runs = runs.size();
    block.steps.resize(max_steps + 1);
    std::vector<std::vector<double>> narc_by_step(max_steps + 1);
    std::vector<double> narc_all;
    std::vector<double> se5_sq(max_steps + 1, 0.0), se10_sq(max_steps + 1, 0.0);
    for (const auto& [run, sessions] : runs) {
      block.sessions += sessions.size();
      for (std::uint32_t s = 0; s <= max_steps; ++s) {
        std::vector<double> h5, h10;
        for (const auto* t : sessions) {
          const auto& r = record_at(*t, s);
          if (!r.hit5 || !r.hit10) fail(ErrorCode::kData, "aggregate: record without hit flags");
          h5.push_back(*r.hit5);
          h10.push_back(*r.hit10);
        }
        auto m5 = mean_se(h5);
        auto m10 = mean_se(h10);
        block.steps[s].hit5_mean += m5.mean;
        block.steps[s].hit10_mean += m10.mean;
        se5_sq[s] += m5.se * m5.se;
        se10_sq[s] += m10.se * m10.se;
      }
      for (const auto* t : sessions)
        for (const auto& r : t->steps)
          if (r.narc && r.step <= max_steps) {
            narc_by_step[r.step].push_back(r.narc->narc);
            narc_all.push_back(r.narc->narc);
          }
    }
    const double n_runs = double(block.runs);
    for (std::uint32_t s = 0; s <= max_steps; ++s) {
      auto& st = block.steps[s];
      st.hit5_mean /= n_runs;
      st.hit10_mean /= n_runs;
      st.hit5_se = std::sqrt(se5_sq[s]) / n_runs;
      st.hit10_se = std::sqrt(se10_sq[s]) / n_runs;
      st.narc_count = narc_by_step[s].size();
      st.narc_mean = st.narc_count ? mean_se(narc_by_step[s]).mean
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    block.narc_count = narc_all.size();
    block.narc_mean = narc_all.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : mean_se(narc_all).mean;
    report.blocks.push_back(std::move(block));
  }
  return report;
}

namespace {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double x = std::stod(s, &used);
  if (used != s.size()) fail(ErrorCode::kData, "bad number '" + s + "' in report CSV");
  return x;
}

}  // namespace

std::string report_csv(const RankReport& report) {
  std::string out = "strategy,mode,step,hit5_mean,hit5_se,hit10_mean,hit10_se,narc_mean\n";
  for (const auto& b : report.blocks) {
    for (std::size_t s = 0; s < b.steps.size(); ++s) {
      const auto& st = b.steps[s];
      out += std::string(strategy_name(b.strategy)) + "," + mode_name(b.mode) + "," +
             std::to_string(s) + "," + fmt_double(st.hit5_mean) + "," + fmt_double(st.hit5_se) +
             "," + fmt_double(st.hit10_mean) + "," + fmt_double(st.hit10_se) + "," +
             fmt_double(st.narc_mean) + "\n";
    }
  }
  return out;
}

RankReport parse_report_csv(const std::string& csv) {
  RankReport report;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "strategy,mode,step,hit5_mean,hit5_se,hit10_mean,hit10_se,narc_mean")
    fail(ErrorCode::kData, "report CSV: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) f.push_back(cell);
    if (f.size() != 8) fail(ErrorCode::kData, "report CSV: expected 8 columns");
    auto strategy = parse_strategy(f[0]);
    auto mode = parse_mode(f[1]);
    if (!strategy || !mode) fail(ErrorCode::kData, "report CSV: unknown strategy or mode");
    if (report.blocks.empty() || report.blocks.back().strategy != *strategy ||
        report.blocks.back().mode != *mode) {
      report.blocks.emplace_back();
      report.blocks.back().strategy = *strategy;
      report.blocks.back().mode = *mode;
    }
    StepStats st;
    st.hit5_mean = parse_double(f[3]);
    st.hit5_se = parse_double(f[4]);
    st.hit10_mean = parse_double(f[5]);
    st.hit10_se = parse_double(f[6]);
    st.narc_mean = parse_double(f[7]);
    report.blocks.back().steps.push_back(st);
  }
  return report;
}

std::string report_summary(const RankReport& report) {
  std::ostringstream os;
  for (const auto& b : report.blocks) {
    os << strategy_name(b.strategy) << " / " << mode_name(b.mode) << ": " << b.runs
       << " run(s), " << b.sessions << " session(s), mean NARC " << fmt_double(b.narc_mean)
       << " over " << b.narc_count << " critique(s)\n";
    os << "  step  hit@5     hit@10    NARC\n";
    for (std::size_t s = 0; s < b.steps.size(); ++s) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %-4zu  %.4f    %.4f    %s\n", s, b.steps[s].hit5_mean,
                    b.steps[s].hit10_mean,
                    std::isnan(b.steps[s].narc_mean) ? "-" : fmt_double(b.steps[s].narc_mean).substr(0, 8).c_str());
      os << buf;
    }
  }
  return os.str();
}

void emit_report(const RankReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write " + p.string());
    out << content;
    if (!out) fail(ErrorCode::kIo, "write failed for " + p.string());
  };
  write(dir / "report.csv", report_csv(report));
  write(dir / "summary.txt", report_summary(report));
}

}  // namespace bcie
