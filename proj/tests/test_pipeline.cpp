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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "bcie/error.hpp"
#include "bcie/pipeline.hpp"

using namespace bcie;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("option parsing") {
  auto s = session_config_from_json(json{{"alpha", 3.0}, {"sign", "paper"}, {"max_steps", 2}});
  CHECK(s.alpha == 3.0);
  CHECK(s.sign == CouplingSign::kPaper);
  CHECK(s.max_steps == 2);
  CHECK(s.j_m == SessionConfig{}.j_m);
  CHECK(code_of([] { session_config_from_json(json{{"alpah", 1}}); }) == ErrorCode::kUsage);
  CHECK(code_of([] { session_config_from_json(json{{"sign", "upside"}}); }) == ErrorCode::kUsage);

  auto back = session_config_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));

  auto t = train_config_from_json(json{{"dim", 8}, {"likelihood", "logistic"}});
  CHECK(t.dim == 8);
  CHECK(t.likelihood == Likelihood::kLogistic);
  CHECK(code_of([] { train_config_from_json(json{{"epoch", 3}}); }) == ErrorCode::kUsage);

  auto o = simulate_options_from_json(
      json{{"strategy", "all"}, {"mode", "random"}, {"runs", 2}, {"tune", "auto"},
           {"session", {{"max_steps", 1}}}});
  CHECK(o.strategies.size() == 3);
  CHECK(o.mode == SelectionMode::kRandom);
  CHECK(o.runs == 2);
  CHECK(o.session.max_steps == 1);
  REQUIRE(o.tune);
  CHECK(*o.tune == TuneObjective::kNarc);
  CHECK(simulate_options_from_json(json{{"tune", "auto"}}).tune == TuneObjective::kMeanHit10);
  CHECK_FALSE(simulate_options_from_json(json::object()).tune);
  CHECK(code_of([] { simulate_options_from_json(json{{"strategy", "magic"}}); }) == ErrorCode::kUsage);

  auto p = prepare_options_from_json(json{{"synthetic", "spec.txt"}, {"seed", 4}});
  CHECK(p.synthetic == std::filesystem::path("spec.txt"));
  CHECK(p.seed == 4);
}

TEST_CASE("build_dataset from an in-memory spec") {
  PrepareOptions opts;
  SyntheticSpec spec;
  spec.users = 30;
  spec.items = 40;
  spec.attributes = 60;
  opts.synthetic_spec = spec;
  auto a = build_dataset(opts);
  auto b = build_dataset(opts);
  CHECK(a.dataset.kg.triples() == b.dataset.kg.triples());
  CHECK(a.dataset.split.test == b.dataset.split.test);
  CHECK(dataset_stats(a.dataset).min_item_facts >= 5);
  CHECK(code_of([] { build_dataset(PrepareOptions{}); }) == ErrorCode::kUsage);
}

TEST_CASE("evaluate_csv") {
  const auto& fx = test::trained_fixture();
  auto csv = evaluate_csv(fx.ds, fx.emb, {1});
  std::istringstream in(csv);
  std::string header, model, pop;
  std::getline(in, header);
  std::getline(in, model);
  std::getline(in, pop);
  CHECK(header == "model,hit@1");
  CHECK(model.rfind("simple,", 0) == 0);
  const double want = test::oracle_popularity_hit(fx.ds.kg, fx.ds.split.train, fx.ds.split.test, 1);
  CHECK(std::stod(pop.substr(pop.find(',') + 1)) == doctest::Approx(want).epsilon(1e-5));
  CHECK(code_of([&] { evaluate_csv(fx.ds, fx.emb, {}); }) == ErrorCode::kUsage);
  CHECK(code_of([&] { evaluate_csv(fx.ds, fx.emb, {0}); }) == ErrorCode::kUsage);
  EmbeddingTable wrong(3, 1, 4);
  CHECK(code_of([&] { evaluate_csv(fx.ds, wrong, {5}); }) == ErrorCode::kData);
}

TEST_CASE("simulate is deterministic across worker counts") {
  const auto& fx = test::trained_fixture();
  SimulateOptions o;
  o.strategies = {Strategy::kBcie, Strategy::kDirect};
  o.mode = SelectionMode::kRandom;
  o.runs = 2;
  o.max_sessions = 25;
  o.workers = 1;
  auto a = simulate(fx.ds, fx.emb, o);
  o.workers = 4;
  auto b = simulate(fx.ds, fx.emb, o);
  REQUIRE(a.traces.size() == 2 * 2 * 25);
  std::string ja, jb;
  for (const auto& t : a.traces) ja += trace_to_jsonl(t);
  for (const auto& t : b.traces) jb += trace_to_jsonl(t);
  CHECK(ja == jb);
  CHECK(report_csv(a.report) == report_csv(b.report));
  CHECK(a.report.blocks.size() == 2);

  // Runs draw different random critiques.
  std::string run0, run1;
  for (const auto& t : a.traces)
    for (const auto& r : t.steps)
      if (r.fact) (t.run == 0 ? run0 : run1) += fact_id(*r.fact) + ";";
  CHECK(run0 != run1);

  auto dir = test::temp_dir("simulate");
  write_simulation(a, dir / "one");
  write_simulation(b, dir / "two");
  for (auto f : {"traces.jsonl", "report.csv", "summary.txt", "configs.json"}) {
    CHECK(std::filesystem::exists(dir / "one" / f));
    CHECK(slurp(dir / "one" / f) == slurp(dir / "two" / f));
  }
  auto configs = json::parse(slurp(dir / "one" / "configs.json"));
  CHECK(configs.contains("bcie"));
  CHECK(configs.contains("direct"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("per-strategy configs must agree on max_steps") {
  const auto& fx = test::trained_fixture();
  SimulateOptions o;
  o.strategies = {Strategy::kBcie, Strategy::kDirect};
  o.max_sessions = 5;
  o.runs = 1;
  SessionConfig shorter;
  shorter.max_steps = 2;
  o.per_strategy[Strategy::kDirect] = shorter;
  CHECK(code_of([&] { simulate(fx.ds, fx.emb, o); }) == ErrorCode::kUsage);
}

TEST_CASE("tuning picks the best grid point") {
  const auto& fx = test::trained_fixture();
  TuneGrid grid;
  grid.j0 = {0.5, 1.0};
  grid.j_m = {5.0};
  grid.alpha = {1.0, 20.0};
  SessionConfig base;
  base.max_steps = 1;
  auto r = tune_session_config(fx.ds, fx.emb, Strategy::kBcie, SelectionMode::kDiff, base, grid,
                               TuneObjective::kNarc, 2, 40);
  REQUIRE(r.evaluated.size() == 4);
  double best = -1e300;
  for (const auto& [c, v] : r.evaluated) best = std::max(best, v);
  CHECK(r.best_value == best);
  bool found = false;
  for (const auto& [c, v] : r.evaluated)
    if (v == best && !found) {
      CHECK(to_json(c) == to_json(r.best));
      found = true;
    }
  CHECK(r.best.max_steps == 1);

  // Tuning inside simulate uses every validation session and records the
  // chosen config.
  auto full = tune_session_config(fx.ds, fx.emb, Strategy::kBcie, SelectionMode::kDiff, base, grid,
                                  TuneObjective::kNarc);
  SimulateOptions o;
  o.session = base;
  o.tune = TuneObjective::kNarc;
  o.grid = grid;
  o.runs = 1;
  o.max_sessions = 40;
  auto sim = simulate(fx.ds, fx.emb, o);
  REQUIRE(sim.configs.count(Strategy::kBcie));
  CHECK(to_json(sim.configs.at(Strategy::kBcie)) == to_json(full.best));
}

}  // TEST_SUITE
