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


// Command-line front end. Every subcommand builds a JSON options object
// (config-file section first, then explicit flags on top) and hands it to
// the C API.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "bcie/bcie.h"
#include "http_frontend.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// 0 ok, 1 usage, 2 data, 3 numerical.
int exit_code(bcie_status s) {
  switch (s) {
    case BCIE_OK: return 0;
    case BCIE_ERR_USAGE: return 1;
    case BCIE_ERR_NUMERICAL: return 3;
    case BCIE_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

int report(bcie_status s, const char* what) {
  if (s != BCIE_OK) std::fprintf(stderr, "bcie %s: %s\n", what, bcie_last_error());
  return exit_code(s);
}

struct Owned {
  char* p = nullptr;
  ~Owned() { bcie_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct DatasetHandle {
  bcie_dataset* p = nullptr;
  ~DatasetHandle() { bcie_dataset_free(p); }
};

struct ModelHandle {
  bcie_model* p = nullptr;
  ~ModelHandle() { bcie_model_free(p); }
};

struct ServiceHandle {
  bcie_service* p = nullptr;
  ~ServiceHandle() { bcie_service_free(p); }
};

// Flag values land here only when given on the command line, so that
// config-file values survive unless overridden.
class Overlay {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key,
                   const std::string& help, std::vector<std::string> path = {}) {
    auto holder = std::make_shared<T>();
    auto* opt = app->add_option(flag, *holder, help);
    entries_.push_back([opt, holder, key, path](json& j) {
      if (opt->count() == 0) return;
      json* target = &j;
      for (const auto& p : path) target = &(*target)[p];
      (*target)[key] = *holder;
    });
    return opt;
  }

  void apply(json& j) const {
    for (const auto& e : entries_) e(j);
  }

 private:
  std::vector<std::function<void(json&)>> entries_;
};

json load_config_section(const std::string& path, const char* section) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  json all = json::parse(in, nullptr, false);
  if (all.is_discarded() || !all.is_object())
    throw CLI::ValidationError("--config", path + " is not a JSON object");
  if (!all.contains(section)) return json::object();
  return all[section];
}

std::string model_path(const std::string& given, const std::string& data) {
  return given.empty() ? (fs::path(data) / "model.bin").string() : given;
}

int load_inputs(const std::string& data, const std::string& model, DatasetHandle& ds,
                ModelHandle& m) {
  if (auto s = bcie_dataset_load(data.c_str(), &ds.p); s != BCIE_OK) return report(s, "load dataset");
  if (auto s = bcie_model_load(model.c_str(), &m.p); s != BCIE_OK) return report(s, "load model");
  return 0;
}

void add_session_flags(Overlay& ov, CLI::App* cmd, std::vector<std::string> path) {
  ov.add<double>(cmd, "--alpha", "alpha", "evidence precision", path);
  ov.add<double>(cmd, "--j0", "j0", "initial user precision", path);
  ov.add<double>(cmd, "--jm", "j_m", "item prior precision", path);
  ov.add<double>(cmd, "--eps", "eps", "precision floor", path);
  ov.add<std::string>(cmd, "--sign", "sign", "coupling sign: compat or paper", path)
      ->check(CLI::IsMember({"compat", "paper"}));
  ov.add<std::uint32_t>(cmd, "--steps", "max_steps", "critiques per session", path);
  ov.add<std::uint32_t>(cmd, "--top-k", "top_k", "items presented per step", path);
  ov.add<std::uint32_t>(cmd, "--mapped-items", "mapped_items",
                        "items per critique for mapped_items", path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian critiquing over knowledge-graph embeddings"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with per-command sections");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "build a dataset directory");
  Overlay prep_ov;
  std::string prep_out;
  prepare->add_option("--out", prep_out, "dataset directory to write")->required();
  prep_ov.add<std::string>(prepare, "--ratings", "ratings", "user<TAB>item<TAB>rating<TAB>ts file");
  prep_ov.add<std::string>(prepare, "--triples", "triples", "KG triples file");
  prep_ov.add<std::string>(prepare, "--item-map", "item_map", "item to KG entity map");
  prep_ov.add<std::string>(prepare, "--synthetic", "synthetic", "synthetic spec (key=value file)");
  prep_ov.add<double>(prepare, "--threshold", "threshold", "ratings above this are likes");
  prep_ov.add<std::size_t>(prepare, "--min-facts", "min_facts", "minimum side facts per item");
  prep_ov.add<double>(prepare, "--valid", "valid_frac", "validation fraction of likes");
  prep_ov.add<double>(prepare, "--test", "test_frac", "test fraction of likes");
  prep_ov.add<std::uint64_t>(prepare, "--seed", "seed", "split and generator seed");

  // train
  auto* train = app.add_subcommand("train", "fit SimplE embeddings");
  Overlay train_ov;
  std::string train_data, train_out;
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "checkpoint path (default <data>/model.bin)");
  train_ov.add<std::uint32_t>(train, "--dim", "dim", "embedding dimension");
  train_ov.add<double>(train, "--lr", "lr", "SGD learning rate");
  train_ov.add<double>(train, "--lambda", "lambda", "L2 weight");
  train_ov.add<std::uint32_t>(train, "--epochs", "epochs", "training epochs");
  train_ov.add<std::string>(train, "--likelihood", "likelihood", "gaussian or logistic")
      ->check(CLI::IsMember({"gaussian", "logistic"}));
  train_ov.add<std::uint32_t>(train, "--neg-ratio", "neg_ratio", "negatives per positive");
  train_ov.add<std::uint32_t>(train, "--batch", "batch_size", "minibatch size");
  train_ov.add<double>(train, "--init-scale", "init_scale", "initialization std");
  train_ov.add<std::uint32_t>(train, "--eval-every", "eval_every", "epochs between validations");
  train_ov.add<std::uint64_t>(train, "--seed", "seed", "training seed");
  bool quiet = false;
  train->add_flag("--quiet", quiet, "suppress per-epoch output");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "pre-critiquing hit@k");
  std::string eval_data, eval_model, eval_out;
  std::vector<std::uint32_t> eval_ks;
  evaluate->add_option("--data", eval_data, "dataset directory")->required();
  evaluate->add_option("--model", eval_model, "checkpoint (default <data>/model.bin)");
  evaluate->add_option("--k", eval_ks, "cutoffs (default 5,10)")->delimiter(',');
  evaluate->add_option("--out", eval_out, "also write the CSV here");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "simulated critiquing sessions");
  Overlay sim_ov;
  std::string sim_data, sim_model, sim_out;
  simulate->add_option("--data", sim_data, "dataset directory")->required();
  simulate->add_option("--model", sim_model, "checkpoint (default <data>/model.bin)");
  simulate->add_option("--out", sim_out, "output directory")->required();
  sim_ov.add<std::string>(simulate, "--strategy", "strategy", "bcie, mapped_items, direct or all")
      ->check(CLI::IsMember({"bcie", "mapped_items", "direct", "all"}));
  sim_ov.add<std::string>(simulate, "--mode", "mode", "diff or random")
      ->check(CLI::IsMember({"diff", "random"}));
  sim_ov.add<std::uint32_t>(simulate, "--runs", "runs", "independent runs");
  sim_ov.add<std::uint64_t>(simulate, "--seed", "seed", "simulation seed");
  sim_ov.add<std::uint32_t>(simulate, "--workers", "workers", "worker threads");
  sim_ov.add<std::size_t>(simulate, "--max-sessions", "max_sessions", "cap on sessions per run");
  sim_ov.add<std::string>(simulate, "--tune", "tune",
                          "precision grid on validation sessions: none, auto, narc or hit10")
      ->check(CLI::IsMember({"none", "auto", "narc", "hit10"}));
  add_session_flags(sim_ov, simulate, {"session"});

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP session service");
  Overlay serve_ov;
  std::string serve_data, serve_model, serve_host = "127.0.0.1", serve_ui;
  int serve_port = 8080;
  serve->add_option("--data", serve_data, "dataset directory")->required();
  serve->add_option("--model", serve_model, "checkpoint (default <data>/model.bin)");
  serve->add_option("--port", serve_port, "listening port (0 picks one)");
  serve->add_option("--host", serve_host, "listening address");
  serve->add_option("--ui", serve_ui, "static UI bundle directory");
  serve_ov.add<std::string>(serve, "--strategy", "strategy", "default strategy")
      ->check(CLI::IsMember({"bcie", "mapped_items", "direct"}));
  serve_ov.add<std::string>(serve, "--traces", "traces_dir", "where closed traces are written");
  serve_ov.add<std::int64_t>(serve, "--ttl", "ttl_seconds", "idle session lifetime");
  add_session_flags(serve_ov, serve, {"session"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*prepare) {
      json opts = load_config_section(config_path, "prepare");
      prep_ov.apply(opts);
      DatasetHandle ds;
      Owned info;
      const auto s = bcie_prepare(opts.dump().c_str(), prep_out.c_str(), &ds.p, &info.p);
      if (s != BCIE_OK) return report(s, "prepare");
      const auto j = json::parse(info.str());
      for (const auto& w : j["warnings"]) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
      std::cout << j["table"].get<std::string>();
      return 0;
    }

    if (*train) {
      json cfg = load_config_section(config_path, "train");
      train_ov.apply(cfg);
      DatasetHandle ds;
      if (auto s = bcie_dataset_load(train_data.c_str(), &ds.p); s != BCIE_OK)
        return report(s, "load dataset");
      auto on_epoch = [](const char* text, void* user) {
        if (*static_cast<bool*>(user)) return;
        const auto j = json::parse(text);
        if (j["valid_hit"].is_null()) return;
        std::printf("epoch %4u  loss %.6f  valid_hit %.4f\n", j["epoch"].get<unsigned>(),
                    j["loss"].get<double>(), j["valid_hit"].get<double>());
        std::fflush(stdout);
      };
      ModelHandle m;
      if (auto s = bcie_train(ds.p, cfg.dump().c_str(), on_epoch, &quiet, &m.p); s != BCIE_OK)
        return report(s, "train");
      const auto out = model_path(train_out, train_data);
      if (auto s = bcie_model_save(m.p, out.c_str()); s != BCIE_OK) return report(s, "save");
      Owned info;
      bcie_model_info(m.p, &info.p);
      const auto j = json::parse(info.str());
      std::printf("best epoch %u  valid_hit %s  -> %s\n", j["best_epoch"].get<unsigned>(),
                  j["best_valid_hit"].dump().c_str(), out.c_str());
      return 0;
    }

    if (*evaluate) {
      DatasetHandle ds;
      ModelHandle m;
      if (int rc = load_inputs(eval_data, model_path(eval_model, eval_data), ds, m)) return rc;
      Owned csv;
      if (auto s = bcie_evaluate(ds.p, m.p, eval_ks.data(), eval_ks.size(), &csv.p); s != BCIE_OK)
        return report(s, "evaluate");
      std::cout << csv.str();
      if (!eval_out.empty()) {
        std::ofstream out(eval_out, std::ios::binary);
        out << csv.str();
        if (!out) return report(BCIE_ERR_IO, "evaluate");
      }
      return 0;
    }

    if (*simulate) {
      json opts = load_config_section(config_path, "simulate");
      sim_ov.apply(opts);
      DatasetHandle ds;
      ModelHandle m;
      if (int rc = load_inputs(sim_data, model_path(sim_model, sim_data), ds, m)) return rc;
      Owned summary;
      if (auto s = bcie_simulate(ds.p, m.p, opts.dump().c_str(), sim_out.c_str(), &summary.p);
          s != BCIE_OK)
        return report(s, "simulate");
      std::cout << summary.str();
      return 0;
    }

    if (*serve) {
      json cfg = load_config_section(config_path, "serve");
      serve_ov.apply(cfg);
      DatasetHandle ds;
      ModelHandle m;
      if (int rc = load_inputs(serve_data, model_path(serve_model, serve_data), ds, m)) return rc;
      ServiceHandle svc;
      if (auto s = bcie_service_create(ds.p, m.p, cfg.dump().c_str(), &svc.p); s != BCIE_OK)
        return report(s, "serve");

      // Signals are taken synchronously by one thread; the server's worker
      // threads inherit the blocked mask.
      sigset_t sigs;
      sigemptyset(&sigs);
      sigaddset(&sigs, SIGTERM);
      sigaddset(&sigs, SIGINT);
      pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

      bcie_tools::FrontendOptions fo;
      fo.host = serve_host;
      fo.port = serve_port;
      if (!serve_ui.empty()) fo.ui_dir = serve_ui;
      bcie_tools::HttpFrontend frontend(svc.p, fo);
      if (!frontend.bind()) {
        std::fprintf(stderr, "bcie serve: cannot listen on %s:%d\n", serve_host.c_str(), serve_port);
        return 1;
      }
      std::printf("listening on http://%s:%d (%s)\n", serve_host.c_str(), frontend.port(),
                  frontend.ui_mounted() ? "UI mounted" : "API only");
      std::fflush(stdout);
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&sigs, &sig);
        frontend.stop();
      });
      frontend.run();
      // run() also returns on listener failure; wake the waiter in that case.
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
      std::printf("stopped\n");
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "bcie: %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "bcie: %s\n", e.what());
    return 1;
  }
  return 1;
}
