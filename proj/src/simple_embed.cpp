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


#include "bcie/simple_embed.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "bcie/error.hpp"

namespace bcie {

EmbeddingTable::EmbeddingTable(std::uint32_t entities, std::uint32_t relations,
                               std::uint32_t dim)
    : dim_(dim), entities_(entities), relations_(relations) {
  blocks_[0].assign(std::size_t(entities) * dim, 0.0);
  blocks_[1].assign(std::size_t(entities) * dim, 0.0);
  blocks_[2].assign(std::size_t(relations) * dim, 0.0);
  blocks_[3].assign(std::size_t(relations) * dim, 0.0);
}

std::span<double> EmbeddingTable::row(Block b, std::uint32_t index) {
  auto& m = blocks_[static_cast<int>(b)];
  return {m.data() + std::size_t(index) * dim_, dim_};
}

std::span<const double> EmbeddingTable::row(Block b, std::uint32_t index) const {
  const auto& m = blocks_[static_cast<int>(b)];
  return {m.data() + std::size_t(index) * dim_, dim_};
}

bool EmbeddingTable::all_finite() const {
  for (const auto& m : blocks_)
    for (double x : m)
      if (!std::isfinite(x)) return false;
  return true;
}

double EmbeddingTable::squared_norm() const {
  double s = 0.0;
  for (const auto& m : blocks_)
    for (double x : m) s += x * x;
  return s;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) fail(ErrorCode::kUsage, "lr must be positive");
  if (!(lambda >= 0.0)) fail(ErrorCode::kUsage, "lambda must be non-negative");
  if (neg_ratio < 1) fail(ErrorCode::kUsage, "neg_ratio must be at least 1");
  if (dim < 2) fail(ErrorCode::kUsage, "dim must be at least 2");
  if (batch_size < 1) fail(ErrorCode::kUsage, "batch_size must be at least 1");
  if (!(init_scale >= 0.0)) fail(ErrorCode::kUsage, "init_scale must be non-negative");
  if (hit_k < 1) fail(ErrorCode::kUsage, "hit_k must be at least 1");
}

double triple_product(std::span<const double> v, std::span<const double> w,
                      std::span<const double> x) {
  if (v.size() != w.size() || v.size() != x.size())
    fail(ErrorCode::kDimension, "triple_product: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += v[k] * w[k] * x[k];
  return s;
}

double score(const EmbeddingTable& emb, EntityId head, RelationId relation, EntityId tail) {
  if (head >= emb.entity_count() || tail >= emb.entity_count() ||
      relation >= emb.relation_count())
    fail(ErrorCode::kDimension, "score: id out of range");
  return 0.5 * (triple_product(emb.entity_head(head), emb.relation_fwd(relation),
                               emb.entity_tail(tail)) +
                triple_product(emb.entity_head(tail), emb.relation_inv(relation),
                               emb.entity_tail(head)));
}

namespace {

struct Namespace {
  EntityId begin;
  EntityId end;
  std::uint32_t size() const { return end - begin; }
};

Namespace namespace_of(const KnowledgeGraph& kg, EntityId e) {
  switch (kg.kind(e)) {
    case EntityKind::kUser: return {0, kg.item_begin()};
    case EntityKind::kItem: return {kg.item_begin(), kg.item_end()};
    case EntityKind::kEntity: break;
  }
  return {kg.item_end(), kg.entity_count()};
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::vector<Triple> negative_sample(const KnowledgeGraph& kg, const Triple& triple,
                                    std::size_t k, std::mt19937_64& rng) {
  if (k < 1) fail(ErrorCode::kUsage, "negative_sample: k must be at least 1");
  const Namespace head_ns = namespace_of(kg, triple.head);
  const Namespace tail_ns = namespace_of(kg, triple.tail);
  if (head_ns.size() < 2 && tail_ns.size() < 2)
    fail(ErrorCode::kData, "negative_sample: both namespaces hold a single entity");
  std::bernoulli_distribution coin(0.5);
  std::vector<Triple> out;
  out.reserve(k);
  for (std::size_t n = 0; n < k; ++n) {
    bool corrupt_head = coin(rng);
    if (corrupt_head && head_ns.size() < 2) corrupt_head = false;
    if (!corrupt_head && tail_ns.size() < 2) corrupt_head = true;
    const Namespace ns = corrupt_head ? head_ns : tail_ns;
    const EntityId original = corrupt_head ? triple.head : triple.tail;
    // Draw from the namespace minus the original entity.
    std::uniform_int_distribution<EntityId> pick(ns.begin, ns.end - 2);
    EntityId e = pick(rng);
    if (e >= original) ++e;
    Triple t = triple;
    (corrupt_head ? t.head : t.tail) = e;
    out.push_back(t);
  }
  return out;
}

double batch_objective(const EmbeddingTable& emb, std::span<const LabeledTriple> batch,
                       Likelihood likelihood, double lambda, EmbeddingTable* grad) {
  using B = EmbeddingTable::Block;
  const std::uint32_t d = emb.dim();
  double total = 0.0;
  std::vector<double> scratch(std::size_t(6) * d);
  for (const auto& lt : batch) {
    const auto& t = lt.triple;
    auto hh = emb.entity_head(t.head);
    auto ht = emb.entity_tail(t.head);
    auto th = emb.entity_head(t.tail);
    auto tt = emb.entity_tail(t.tail);
    auto vf = emb.relation_fwd(t.relation);
    auto vi = emb.relation_inv(t.relation);

    const double phi = 0.5 * (triple_product(hh, vf, tt) + triple_product(th, vi, ht));
    const double y = lt.label;
    double loss = 0.0;
    double dphi = 0.0;
    if (likelihood == Likelihood::kLogistic) {
      loss = softplus(-y * phi);
      dphi = -y * sigmoid(-y * phi);
    } else {
      loss = 0.5 * (y - phi) * (y - phi);
      dphi = phi - y;
    }
    double reg = 0.0;
    for (auto row : {hh, ht, th, tt, vf, vi})
      for (double x : row) reg += x * x;
    total += loss + lambda * reg;
    if (grad == nullptr) continue;

    // Gradients are formed from the unmodified rows first: head and tail may
    // be the same entity.
    double* g_hh = scratch.data();
    double* g_ht = g_hh + d;
    double* g_th = g_ht + d;
    double* g_tt = g_th + d;
    double* g_vf = g_tt + d;
    double* g_vi = g_vf + d;
    const double c = 0.5 * dphi;
    const double r2 = 2.0 * lambda;
    for (std::uint32_t k = 0; k < d; ++k) {
      g_hh[k] = c * vf[k] * tt[k] + r2 * hh[k];
      g_tt[k] = c * hh[k] * vf[k] + r2 * tt[k];
      g_vf[k] = c * hh[k] * tt[k] + r2 * vf[k];
      g_th[k] = c * vi[k] * ht[k] + r2 * th[k];
      g_ht[k] = c * th[k] * vi[k] + r2 * ht[k];
      g_vi[k] = c * th[k] * ht[k] + r2 * vi[k];
    }
    auto add = [d](std::span<double> dst, const double* src) {
      for (std::uint32_t k = 0; k < d; ++k) dst[k] += src[k];
    };
    add(grad->row(B::kEntityHead, t.head), g_hh);
    add(grad->row(B::kEntityTail, t.head), g_ht);
    add(grad->row(B::kEntityHead, t.tail), g_th);
    add(grad->row(B::kEntityTail, t.tail), g_tt);
    add(grad->row(B::kRelationFwd, t.relation), g_vf);
    add(grad->row(B::kRelationInv, t.relation), g_vi);
  }
  return total;
}

EmbeddingTable init_embeddings(std::uint32_t entities, std::uint32_t relations,
                               std::uint32_t dim, double init_scale, std::mt19937_64& rng) {
  EmbeddingTable emb(entities, relations, dim);
  std::uniform_real_distribution<double> u(-init_scale, init_scale);
  for (auto b : {EmbeddingTable::Block::kEntityHead, EmbeddingTable::Block::kEntityTail,
                 EmbeddingTable::Block::kRelationFwd, EmbeddingTable::Block::kRelationInv})
    for (double& x : emb.block(b)) x = init_scale > 0 ? u(rng) : 0.0;
  return emb;
}

std::vector<std::vector<EntityId>> liked_items(const KnowledgeGraph& kg,
                                               std::span<const Triple> triples) {
  std::vector<std::vector<EntityId>> out(kg.user_count());
  for (const auto& t : triples)
    if (t.relation == kg.likes_relation()) out[t.head].push_back(t.tail);
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

namespace {

// Per-item weights such that score(user, likes, i) = a . tail_i + b . head_i.
void user_weights(const EmbeddingTable& emb, RelationId likes, std::span<const double> mean,
                  std::vector<double>& a, std::vector<double>& b) {
  const auto d = emb.dim();
  auto vf = emb.relation_fwd(likes);
  auto vi = emb.relation_inv(likes);
  a.resize(d);
  b.resize(d);
  for (std::uint32_t k = 0; k < d; ++k) {
    a[k] = 0.5 * vf[k] * mean[k];
    b[k] = 0.5 * vi[k] * mean[d + k];
  }
}

double item_score(const EmbeddingTable& emb, EntityId item, const std::vector<double>& a,
                  const std::vector<double>& b) {
  auto ti = emb.entity_tail(item);
  auto hi = emb.entity_head(item);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * ti[k];
  for (std::size_t k = 0; k < b.size(); ++k) s += b[k] * hi[k];
  return s;
}

std::vector<EntityId> sort_scored(std::vector<std::pair<double, EntityId>>& scored) {
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<EntityId> out;
  out.reserve(scored.size());
  for (const auto& [s, id] : scored) out.push_back(id);
  return out;
}

std::vector<EntityId> remaining(std::span<const EntityId> candidates,
                                std::span<const EntityId> exclude) {
  if (candidates.empty()) fail(ErrorCode::kUsage, "rank_items: no candidates");
  std::vector<EntityId> ex(exclude.begin(), exclude.end());
  std::sort(ex.begin(), ex.end());
  std::vector<EntityId> out;
  out.reserve(candidates.size());
  for (auto c : candidates)
    if (!std::binary_search(ex.begin(), ex.end(), c)) out.push_back(c);
  if (out.empty()) fail(ErrorCode::kData, "rank_items: every candidate is excluded");
  return out;
}

}  // namespace

std::vector<EntityId> rank_items(const EmbeddingTable& emb, EntityId user, RelationId likes,
                                 std::span<const EntityId> candidates,
                                 std::span<const EntityId> exclude) {
  // Scores through the stored [head ; tail] rows so that the ranking is
  // bit-identical to rank_items_from_mean on the same vector.
  const auto d = emb.dim();
  std::vector<double> mean(2 * std::size_t(d));
  auto h = emb.entity_head(user);
  auto t = emb.entity_tail(user);
  std::copy(h.begin(), h.end(), mean.begin());
  std::copy(t.begin(), t.end(), mean.begin() + d);
  return rank_items_from_mean(emb, likes, mean, candidates, exclude);
}

std::vector<EntityId> rank_items_from_mean(const EmbeddingTable& emb, RelationId likes,
                                           std::span<const double> user_mean,
                                           std::span<const EntityId> candidates,
                                           std::span<const EntityId> exclude) {
  if (user_mean.size() != 2 * std::size_t(emb.dim()))
    fail(ErrorCode::kDimension, "rank_items_from_mean: mean must have length 2d");
  std::vector<double> a, b;
  user_weights(emb, likes, user_mean, a, b);
  std::vector<std::pair<double, EntityId>> scored;
  for (auto item : remaining(candidates, exclude))
    scored.emplace_back(item_score(emb, item, a, b), item);
  return sort_scored(scored);
}

double link_prediction_hit_rate(const EmbeddingTable& emb, const KnowledgeGraph& kg,
                                const std::vector<std::vector<EntityId>>& known,
                                std::span<const Triple> eval, std::uint32_t k) {
  const auto d = emb.dim();
  std::vector<double> mean(2 * std::size_t(d)), a, b, scores(kg.item_count());
  std::size_t hits = 0, total = 0;
  EntityId cached_user = static_cast<EntityId>(-1);
  for (const auto& t : eval) {
    if (t.relation != kg.likes_relation()) continue;
    if (t.head != cached_user) {
      cached_user = t.head;
      auto h = emb.entity_head(t.head);
      auto tl = emb.entity_tail(t.head);
      std::copy(h.begin(), h.end(), mean.begin());
      std::copy(tl.begin(), tl.end(), mean.begin() + d);
      user_weights(emb, kg.likes_relation(), mean, a, b);
      for (EntityId i = kg.item_begin(); i < kg.item_end(); ++i)
        scores[i - kg.item_begin()] = item_score(emb, i, a, b);
    }
    const auto& excluded = known[t.head];
    const double gt = scores[t.tail - kg.item_begin()];
    std::size_t better = 0;
    for (EntityId i = kg.item_begin(); i < kg.item_end() && better < k; ++i) {
      if (i == t.tail || std::binary_search(excluded.begin(), excluded.end(), i)) continue;
      const double s = scores[i - kg.item_begin()];
      better += s > gt || (s == gt && i < t.tail);
    }
    hits += better < k;
    ++total;
  }
  return total == 0 ? 0.0 : double(hits) / double(total);
}

double popularity_hit_rate(const KnowledgeGraph& kg, std::span<const Triple> train,
                           std::span<const Triple> eval, std::uint32_t k) {
  std::vector<double> count(kg.item_count(), 0.0);
  for (const auto& t : train)
    if (t.relation == kg.likes_relation()) count[t.tail - kg.item_begin()] += 1.0;
  auto known = liked_items(kg, train);
  std::size_t hits = 0, total = 0;
  for (const auto& t : eval) {
    if (t.relation != kg.likes_relation()) continue;
    const auto& excluded = known[t.head];
    const double gt = count[t.tail - kg.item_begin()];
    std::size_t better = 0;
    for (EntityId i = kg.item_begin(); i < kg.item_end() && better < k; ++i) {
      if (i == t.tail || std::binary_search(excluded.begin(), excluded.end(), i)) continue;
      const double s = count[i - kg.item_begin()];
      better += s > gt || (s == gt && i < t.tail);
    }
    hits += better < k;
    ++total;
  }
  return total == 0 ? 0.0 : double(hits) / double(total);
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const auto& kg = ds.kg;
  const auto& positives = ds.split.train;
  if (positives.empty()) fail(ErrorCode::kData, "train split is empty");

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  EmbeddingTable emb =
      init_embeddings(kg.entity_count(), kg.relation_count(), cfg.dim, cfg.init_scale, rng);
  const auto known = liked_items(kg, positives);
  const bool has_valid = std::any_of(ds.split.validation.begin(), ds.split.validation.end(),
                                     [&](const Triple& t) { return t.relation == kg.likes_relation(); });

  result.table = emb;
  if (has_valid)
    result.best_valid_hit = link_prediction_hit_rate(emb, kg, known, ds.split.validation, cfg.hit_k);

  EmbeddingTable grad(emb.entity_count(), emb.relation_count(), emb.dim());
  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledTriple> batch;
  using B = EmbeddingTable::Block;

  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t n = start; n < stop; ++n) {
        const Triple& pos = positives[order[n]];
        batch.push_back({pos, 1.0});
        for (const auto& neg : negative_sample(kg, pos, cfg.neg_ratio, rng))
          batch.push_back({neg, -1.0});
      }
      const double loss = batch_objective(emb, batch, cfg.likelihood, cfg.lambda, &grad);
      if (!std::isfinite(loss))
        fail(ErrorCode::kNumerical, "non-finite loss at epoch " + std::to_string(epoch) +
                                        " (lr " + std::to_string(cfg.lr) + " may be too high)");
      epoch_loss += loss;
      ++batches;
      // Apply and clear the gradient on the rows this batch touched.
      auto step = [&](B block, std::uint32_t index) {
        auto g = grad.row(block, index);
        auto w = emb.row(block, index);
        for (std::uint32_t k = 0; k < emb.dim(); ++k) {
          w[k] -= cfg.lr * g[k];
          g[k] = 0.0;
        }
      };
      for (const auto& lt : batch) {
        step(B::kEntityHead, lt.triple.head);
        step(B::kEntityTail, lt.triple.head);
        step(B::kEntityHead, lt.triple.tail);
        step(B::kEntityTail, lt.triple.tail);
        step(B::kRelationFwd, lt.triple.relation);
        step(B::kRelationInv, lt.triple.relation);
      }
    }
    if (!emb.all_finite())
      fail(ErrorCode::kNumerical, "parameters diverged at epoch " + std::to_string(epoch));

    EpochLog log{epoch, epoch_loss / double(std::max<std::size_t>(batches, 1)), -1.0};
    const bool evaluate = has_valid && (epoch % std::max<std::uint32_t>(cfg.eval_every, 1) == 0 ||
                                        epoch == cfg.epochs);
    if (evaluate) {
      log.valid_hit = link_prediction_hit_rate(emb, kg, known, ds.split.validation, cfg.hit_k);
      if (log.valid_hit > result.best_valid_hit) {
        result.best_valid_hit = log.valid_hit;
        result.best_epoch = epoch;
        result.table = emb;
      }
    } else if (!has_valid) {
      result.best_epoch = epoch;
      result.table = emb;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

namespace {

constexpr char kMagic[8] = {'B', 'C', 'I', 'E', 'E', 'M', 'B', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes;
  for (int k = 0; k < 4; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(bytes.data(), 4);
}

void put_f64(std::ostream& out, double x) {
  auto v = std::bit_cast<std::uint64_t>(x);
  std::array<char, 8> bytes;
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(bytes.data(), 8);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= std::uint32_t(bytes[k]) << (8 * k);
  return v;
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= std::uint64_t(bytes[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

constexpr EmbeddingTable::Block kBlockOrder[] = {
    EmbeddingTable::Block::kEntityHead, EmbeddingTable::Block::kEntityTail,
    EmbeddingTable::Block::kRelationFwd, EmbeddingTable::Block::kRelationInv};

}  // namespace

void save_checkpoint(const EmbeddingTable& emb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, emb.dim());
  put_u32(out, emb.entity_count());
  put_u32(out, emb.relation_count());
  for (auto b : kBlockOrder)
    for (double x : emb.block(b)) put_f64(out, x);
  if (!out) fail(ErrorCode::kIo, "write failed for checkpoint " + path.string());
}

EmbeddingTable load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    fail(ErrorCode::kData, path.string() + ": not a BCIE checkpoint");
  if (get_u32(in) != kCheckpointVersion)
    fail(ErrorCode::kData, path.string() + ": unsupported checkpoint version");
  const auto dim = get_u32(in);
  const auto entities = get_u32(in);
  const auto relations = get_u32(in);
  if (!in || dim == 0) fail(ErrorCode::kData, path.string() + ": truncated header");
  EmbeddingTable emb(entities, relations, dim);
  for (auto b : kBlockOrder)
    for (double& x : emb.block(b)) x = get_f64(in);
  if (!in) fail(ErrorCode::kData, path.string() + ": truncated checkpoint");
  if (!emb.all_finite()) fail(ErrorCode::kNumerical, path.string() + ": non-finite parameters");
  return emb;
}

}  // namespace bcie
