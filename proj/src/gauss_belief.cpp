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


#include "bcie/gauss_belief.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "bcie/error.hpp"

namespace bcie {

std::string fact_id(const CritiqueFact& f) {
  return std::to_string(f.relation) + ":" + std::to_string(f.anchor) + ":" +
         (f.item_side == ItemSide::kHead ? "h" : "t");
}

std::optional<CritiqueFact> parse_fact_id(const std::string& id) {
  unsigned long rel = 0, anchor = 0;
  char side = 0;
  int consumed = 0;
  if (std::sscanf(id.c_str(), "%lu:%lu:%c%n", &rel, &anchor, &side, &consumed) != 3 ||
      consumed != static_cast<int>(id.size()) || (side != 'h' && side != 't'))
    return std::nullopt;
  CritiqueFact f;
  f.relation = static_cast<RelationId>(rel);
  f.anchor = static_cast<EntityId>(anchor);
  f.item_side = side == 'h' ? ItemSide::kHead : ItemSide::kTail;
  return f;
}

std::vector<double> user_space_layout(const EmbeddingTable& emb, EntityId user) {
  auto h = emb.entity_head(user);
  auto t = emb.entity_tail(user);
  std::vector<double> z(h.begin(), h.end());
  z.insert(z.end(), t.begin(), t.end());
  return z;
}

std::vector<double> item_space_layout(const EmbeddingTable& emb, EntityId item) {
  auto t = emb.entity_tail(item);
  auto h = emb.entity_head(item);
  std::vector<double> z(t.begin(), t.end());
  z.insert(z.end(), h.begin(), h.end());
  return z;
}

GaussianBelief belief_from_mean(std::span<const double> mean, double precision) {
  if (!(precision > 0.0)) fail(ErrorCode::kUsage, "precision must be positive");
  GaussianBelief b;
  b.J.assign(mean.size(), precision);
  b.h.resize(mean.size());
  for (std::size_t k = 0; k < mean.size(); ++k) b.h[k] = precision * mean[k];
  return b;
}

GaussianBelief init_user_belief(const EmbeddingTable& emb, EntityId user, double j0) {
  if (!(j0 > 0.0)) fail(ErrorCode::kUsage, "j0 must be positive");
  return belief_from_mean(user_space_layout(emb, user), j0);
}

RelationDiagonal relation_diagonal(const EmbeddingTable& emb, RelationId likes,
                                   CouplingSign sign) {
  const double s = sign == CouplingSign::kPaper ? 0.5 : -0.5;
  auto vf = emb.relation_fwd(likes);
  auto vi = emb.relation_inv(likes);
  RelationDiagonal dr;
  dr.diag.reserve(2 * vf.size());
  for (double x : vf) dr.diag.push_back(s * x);
  for (double x : vi) dr.diag.push_back(s * x);
  return dr;
}

double mean_item_norm(const EmbeddingTable& emb, std::span<const EntityId> items) {
  if (items.empty()) return 0.0;
  double total = 0.0;
  for (auto i : items) {
    double sq = 0.0;
    for (double x : emb.entity_tail(i)) sq += x * x;
    for (double x : emb.entity_head(i)) sq += x * x;
    total += std::sqrt(sq);
  }
  return total / double(items.size());
}

std::optional<GaussianBelief> evidence_from_critique(const EmbeddingTable& emb,
                                                     const CritiqueFact& fact, double alpha,
                                                     double magnitude) {
  if (!(alpha > 0.0)) fail(ErrorCode::kUsage, "alpha must be positive");
  if (!(magnitude > 0.0)) fail(ErrorCode::kUsage, "evidence magnitude must be positive");
  const auto d = emb.dim();
  auto vf = emb.relation_fwd(fact.relation);
  auto vi = emb.relation_inv(fact.relation);
  auto ha = emb.entity_head(fact.anchor);
  auto ta = emb.entity_tail(fact.anchor);
  // Gradient of the fact's score with respect to [tail_i ; head_i].
  std::vector<double> g(2 * std::size_t(d));
  for (std::uint32_t k = 0; k < d; ++k) {
    if (fact.item_side == ItemSide::kHead) {
      g[k] = 0.5 * vi[k] * ha[k];
      g[d + k] = 0.5 * vf[k] * ta[k];
    } else {
      g[k] = 0.5 * vf[k] * ha[k];
      g[d + k] = 0.5 * vi[k] * ta[k];
    }
  }
  double norm = 0.0;
  for (double x : g) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) return std::nullopt;
  for (double& x : g) x *= magnitude / norm;
  return belief_from_mean(g, alpha);
}

GaussianBelief item_prior(const EmbeddingTable& emb, std::span<const EntityId> top_items,
                          double j_m) {
  if (top_items.empty()) fail(ErrorCode::kUsage, "item_prior: no items");
  std::vector<double> mean(2 * std::size_t(emb.dim()), 0.0);
  for (auto i : top_items) {
    auto z = item_space_layout(emb, i);
    for (std::size_t k = 0; k < z.size(); ++k) mean[k] += z[k];
  }
  for (double& x : mean) x /= double(top_items.size());
  return belief_from_mean(mean, j_m);
}

GaussianBelief item_posterior(const GaussianBelief& prior, const GaussianBelief& evidence) {
  if (prior.size() != evidence.size() || prior.J.size() != evidence.J.size())
    fail(ErrorCode::kDimension, "item_posterior: dimension mismatch");
  GaussianBelief post;
  post.h.resize(prior.size());
  post.J.resize(prior.size());
  for (std::size_t k = 0; k < prior.size(); ++k) {
    post.h[k] = prior.h[k] + evidence.h[k];
    post.J[k] = prior.J[k] + evidence.J[k];
  }
  return post;
}

GaussianBelief marginal_user_update(const GaussianBelief& user, const GaussianBelief& item_post,
                                    const RelationDiagonal& dr, double eps) {
  const auto n = user.size();
  if (item_post.size() != n || dr.diag.size() != n || user.J.size() != n)
    fail(ErrorCode::kDimension, "marginal_user_update: dimension mismatch");
  GaussianBelief out;
  out.h.resize(n);
  out.J.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double jz = item_post.J[k];
    if (!(jz > 0.0))
      fail(ErrorCode::kNumerical, "item precision not positive at index " + std::to_string(k));
    const double c = dr.diag[k];
    out.h[k] = user.h[k] - c * (item_post.h[k] / jz);
    out.J[k] = std::max(user.J[k] - c * c / jz, eps);
    if (!std::isfinite(out.h[k]) || !std::isfinite(out.J[k]))
      fail(ErrorCode::kNumerical, "non-finite belief at index " + std::to_string(k));
  }
  return out;
}

std::vector<double> posterior_mean(const GaussianBelief& b) {
  std::vector<double> mean(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) mean[k] = b.h[k] / b.J[k];
  return mean;
}

std::string format_belief(const GaussianBelief& b) {
  std::string out;
  char buf[32];
  auto line = [&](const char* tag, const std::vector<double>& v) {
    out += tag;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out += buf;
    }
    out += '\n';
  };
  line("h", b.h);
  line("J", b.J);
  return out;
}

GaussianBelief parse_belief(const std::string& text) {
  GaussianBelief b;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    std::vector<double>* dst = tag == "h" ? &b.h : tag == "J" ? &b.J : nullptr;
    if (dst == nullptr) {
      if (tag.empty()) continue;
      fail(ErrorCode::kData, "belief snapshot: unexpected tag '" + tag + "'");
    }
    double x;
    while (fields >> x) dst->push_back(x);
  }
  if (b.h.size() != b.J.size()) fail(ErrorCode::kData, "belief snapshot: h/J length mismatch");
  return b;
}

}  // namespace bcie
