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


#ifndef BCIE_GAUSS_BELIEF_HPP
#define BCIE_GAUSS_BELIEF_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcie/critique_fact.hpp"
#include "bcie/simple_embed.hpp"

namespace bcie {

// Information-form Gaussian with diagonal precision over a 2d latent space.
//
// User-space vectors are laid out as [head ; tail] of the user entity and
// item-space vectors as [tail ; head] of the item, so that with
// diag = 1/2 [v_fwd ; v_inv] of the likes relation
//
//   z_u^T diag(diag) z_i == score(u, likes, i).
struct GaussianBelief {
  std::vector<double> h;  // potential, J * mean
  std::vector<double> J;  // diagonal precision, strictly positive

  std::size_t size() const { return h.size(); }
  friend bool operator==(const GaussianBelief&, const GaussianBelief&) = default;
};

struct RelationDiagonal {
  std::vector<double> diag;
};

// `compat` couples user and item so that high scores are rewarded; `paper`
// keeps the literal cross-term sign.
enum class CouplingSign { kPaper, kCompat };



std::vector<double> user_space_layout(const EmbeddingTable& emb, EntityId user);
std::vector<double> item_space_layout(const EmbeddingTable& emb, EntityId item);

GaussianBelief init_user_belief(const EmbeddingTable& emb, EntityId user, double j0);
GaussianBelief belief_from_mean(std::span<const double> mean, double precision);

RelationDiagonal relation_diagonal(const EmbeddingTable& emb, RelationId likes,
                                   CouplingSign sign = CouplingSign::kCompat);

// Mean L2 norm of the item-space layouts of `items`.
double mean_item_norm(const EmbeddingTable& emb, std::span<const EntityId> items);

// Direction in item space along which the critiqued fact's score grows
// fastest, rescaled to length `magnitude`, with precision alpha on every
// coordinate. nullopt when the direction is the zero vector.
std::optional<GaussianBelief> evidence_from_critique(const EmbeddingTable& emb,
                                                     const CritiqueFact& fact, double alpha,
                                                     double magnitude);

GaussianBelief item_prior(const EmbeddingTable& emb, std::span<const EntityId> top_items,
                          double j_m);

// h = h_m + h_d, J = J_m + J_d.
GaussianBelief item_posterior(const GaussianBelief& prior, const GaussianBelief& evidence);

// Marginalizes the item variable out of the joint with cross precision
// diag(dr):  h_u - dr * h_z / J_z,  max(J_u - dr^2 / J_z, eps).
GaussianBelief marginal_user_update(const GaussianBelief& user, const GaussianBelief& item_post,
                                    const RelationDiagonal& dr, double eps = 1e-6);

std::vector<double> posterior_mean(const GaussianBelief& b);

// Two lines, "h <values>" and "J <values>", 17 significant digits.
std::string format_belief(const GaussianBelief& b);
GaussianBelief parse_belief(const std::string& text);

}  // namespace bcie

#endif  // BCIE_GAUSS_BELIEF_HPP
