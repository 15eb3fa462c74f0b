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


#include "doctest.h"
#include "support.hpp"
#include "bcie/error.hpp"

using namespace bcie;

namespace {

using B = EmbeddingTable::Block;

GaussianBelief belief(std::vector<double> h, std::vector<double> J) { return {std::move(h), std::move(J)}; }

double bilinear(const std::vector<double>& zu, const RelationDiagonal& d,
                const std::vector<double>& zi) {
  double s = 0.0;
  for (std::size_t k = 0; k < zu.size(); ++k) s += zu[k] * d.diag[k] * zi[k];
  return s;
}

}  // namespace

TEST_SUITE("gauss_belief") {

TEST_CASE("bilinear rewrite by hand") {
  EmbeddingTable e(2, 1, 1);
  e.entity_head(0)[0] = 2;
  e.entity_tail(0)[0] = 3;
  e.relation_fwd(0)[0] = 1;
  e.relation_inv(0)[0] = 1;
  e.entity_tail(1)[0] = 5;
  e.entity_head(1)[0] = 7;
  const auto d = relation_diagonal(e, 0, CouplingSign::kPaper);
  CHECK(bilinear(user_space_layout(e, 0), d, item_space_layout(e, 1)) == 15.5);
  CHECK(score(e, 0, 0, 1) == 15.5);

  e.relation_fwd(0)[0] = 0;
  e.relation_inv(0)[0] = 0;
  CHECK(bilinear(user_space_layout(e, 0), relation_diagonal(e, 0, CouplingSign::kPaper),
                 item_space_layout(e, 1)) == 0.0);
}

TEST_CASE("bilinear rewrite on random draws") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    auto e = test::random_table(3, 2, 8, rng);
    const auto d = relation_diagonal(e, 1, CouplingSign::kPaper);
    const double lhs = bilinear(user_space_layout(e, 0), d, item_space_layout(e, 2));
    CHECK(std::abs(lhs - test::oracle_score(e, 0, 1, 2)) <= 1e-12);
  }
}

TEST_CASE("init_user_belief is information form of the layout") {
  EmbeddingTable e(1, 1, 1);
  e.entity_head(0)[0] = 1;
  e.entity_tail(0)[0] = 2;
  auto b1 = init_user_belief(e, 0, 1.0);
  CHECK(b1.h == std::vector<double>{1, 2});
  CHECK(b1.J == std::vector<double>{1, 1});
  CHECK(posterior_mean(b1) == std::vector<double>{1, 2});
  auto b4 = init_user_belief(e, 0, 4.0);
  CHECK(b4.h == std::vector<double>{4, 8});
  CHECK(posterior_mean(b4) == std::vector<double>{1, 2});
  CHECK_THROWS_AS(init_user_belief(e, 0, 0.0), Error);

  std::mt19937_64 rng(4);
  auto r = test::random_table(2, 1, 6, rng);
  for (double j0 : {0.25, 1.0, 8.0})  // powers of two keep the round trip exact
    CHECK(posterior_mean(init_user_belief(r, 1, j0)) == user_space_layout(r, 1));
}

TEST_CASE("relation diagonal scaling and sign") {
  EmbeddingTable e(1, 1, 1);
  e.relation_fwd(0)[0] = 2;
  e.relation_inv(0)[0] = 4;
  CHECK(relation_diagonal(e, 0, CouplingSign::kPaper).diag == std::vector<double>{1, 2});
  CHECK(relation_diagonal(e, 0, CouplingSign::kCompat).diag == std::vector<double>{-1, -2});
}

TEST_CASE("evidence by hand") {
  // Item at the tail of (anchor, r, item): g = 1/2 [v_fwd * h_anchor ; v_inv * t_anchor].
  EmbeddingTable e(2, 1, 1);
  e.relation_fwd(0)[0] = 1;
  e.relation_inv(0)[0] = 1;
  e.entity_head(0)[0] = 2;
  e.entity_tail(0)[0] = 3;
  CritiqueFact f{0, 0, ItemSide::kTail, std::nullopt};
  const double norm_g = 0.5 * std::sqrt(13.0);
  auto ev = evidence_from_critique(e, f, 3.0, norm_g);
  REQUIRE(ev);
  auto mu = posterior_mean(*ev);
  CHECK(mu[0] == doctest::Approx(1.0));
  CHECK(mu[1] == doctest::Approx(1.5));
  CHECK(ev->h[0] == doctest::Approx(3.0));
  CHECK(ev->h[1] == doctest::Approx(4.5));
  CHECK(ev->J == std::vector<double>{3.0, 3.0});

  // The evidence direction is the gradient of the fact's score with respect
  // to the item layout, checked against finite differences of score().
  std::mt19937_64 rng(12);
  for (auto side : {ItemSide::kHead, ItemSide::kTail}) {
    auto r = test::random_table(3, 2, 3, rng);
    CritiqueFact fact{1, 2, side, std::nullopt};
    auto g = evidence_from_critique(r, fact, 1.0, 1.0);
    REQUIRE(g);
    auto dir = posterior_mean(*g);
    std::vector<double> fd;
    const double step = 1e-6;
    for (auto blk : {B::kEntityTail, B::kEntityHead}) {
      for (std::uint32_t k = 0; k < 3; ++k) {
        auto probe = r;
        auto eval = [&](double delta) {
          probe.row(blk, 0)[k] = r.row(blk, 0)[k] + delta;
          const auto t = fact.instantiate(0);
          return test::oracle_score(probe, t.head, t.relation, t.tail);
        };
        fd.push_back((eval(step) - eval(-step)) / (2 * step));
      }
    }
    double n = 0.0;
    for (double x : fd) n += x * x;
    n = std::sqrt(n);
    for (std::size_t k = 0; k < fd.size(); ++k)
      CHECK(dir[k] == doctest::Approx(fd[k] / n).epsilon(1e-6));
  }
}

TEST_CASE("zero evidence direction yields nothing") {
  EmbeddingTable e(2, 1, 2);
  CritiqueFact f{0, 1, ItemSide::kHead, std::nullopt};
  CHECK_FALSE(evidence_from_critique(e, f, 1.0, 1.0).has_value());
}

TEST_CASE("item prior is the centroid") {
  EmbeddingTable e(3, 1, 1);
  e.entity_tail(1)[0] = 0;
  e.entity_head(1)[0] = 0;
  e.entity_tail(2)[0] = 2;
  e.entity_head(2)[0] = 2;
  const std::vector<EntityId> one{2}, two{1, 2}, swapped{2, 1};
  CHECK(posterior_mean(item_prior(e, one, 2.0)) == item_space_layout(e, 2));
  CHECK(posterior_mean(item_prior(e, two, 2.0)) == std::vector<double>{1, 1});
  CHECK(item_prior(e, two, 3.0) == item_prior(e, swapped, 3.0));
  CHECK(item_prior(e, two, 3.0).J == std::vector<double>{3, 3});
}

TEST_CASE("item posterior adds potentials and precisions") {
  auto m = belief({1, 1}, {2, 2});
  auto d = belief({0.5, -0.5}, {1, 1});
  auto p = item_posterior(m, d);
  CHECK(p.h == std::vector<double>{1.5, 0.5});
  CHECK(p.J == std::vector<double>{3, 3});
  CHECK(item_posterior(m, d) == item_posterior(d, m));
  auto tiny = belief({1e-300, 1e-300}, {1e-300, 1e-300});
  auto same = item_posterior(m, tiny);
  CHECK(same == m);
  CHECK_THROWS_AS(item_posterior(m, belief({1}, {1})), Error);

  // Bit-level: the result is exactly the IEEE sum of the operands.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 200; ++rep) {
    auto a = belief({n(rng), n(rng), n(rng)}, {std::abs(n(rng)), std::abs(n(rng)), std::abs(n(rng))});
    auto b = belief({n(rng), n(rng), n(rng)}, {std::abs(n(rng)), std::abs(n(rng)), std::abs(n(rng))});
    auto c = item_posterior(a, b);
    for (std::size_t k = 0; k < 3; ++k) {
      const double hs = a.h[k] + b.h[k];
      const double js = a.J[k] + b.J[k];
      CHECK(std::memcmp(&c.h[k], &hs, sizeof hs) == 0);
      CHECK(std::memcmp(&c.J[k], &js, sizeof js) == 0);
    }
  }
}

TEST_CASE("marginal update by hand") {
  auto u = belief({2}, {4});
  auto z = belief({1}, {2});
  auto out = marginal_user_update(u, z, RelationDiagonal{{1}}, 1e-6);
  CHECK(out.h[0] == 1.5);
  CHECK(out.J[0] == 3.5);

  CHECK(marginal_user_update(u, z, RelationDiagonal{{0}}, 1e-6) == u);

  auto clamped = marginal_user_update(belief({1}, {1}), belief({1}, {1}), RelationDiagonal{{2}}, 1e-6);
  CHECK(clamped.J[0] == 1e-6);

  CHECK_THROWS_AS(marginal_user_update(u, belief({1}, {0}), RelationDiagonal{{1}}, 1e-6), Error);
  CHECK_THROWS_AS(marginal_user_update(u, belief({1, 1}, {1, 1}), RelationDiagonal{{1}}, 1e-6),
                  Error);
}

TEST_CASE("marginal update matches the dense covariance-form oracle") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> pos(0.5, 3.0);
  for (std::size_t d : {2u, 8u}) {
    for (int rep = 0; rep < 100; ++rep) {
      GaussianBelief u, z;
      RelationDiagonal dr;
      for (std::size_t k = 0; k < d; ++k) {
        u.h.push_back(n(rng));
        u.J.push_back(pos(rng));
        z.h.push_back(n(rng));
        z.J.push_back(pos(rng));
        // Keep the joint positive definite: dr^2 < J_u J_z / 2.
        dr.diag.push_back(n(rng) * std::sqrt(u.J.back() * z.J.back() / 2) / 3);
      }
      auto got = marginal_user_update(u, z, dr, 1e-12);
      auto want = test::oracle_marginal(u, z, dr.diag);
      for (std::size_t k = 0; k < d; ++k) {
        CHECK(std::abs(got.h[k] - want.h(k)) <= 1e-10);
        for (std::size_t l = 0; l < d; ++l)
          CHECK(std::abs((k == l ? got.J[k] : 0.0) - want.J(k, l)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("two chained updates match two chained dense marginals") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> pos(2.0, 4.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = 4;
    GaussianBelief u, z1, z2;
    RelationDiagonal dr;
    for (std::size_t k = 0; k < d; ++k) {
      u.h.push_back(n(rng));
      u.J.push_back(pos(rng));
      z1.h.push_back(n(rng));
      z1.J.push_back(pos(rng));
      z2.h.push_back(n(rng));
      z2.J.push_back(pos(rng));
      dr.diag.push_back(0.4 * n(rng));
    }
    auto step1 = marginal_user_update(u, z1, dr, 1e-12);
    auto step2 = marginal_user_update(step1, z2, dr, 1e-12);
    auto o1 = test::oracle_marginal(u, z1, dr.diag);
    GaussianBelief mid;
    for (std::size_t k = 0; k < d; ++k) {
      mid.h.push_back(o1.h(k));
      mid.J.push_back(o1.J(k, k));
    }
    auto o2 = test::oracle_marginal(mid, z2, dr.diag);
    for (std::size_t k = 0; k < d; ++k) {
      CHECK(std::abs(step2.h[k] - o2.h(k)) <= 1e-10);
      CHECK(std::abs(step2.J[k] - o2.J(k, k)) <= 1e-10);
    }
  }
}

TEST_CASE("posterior mean and snapshots") {
  CHECK(posterior_mean(belief({3}, {3})) == std::vector<double>{1});
  CHECK(posterior_mean(belief({0, 0}, {2, 5})) == std::vector<double>{0, 0});
  auto b = belief({0.1, -2.5e-300, 1.0 / 3.0}, {1e-6, 7.0, 2.0 / 7.0});
  CHECK(parse_belief(format_belief(b)) == b);
  CHECK_THROWS_AS(parse_belief("h 1 2\nJ 1\n"), Error);
  CHECK_THROWS_AS(parse_belief("q 1\n"), Error);
}

TEST_CASE("fact ids") {
  CritiqueFact f{3, 17, ItemSide::kTail, std::nullopt};
  CHECK(fact_id(f) == "3:17:t");
  auto back = parse_fact_id("3:17:t");
  REQUIRE(back);
  CHECK(*back == f);
  CHECK_FALSE(parse_fact_id("3:17"));
  CHECK_FALSE(parse_fact_id("3:17:x"));
  CHECK_FALSE(parse_fact_id("3:17:hh"));
  CHECK_FALSE(parse_fact_id("a:b:h"));
}

}  // TEST_SUITE
