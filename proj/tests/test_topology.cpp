#include <doctest.h>

#include "helpers.hpp"

using namespace dsf;

namespace {

FieldTopology two_entity() {
  // The classic two-entity view: x owns (alpha, beta), y owns (mu, nu),
  // with channels both ways. Factor order: alpha, beta, mu, nu.
  return FieldTopology({{"x", 2, NodeKind::acting}, {"y", 2, NodeKind::acting}},
                       {{"x", "y", 2}, {"y", "x", 2}});
}

FieldTopology chain3() {
  return FieldTopology({{"x1", 2, NodeKind::environmental},
                        {"x2", 2, NodeKind::acting},
                        {"x3", 2, NodeKind::acting}},
                       {{"x1", "x2", 2}, {"x2", "x3", 2}});
}

}  // namespace

TEST_CASE("build_topology sizes and neighbor predicates") {
  FieldTopology isolated({{"solo", 2, NodeKind::acting}}, {});
  CHECK(isolated.omega().total() == 2);
  CHECK(isolated.act_region(0).factor_indices ==
        isolated.obs_region(0).factor_indices);

  FieldTopology pair = two_entity();
  CHECK(pair.omega().total() == 16);
  CHECK(pair.act_space(0).total() == 4);
  CHECK(pair.obs_space(0).total() == 8);

  FieldTopology chain = chain3();
  CHECK_FALSE(chain.neighbors(0, 2));
  CHECK(chain.neighbors(0, 1));
  CHECK(chain.obs_space(1).total() == 8);
  CHECK(chain.acting_nodes() == std::vector<std::size_t>{1, 2});
  CHECK(chain.environmental_nodes() == std::vector<std::size_t>{0});
}

TEST_CASE("build_topology rejects malformed graphs") {
  CHECK_THROWS_AS(FieldTopology({{"a", 2, NodeKind::acting},
                                 {"a", 2, NodeKind::acting}},
                                {}),
                  DomainError);
  CHECK_THROWS_AS(FieldTopology({{"a", 2, NodeKind::acting}},
                                {{"a", "ghost", 2}}),
                  DomainError);
  CHECK_THROWS_AS(FieldTopology({{"a", 0, NodeKind::acting}}, {}),
                  DomainError);
  CHECK_THROWS_AS(FieldTopology({{"a", 2, NodeKind::acting}},
                                {{"a", "a", 2}}),
                  DomainError);
  CHECK_THROWS_AS(FieldTopology({{"a", 2, NodeKind::acting},
                                 {"b", 2, NodeKind::acting}},
                                {{"a", "b", 2}, {"a", "b", 3}}),
                  DomainError);
}

TEST_CASE("restriction and agreement") {
  FieldTopology pair = two_entity();
  const IndexSpace& omega = pair.omega();

  Region all;
  for (std::size_t i = 0; i < 4; ++i) all.factor_indices.push_back(i);
  const Configuration cfg = omega.decode(13);
  CHECK(restrict_to(cfg, all) == cfg);

  // U_x of node x is (alpha, beta, mu): its own factors plus y's channel.
  const Region& obs = pair.obs_region(0);
  CHECK(obs.factor_indices.size() == 3);
  // restrict is constant on the two fibers (the nu digit) of each obs value.
  for (std::size_t u = 0; u < 8; ++u) {
    std::vector<std::size_t> members;
    for (std::size_t w = 0; w < 16; ++w)
      if (pair.obs_space(0).encode(restrict_to(omega.decode(w), obs)) == u)
        members.push_back(w);
    CHECK(members.size() == 2);
    CHECK(agree_on(omega.decode(members[0]), omega.decode(members[1]), obs));
  }
}

TEST_CASE("agree_on distinguishes regions") {
  FieldTopology chain = chain3();
  const IndexSpace& omega = chain.omega();
  // Flip only x3's private digit; x1 does not observe x3.
  Configuration a = omega.decode(0);
  Configuration b = a;
  const std::size_t x3_private = chain.act_region(2).factor_indices[0];
  b[x3_private] = 1;
  CHECK(agree_on(a, b, chain.obs_region(0)));
  Region all;
  for (std::size_t i = 0; i < a.size(); ++i) all.factor_indices.push_back(i);
  CHECK_FALSE(agree_on(a, b, all));
  CHECK(agree_on(a, a, all));
}

TEST_CASE("factor partition and region containment") {
  FieldTopology chain = chain3();
  std::vector<bool> covered(chain.omega().factor_sizes().size(), false);
  for (std::size_t x = 0; x < chain.num_nodes(); ++x) {
    for (std::size_t f : chain.act_region(x).factor_indices) {
      CHECK_FALSE(covered[f]);
      covered[f] = true;
    }
    // obs region starts with the act region.
    const auto& act = chain.act_region(x).factor_indices;
    const auto& obs = chain.obs_region(x).factor_indices;
    REQUIRE(obs.size() >= act.size());
    for (std::size_t i = 0; i < act.size(); ++i) CHECK(obs[i] == act[i]);
  }
  for (bool c : covered) CHECK(c);
}

TEST_CASE("replace_in rewrites only the region") {
  FieldTopology pair = two_entity();
  const Configuration cfg = pair.omega().decode(9);
  const Region& act = pair.act_region(1);
  const Configuration out = replace_in(cfg, act, {1, 0});
  for (std::size_t f = 0; f < cfg.size(); ++f) {
    const bool in_region =
        std::find(act.factor_indices.begin(), act.factor_indices.end(), f) !=
        act.factor_indices.end();
    if (!in_region) CHECK(out[f] == cfg[f]);
  }
  CHECK(restrict_to(out, act) == std::vector<int>{1, 0});
}
