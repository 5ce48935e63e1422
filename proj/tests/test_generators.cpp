#include <doctest.h>

#include "helpers.hpp"

using namespace dsf;
using namespace dsf::testing;

namespace {

FieldTopology isolated_pair() {
  return FieldTopology(
      {{"a", 2, NodeKind::acting}, {"b", 2, NodeKind::acting}}, {});
}

LocalGeneratorTable two_state_table(const FieldTopology& t, std::size_t x,
                                    double up, double down) {
  return LocalGeneratorTable(t, x, {{0, 1, up}, {1, 0, down}});
}

}  // namespace

TEST_CASE("local tables derive the diagonal and validate") {
  FieldTopology solo({{"s", 3, NodeKind::acting}}, {});
  LocalGeneratorTable zero(solo, 0, {});
  CHECK(zero.rates().cwiseAbs().maxCoeff() == 0.0);
  validate_local(solo, zero);

  LocalGeneratorTable table(solo, 0, {{0, 1, 1.0}, {0, 2, 2.0}});
  CHECK(table.rates()(0, 0) == -3.0);
  validate_local(solo, table);

  CHECK_THROWS_AS(LocalGeneratorTable(solo, 0, {{0, 1, -0.5}}), DomainError);
  CHECK_THROWS_AS(LocalGeneratorTable(solo, 0, {{1, 1, 0.5}}), DomainError);
}

TEST_CASE("embedding an isolated node reproduces its raw generator") {
  FieldTopology solo({{"s", 2, NodeKind::acting}}, {});
  const Matrix embedded =
      embed_local(solo, two_state_table(solo, 0, 1.0, 2.0));
  CHECK((embedded - two_state(1.0, 2.0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("embedding acts trivially on foreign factors") {
  FieldTopology pair = isolated_pair();
  const Matrix embedded =
      embed_local(pair, two_state_table(pair, 0, 1.0, 2.0));
  CHECK(is_valid_generator(embedded));
  // Zero rate between configurations that differ in b's digit.
  const IndexSpace& omega = pair.omega();
  for (std::size_t w = 0; w < 4; ++w)
    for (std::size_t v = 0; v < 4; ++v) {
      if (w == v) continue;
      if (!agree_on(omega.decode(w), omega.decode(v), pair.act_region(1)))
        CHECK(embedded(static_cast<Eigen::Index>(w),
                       static_cast<Eigen::Index>(v)) == 0.0);
    }
}

TEST_CASE("assembly equals the Kronecker sum for independent chains") {
  FieldTopology pair = isolated_pair();
  const Matrix ga = two_state(1.0, 2.0), gb = two_state(3.0, 4.0);
  const Matrix assembled =
      assemble_system(pair, {two_state_table(pair, 0, 1.0, 2.0),
                             two_state_table(pair, 1, 3.0, 4.0)});
  // Independent-chains oracle: G = A (x) I + I (x) B with the first node's
  // digit varying slowest.
  Matrix kron = Matrix::Zero(4, 4);
  const Matrix id = Matrix::Identity(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          kron(2 * i + k, 2 * j + l) = ga(i, j) * id(k, l) +
                                       id(i, j) * gb(k, l);
  CHECK((assembled - kron).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("3-node chain: sparsity and commutation of non-neighbors") {
  FieldTopology chain({{"x1", 2, NodeKind::acting},
                       {"x2", 2, NodeKind::acting},
                       {"x3", 2, NodeKind::acting}},
                      {{"x1", "x2", 2}, {"x2", "x3", 2}});
  Rng rng(17);
  std::vector<LocalGeneratorTable> tables;
  for (std::size_t x = 0; x < 3; ++x) {
    const std::size_t act = chain.act_space(x).total();
    const std::size_t obs = chain.obs_space(x).total();
    const std::size_t act_rank = chain.act_region(x).factor_indices.size();
    std::vector<LocalRate> rates;
    for (std::size_t u = 0; u < obs; ++u) {
      std::vector<int> digits = chain.obs_space(x).decode(u);
      digits.resize(act_rank);
      const std::size_t diag = chain.act_space(x).encode(digits);
      for (std::size_t o = 0; o < act; ++o)
        if (o != diag) rates.push_back({u, o, rng.uniform()});
    }
    tables.emplace_back(chain, x, rates);
  }

  // Embedded G(x2) only moves configurations inside x2's own factors.
  const Matrix g2 = embed_local(chain, tables[1]);
  const IndexSpace& omega = chain.omega();
  for (std::size_t w = 0; w < omega.total(); ++w)
    for (std::size_t v = 0; v < omega.total(); ++v)
      if (w != v &&
          !agree_on(omega.decode(w), omega.decode(v), chain.rest_region(1)))
        CHECK(g2(static_cast<Eigen::Index>(w),
                 static_cast<Eigen::Index>(v)) == 0.0);

  CHECK(commutator_norm(chain, 0, 2, tables) <= 1e-13);
  CHECK(commutator_norm(chain, 1, 1, tables) == 0.0);
  CHECK(commutator_norm(chain, 0, 1, tables) > 1e-6);

  const Matrix g = assemble_system(chain, tables);
  Matrix total = Matrix::Zero(g.rows(), g.cols());
  for (const auto& table : tables) total += embed_local(chain, table);
  CHECK((g - total).cwiseAbs().maxCoeff() == 0.0);
  CHECK(is_valid_generator(g));
}

TEST_CASE("lift and project are mutually consistent") {
  const Matrix zero = Matrix::Zero(3, 3);
  const LiftedOperator lifted_zero = lift(zero);
  for (const auto& col : lifted_zero.columns) CHECK(col.empty());

  const Matrix g = two_state(1.0, 2.0);
  const LiftedOperator lifted = lift(g);
  const TildeVector image = lifted.apply(delta(2, 0));
  // G~ delta_0 = -1 |00> + 1 |10>.
  double v00 = 0.0, v10 = 0.0;
  for (const auto& e : image) {
    if (e.to == 0 && e.from == 0) v00 += e.value;
    if (e.to == 1 && e.from == 0) v10 += e.value;
  }
  CHECK(v00 == -1.0);
  CHECK(v10 == 1.0);

  const Matrix random = random_generator(5, 33);
  CHECK((project_pi(lift(random)) - random).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("project_pi on basis pairs") {
  TildeVector diag{{1, 1, 1.0}};
  CHECK(project_pi(diag, 2).cwiseAbs().maxCoeff() == 0.0);
  TildeVector pair{{1, 0, 1.0}};
  const Vector image = project_pi(pair, 2);
  CHECK(image(0) == -1.0);
  CHECK(image(1) == 1.0);
}

TEST_CASE("action operators create the recorded pair") {
  FieldTopology solo({{"s", 2, NodeKind::acting}}, {});
  const LiftedOperator a01 = action_operator(solo, 0, 0, 1);
  const TildeVector hit = a01.apply(delta(2, 0));
  REQUIRE(hit.size() == 1);
  CHECK(hit[0].to == 1);
  CHECK(hit[0].from == 0);
  CHECK(hit[0].value == 1.0);
  CHECK(a01.apply(delta(2, 1)).empty());
}

TEST_CASE("field action operators leave unobserved digits untouched") {
  RandomField field = random_two_node_field(3);
  const FieldTopology& t = field.topology;
  const IndexSpace& omega = t.omega();
  // Node 0 (env) does not observe the agent's private digit; its action
  // operator must preserve it.
  const LiftedOperator op = action_operator(t, 0, 1, 0);
  for (std::size_t w = 0; w < omega.total(); ++w) {
    const TildeVector image = op.apply(delta(omega.total(),
                                             static_cast<Eigen::Index>(w)));
    const std::size_t u =
        t.obs_space(0).encode(restrict_to(omega.decode(w), t.obs_region(0)));
    if (u != 1) {
      CHECK(image.empty());
      continue;
    }
    REQUIRE(image.size() == 1);
    CHECK(image[0].from == w);
    const Configuration dest = omega.decode(image[0].to);
    CHECK(agree_on(dest, omega.decode(w), t.rest_region(0)));
    CHECK(t.act_space(0).encode(restrict_to(dest, t.act_region(0))) == 0);
  }
}
