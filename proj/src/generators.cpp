#include "dsf/generators.hpp"

#include <cmath>

namespace dsf {

namespace {

// Compensated (Kahan) accumulator.
struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

LocalGeneratorTable::LocalGeneratorTable(const FieldTopology& topology,
                                         std::size_t node,
                                         const std::vector<LocalRate>& rates)
    : node_(node) {
  if (node >= topology.num_nodes())
    throw DomainError("local table: node index out of range");
  const IndexSpace& obs = topology.obs_space(node);
  const IndexSpace& act = topology.act_space(node);
  rates_ = Matrix::Zero(static_cast<Eigen::Index>(act.total()),
                        static_cast<Eigen::Index>(obs.total()));

  // The actionable factors are the leading factors of the observable space,
  // so the actionable part of u is a prefix restriction.
  act_of_obs_.resize(obs.total());
  for (std::size_t u = 0; u < obs.total(); ++u) {
    std::vector<int> digits = obs.decode(u);
    digits.resize(act.num_factors());
    act_of_obs_[u] = act.encode(digits);
  }

  for (const auto& r : rates) {
    if (r.from_obs >= obs.total() || r.to_act >= act.total())
      throw DomainError("local table: rate index out of range");
    if (r.to_act == act_of_obs_[r.from_obs])
      throw DomainError("local table: diagonal rates are derived, not given");
    if (r.rate < 0.0)
      throw DomainError("local table: negative rate");
    rates_(static_cast<Eigen::Index>(r.to_act),
           static_cast<Eigen::Index>(r.from_obs)) += r.rate;
  }

  for (std::size_t u = 0; u < obs.total(); ++u) {
    KahanSum total;
    for (std::size_t o = 0; o < act.total(); ++o)
      if (o != act_of_obs_[u])
        total.add(rates_(static_cast<Eigen::Index>(o),
                         static_cast<Eigen::Index>(u)));
    rates_(static_cast<Eigen::Index>(act_of_obs_[u]),
           static_cast<Eigen::Index>(u)) = -total.sum;
  }
}

void validate_local(const FieldTopology& topology,
                    const LocalGeneratorTable& table) {
  const IndexSpace& obs = topology.obs_space(table.node());
  const IndexSpace& act = topology.act_space(table.node());
  const Matrix& rates = table.rates();
  for (std::size_t u = 0; u < obs.total(); ++u) {
    KahanSum total;
    for (std::size_t o = 0; o < act.total(); ++o) {
      const double r = rates(static_cast<Eigen::Index>(o),
                             static_cast<Eigen::Index>(u));
      if (o != table.act_of_obs(u) && r < 0.0)
        throw DomainError("local generator: negative rate at source " +
                          std::to_string(u) + " destination " +
                          std::to_string(o));
      total.add(r);
    }
    if (std::abs(total.sum) > 1e-12)
      throw DomainError("local generator: column for source " +
                        std::to_string(u) + " sums to " +
                        std::to_string(total.sum));
  }
}

Matrix embed_local(const FieldTopology& topology,
                   const LocalGeneratorTable& table) {
  const std::size_t x = table.node();
  const IndexSpace& omega = topology.omega();
  const IndexSpace& obs = topology.obs_space(x);
  const IndexSpace& act = topology.act_space(x);
  const Region& act_region = topology.act_region(x);
  const Region& obs_region = topology.obs_region(x);
  const std::size_t n = omega.total();

  Matrix embedded = Matrix::Zero(static_cast<Eigen::Index>(n),
                                 static_cast<Eigen::Index>(n));
  for (std::size_t w = 0; w < n; ++w) {
    const Configuration cfg = omega.decode(w);
    const std::size_t u = obs.encode(restrict_to(cfg, obs_region));
    for (std::size_t o = 0; o < act.total(); ++o) {
      const double rate = table.rates()(static_cast<Eigen::Index>(o),
                                        static_cast<Eigen::Index>(u));
      if (rate == 0.0) continue;
      const Configuration dest = replace_in(cfg, act_region, act.decode(o));
      embedded(static_cast<Eigen::Index>(omega.encode(dest)),
               static_cast<Eigen::Index>(w)) += rate;
    }
  }
  return embedded;
}

Matrix assemble_system(const FieldTopology& topology,
                       const std::vector<LocalGeneratorTable>& tables) {
  if (tables.size() != topology.num_nodes())
    throw DomainError("assemble_system: one table per node required");
  std::vector<bool> seen(topology.num_nodes(), false);
  const std::size_t n = topology.omega().total();
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(n));
  for (const auto& t : tables) {
    if (seen[t.node()])
      throw DomainError("assemble_system: duplicate table for node " +
                        std::to_string(t.node()));
    seen[t.node()] = true;
    g += embed_local(topology, t);
  }
  return g;
}

double commutator_norm(const FieldTopology& topology, std::size_t x,
                       std::size_t y,
                       const std::vector<LocalGeneratorTable>& tables) {
  const Matrix gx = embed_local(topology, tables.at(x));
  const Matrix gy = embed_local(topology, tables.at(y));
  return (gx * gy - gy * gx).cwiseAbs().maxCoeff();
}

TildeVector LiftedOperator::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim ||
      columns.size() != dim)
    throw DomainError("lifted apply: shape mismatch");
  TildeVector out;
  for (std::size_t c = 0; c < dim; ++c) {
    const double coeff = v(static_cast<Eigen::Index>(c));
    if (coeff == 0.0) continue;
    for (const auto& e : columns[c])
      out.push_back({e.to, e.from, e.value * coeff});
  }
  return out;
}

LiftedOperator lift(const Matrix& generator) {
  if (generator.rows() != generator.cols())
    throw DomainError("lift: matrix not square");
  const std::size_t n = static_cast<std::size_t>(generator.rows());
  LiftedOperator op;
  op.dim = n;
  op.columns.resize(n);
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t w2 = 0; w2 < n; ++w2) {
      const double g = generator(static_cast<Eigen::Index>(w2),
                                 static_cast<Eigen::Index>(w));
      if (g != 0.0) op.columns[w].push_back({w2, w, g});
    }
  return op;
}

LiftedOperator action_operator(const FieldTopology& topology, std::size_t x,
                               std::size_t from_obs, std::size_t to_act) {
  const IndexSpace& omega = topology.omega();
  const IndexSpace& obs = topology.obs_space(x);
  const IndexSpace& act = topology.act_space(x);
  if (from_obs >= obs.total() || to_act >= act.total())
    throw DomainError("action_operator: index out of range");
  const Region& act_region = topology.act_region(x);
  const Region& obs_region = topology.obs_region(x);
  const std::vector<int> to_digits = act.decode(to_act);

  LiftedOperator op;
  op.dim = omega.total();
  op.columns.resize(op.dim);
  for (std::size_t w = 0; w < op.dim; ++w) {
    const Configuration cfg = omega.decode(w);
    if (obs.encode(restrict_to(cfg, obs_region)) != from_obs) continue;
    const Configuration dest = replace_in(cfg, act_region, to_digits);
    op.columns[w].push_back({omega.encode(dest), w, 1.0});
  }
  return op;
}

Vector project_pi(const TildeVector& v, std::size_t dim) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& e : v) {
    if (e.to >= dim || e.from >= dim)
      throw DomainError("project_pi: index out of range");
    out(static_cast<Eigen::Index>(e.to)) += e.value;
    out(static_cast<Eigen::Index>(e.from)) -= e.value;
  }
  return out;
}

Matrix project_pi(const LiftedOperator& op) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(op.dim),
                            static_cast<Eigen::Index>(op.dim));
  for (std::size_t c = 0; c < op.dim; ++c)
    for (const auto& e : op.columns[c]) {
      out(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(c)) +=
          e.value;
      out(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(c)) -=
          e.value;
    }
  return out;
}

}  // namespace dsf
