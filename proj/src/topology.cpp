#include "dsf/topology.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dsf {

FieldTopology::FieldTopology(std::vector<NodeDef> nodes,
                             std::vector<EdgeDef> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  if (nodes_.empty()) throw DomainError("topology: no nodes");
  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].private_size < 1)
      throw DomainError("topology: private size of '" + nodes_[i].name +
                        "' must be >= 1");
    if (!by_name.emplace(nodes_[i].name, i).second)
      throw DomainError("topology: duplicate node name '" + nodes_[i].name +
                        "'");
  }

  adjacency_.assign(nodes_.size(), std::vector<bool>(nodes_.size(), false));
  for (const auto& e : edges_) {
    auto fit = by_name.find(e.from);
    auto tit = by_name.find(e.to);
    if (fit == by_name.end() || tit == by_name.end())
      throw DomainError("topology: edge references unknown node ('" + e.from +
                        "' -> '" + e.to + "')");
    if (fit->second == tit->second)
      throw DomainError("topology: self-loop on '" + e.from + "'");
    if (e.channel_size < 1)
      throw DomainError("topology: channel size must be >= 1");
    if (adjacency_[fit->second][tit->second])
      throw DomainError("topology: parallel edge '" + e.from + "' -> '" +
                        e.to + "'");
    adjacency_[fit->second][tit->second] = true;
  }

  // Global factor list: per node (in id order), the private factor followed
  // by outgoing channels ordered by target id.
  std::vector<int> global_sizes;
  const std::size_t n = nodes_.size();
  act_regions_.resize(n);
  obs_regions_.resize(n);
  rest_regions_.resize(n);

  // channel_factor[from][to] -> position in the global list
  std::vector<std::vector<std::size_t>> channel_factor(
      n, std::vector<std::size_t>(n, 0));
  std::vector<std::vector<int>> channel_size(n, std::vector<int>(n, 0));
  for (const auto& e : edges_) {
    channel_size[by_name[e.from]][by_name[e.to]] = e.channel_size;
  }

  for (std::size_t x = 0; x < n; ++x) {
    act_regions_[x].factor_indices.push_back(global_sizes.size());
    global_sizes.push_back(nodes_[x].private_size);
    for (std::size_t y = 0; y < n; ++y) {
      if (channel_size[x][y] > 0) {
        channel_factor[x][y] = global_sizes.size();
        act_regions_[x].factor_indices.push_back(global_sizes.size());
        global_sizes.push_back(channel_size[x][y]);
      }
    }
  }
  omega_ = IndexSpace(global_sizes);
  if (omega_.total() > kDefaultMaxStates)
    throw DomainError("topology: configuration count " +
                      std::to_string(omega_.total()) + " exceeds cap " +
                      std::to_string(kDefaultMaxStates));

  for (std::size_t x = 0; x < n; ++x) {
    obs_regions_[x] = act_regions_[x];
    for (std::size_t y = 0; y < n; ++y)
      if (channel_size[y][x] > 0)
        obs_regions_[x].factor_indices.push_back(channel_factor[y][x]);

    std::set<std::size_t> own(act_regions_[x].factor_indices.begin(),
                              act_regions_[x].factor_indices.end());
    for (std::size_t f = 0; f < global_sizes.size(); ++f)
      if (!own.count(f)) rest_regions_[x].factor_indices.push_back(f);
  }

  for (std::size_t x = 0; x < n; ++x) {
    act_spaces_.push_back(subspace(act_regions_[x]));
    obs_spaces_.push_back(subspace(obs_regions_[x]));
  }
}

std::size_t FieldTopology::node_index(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return i;
  throw DomainError("topology: unknown node '" + name + "'");
}

IndexSpace FieldTopology::subspace(const Region& region) const {
  std::vector<int> sizes;
  sizes.reserve(region.factor_indices.size());
  for (std::size_t f : region.factor_indices) {
    if (f >= omega_.num_factors())
      throw DomainError("region references foreign factor");
    sizes.push_back(omega_.factor_size(f));
  }
  return IndexSpace(sizes);
}

bool FieldTopology::has_edge(std::size_t from, std::size_t to) const {
  return adjacency_[from][to];
}

std::vector<std::size_t> FieldTopology::acting_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].kind == NodeKind::acting) out.push_back(i);
  return out;
}

std::vector<std::size_t> FieldTopology::environmental_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].kind == NodeKind::environmental) out.push_back(i);
  return out;
}

std::vector<int> restrict_to(const Configuration& cfg, const Region& region) {
  std::vector<int> out;
  out.reserve(region.factor_indices.size());
  for (std::size_t f : region.factor_indices) {
    if (f >= cfg.size()) throw DomainError("restrict: foreign region");
    out.push_back(cfg[f]);
  }
  return out;
}

bool agree_on(const Configuration& a, const Configuration& b,
              const Region& region) {
  for (std::size_t f : region.factor_indices) {
    if (f >= a.size() || f >= b.size())
      throw DomainError("agree_on: foreign region");
    if (a[f] != b[f]) return false;
  }
  return true;
}

Configuration replace_in(const Configuration& cfg, const Region& region,
                         const std::vector<int>& values) {
  if (values.size() != region.factor_indices.size())
    throw DomainError("replace_in: value count mismatch");
  Configuration out = cfg;
  for (std::size_t i = 0; i < values.size(); ++i)
    out[region.factor_indices[i]] = values[i];
  return out;
}

}  // namespace dsf
