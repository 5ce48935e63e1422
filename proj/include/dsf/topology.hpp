#ifndef DSF_TOPOLOGY_HPP
#define DSF_TOPOLOGY_HPP

#include <string>
#include <vector>

#include "dsf/index_space.hpp"

namespace dsf {

enum class NodeKind { environmental, acting };

struct NodeDef {
  std::string name;
  int private_size = 1;
  NodeKind kind = NodeKind::acting;
};

struct EdgeDef {
  std::string from;
  std::string to;
  int channel_size = 1;
};

/// An ordered subset of the global factor list (e.g. the factors a node can
/// act on, or the factors it can observe).
struct Region {
  std::vector<std::size_t> factor_indices;  // positions into the global list
};

/// The ground space: a finite directed graph of entities. Each node owns a
/// private factor plus one channel factor per outgoing edge; the global
/// configuration space is the product of all factors in node-id order,
/// channels ordered by (from, to).
class FieldTopology {
 public:
  FieldTopology(std::vector<NodeDef> nodes, std::vector<EdgeDef> edges);

  std::size_t num_nodes() const { return nodes_.size(); }
  const NodeDef& node(std::size_t x) const { return nodes_[x]; }
  const std::vector<NodeDef>& nodes() const { return nodes_; }
  const std::vector<EdgeDef>& edges() const { return edges_; }
  std::size_t node_index(const std::string& name) const;

  const IndexSpace& omega() const { return omega_; }
  /// Factors node x can act on: its private factor then its outgoing channels.
  const Region& act_region(std::size_t x) const { return act_regions_[x]; }
  /// Factors node x observes: act_region plus incoming channels.
  const Region& obs_region(std::size_t x) const { return obs_regions_[x]; }
  /// Complement of act_region(x) in the global factor list.
  const Region& rest_region(std::size_t x) const { return rest_regions_[x]; }

  IndexSpace subspace(const Region& region) const;
  const IndexSpace& act_space(std::size_t x) const { return act_spaces_[x]; }
  const IndexSpace& obs_space(std::size_t x) const { return obs_spaces_[x]; }

  bool has_edge(std::size_t from, std::size_t to) const;
  bool neighbors(std::size_t a, std::size_t b) const {
    return has_edge(a, b) || has_edge(b, a);
  }

  std::vector<std::size_t> acting_nodes() const;
  std::vector<std::size_t> environmental_nodes() const;

 private:
  std::vector<NodeDef> nodes_;
  std::vector<EdgeDef> edges_;
  std::vector<std::vector<bool>> adjacency_;
  IndexSpace omega_;
  std::vector<Region> act_regions_, obs_regions_, rest_regions_;
  std::vector<IndexSpace> act_spaces_, obs_spaces_;
};

/// A complete assignment of digits, one per global factor.
using Configuration = std::vector<int>;

/// Digits of cfg at the region's factors, in region order.
std::vector<int> restrict_to(const Configuration& cfg, const Region& region);

/// True iff two configurations coincide on every factor of the region.
bool agree_on(const Configuration& a, const Configuration& b,
              const Region& region);

/// Replaces the digits of cfg at the region's factors with the given values.
Configuration replace_in(const Configuration& cfg, const Region& region,
                         const std::vector<int>& values);

}  // namespace dsf

#endif  // DSF_TOPOLOGY_HPP
