#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bnci {

using Arc = std::pair<std::size_t, std::size_t>;  // (parent, child)

/// Directed acyclic graph over named nodes. Every mutation keeps it acyclic.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t v) const { return names_.at(v); }
  std::size_t index_of(std::string_view name) const;  // throws if absent

  bool has_arc(std::size_t parent, std::size_t child) const { return adj_[parent * size() + child] != 0; }
  bool adjacent(std::size_t a, std::size_t b) const { return has_arc(a, b) || has_arc(b, a); }
  /// Sorted parent indices.
  const std::vector<std::size_t>& parents(std::size_t v) const { return parents_.at(v); }
  std::vector<std::size_t> children(std::size_t v) const;
  std::size_t num_arcs() const noexcept { return arcs_; }
  /// Arcs sorted by (parent, child).
  std::vector<Arc> arcs() const;

  /// True when a directed path from `from` to `to` exists.
  bool reachable(std::size_t from, std::size_t to) const;
  bool would_create_cycle(std::size_t parent, std::size_t child) const;

  /// Throws on self-loops, duplicates or cycles.
  void add_arc(std::size_t parent, std::size_t child);
  void remove_arc(std::size_t parent, std::size_t child);
  void reverse_arc(std::size_t parent, std::size_t child);

  friend bool operator==(const Dag& a, const Dag& b) { return a.names_ == b.names_ && a.adj_ == b.adj_; }

 private:
  std::vector<std::string> names_;
  std::vector<char> adj_;
  std::vector<std::vector<std::size_t>> parents_;
  std::size_t arcs_ = 0;
};

/// Parent-first order; ties broken by node name.
std::vector<std::size_t> topological_order(const Dag& g);

/// Mark of an unordered node pair {a, b} seen from a (a < b not required).
enum class EdgeMark { none, forward, backward, undirected };

/// Completed partially directed graph: the representative of a Markov
/// equivalence class.
class Cpdag {
 public:
  explicit Cpdag(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool directed(std::size_t a, std::size_t b) const { return dir_[a * size() + b] != 0; }
  bool undirected(std::size_t a, std::size_t b) const { return und_[a * size() + b] != 0; }
  bool adjacent(std::size_t a, std::size_t b) const { return directed(a, b) || directed(b, a) || undirected(a, b); }
  /// forward means a -> b.
  EdgeMark mark(std::size_t a, std::size_t b) const;

  void set_directed(std::size_t a, std::size_t b);
  void set_undirected(std::size_t a, std::size_t b);

  friend bool operator==(const Cpdag& a, const Cpdag& b) {
    return a.names_ == b.names_ && a.dir_ == b.dir_ && a.und_ == b.und_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<char> dir_;
  std::vector<char> und_;
};

/// Orients v-structures and closes under Meek's rules; every other edge of
/// the skeleton stays undirected.
Cpdag to_cpdag(const Dag& g);

/// Structural Hamming distance between the CPDAGs of two DAGs on the same
/// node names: one per node pair whose mark differs.
std::size_t shd(const Dag& learned, const Dag& truth);
std::size_t shd(const Cpdag& a, const Cpdag& b);

/// Arc-list text: a "nodes: A B C" header then one "parent -> child" per
/// line. '#' starts a comment.
Dag read_arc_list(std::istream& in);
Dag parse_arc_list(std::string_view text);
void write_arc_list(const Dag& g, std::ostream& out);
std::string format_arc_list(const Dag& g);

}  // namespace bnci
