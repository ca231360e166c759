#include "bnci/graph.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "bnci/error.hpp"

namespace bnci {

Dag::Dag(std::vector<std::string> names)
    : names_(std::move(names)), adj_(names_.size() * names_.size(), 0), parents_(names_.size()) {
  auto sorted = names_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorKind::argument, "duplicate node name");
}

std::size_t Dag::index_of(std::string_view name) const {
  for (std::size_t v = 0; v < names_.size(); ++v)
    if (names_[v] == name) return v;
  fail(ErrorKind::argument, "unknown node '" + std::string(name) + "'");
}

std::vector<std::size_t> Dag::children(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < size(); ++c)
    if (has_arc(v, c)) out.push_back(c);
  return out;
}

std::vector<Arc> Dag::arcs() const {
  std::vector<Arc> out;
  out.reserve(arcs_);
  for (std::size_t p = 0; p < size(); ++p)
    for (std::size_t c = 0; c < size(); ++c)
      if (has_arc(p, c)) out.emplace_back(p, c);
  return out;
}

bool Dag::reachable(std::size_t from, std::size_t to) const {
  if (from == to) return true;
  std::vector<char> seen(size(), 0);
  std::vector<std::size_t> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t c = 0; c < size(); ++c) {
      if (!has_arc(v, c) || seen[c]) continue;
      if (c == to) return true;
      seen[c] = 1;
      stack.push_back(c);
    }
  }
  return false;
}

bool Dag::would_create_cycle(std::size_t parent, std::size_t child) const { return reachable(child, parent); }

void Dag::add_arc(std::size_t parent, std::size_t child) {
  if (parent >= size() || child >= size()) fail(ErrorKind::argument, "arc endpoint out of range");
  if (parent == child) fail(ErrorKind::argument, "self-loop on '" + names_[parent] + "'");
  if (has_arc(parent, child))
    fail(ErrorKind::argument, "duplicate arc " + names_[parent] + " -> " + names_[child]);
  if (would_create_cycle(parent, child))
    fail(ErrorKind::argument, "arc " + names_[parent] + " -> " + names_[child] + " would create a cycle");
  adj_[parent * size() + child] = 1;
  auto& ps = parents_[child];
  ps.insert(std::lower_bound(ps.begin(), ps.end(), parent), parent);
  ++arcs_;
}

void Dag::remove_arc(std::size_t parent, std::size_t child) {
  if (parent >= size() || child >= size() || !has_arc(parent, child))
    fail(ErrorKind::argument, "remove_arc: no such arc");
  adj_[parent * size() + child] = 0;
  auto& ps = parents_[child];
  ps.erase(std::lower_bound(ps.begin(), ps.end(), parent));
  --arcs_;
}

void Dag::reverse_arc(std::size_t parent, std::size_t child) {
  remove_arc(parent, child);
  try {
    add_arc(child, parent);
  } catch (...) {
    add_arc(parent, child);
    throw;
  }
}

std::vector<std::size_t> topological_order(const Dag& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = g.parents(v).size();
  auto by_name = [&](std::size_t a, std::size_t b) { return g.name(a) < g.name(b); };
  std::set<std::size_t, decltype(by_name)> ready(by_name);
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.insert(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t c : g.children(v))
      if (--indegree[c] == 0) ready.insert(c);
  }
  return order;
}

Cpdag::Cpdag(std::vector<std::string> names)
    : names_(std::move(names)), dir_(names_.size() * names_.size(), 0), und_(names_.size() * names_.size(), 0) {}

EdgeMark Cpdag::mark(std::size_t a, std::size_t b) const {
  if (directed(a, b)) return EdgeMark::forward;
  if (directed(b, a)) return EdgeMark::backward;
  if (undirected(a, b)) return EdgeMark::undirected;
  return EdgeMark::none;
}

void Cpdag::set_directed(std::size_t a, std::size_t b) {
  const std::size_t n = size();
  und_[a * n + b] = und_[b * n + a] = 0;
  dir_[b * n + a] = 0;
  dir_[a * n + b] = 1;
}

void Cpdag::set_undirected(std::size_t a, std::size_t b) {
  const std::size_t n = size();
  dir_[a * n + b] = dir_[b * n + a] = 0;
  und_[a * n + b] = und_[b * n + a] = 1;
}

Cpdag to_cpdag(const Dag& g) {
  const std::size_t n = g.size();
  Cpdag out(g.names());
  for (auto [p, c] : g.arcs()) out.set_undirected(p, c);

  // v-structures a -> c <- b with a, b non-adjacent
  for (std::size_t c = 0; c < n; ++c) {
    const auto& ps = g.parents(c);
    for (std::size_t x = 0; x < ps.size(); ++x)
      for (std::size_t y = x + 1; y < ps.size(); ++y)
        if (!g.adjacent(ps[x], ps[y])) {
          out.set_directed(ps[x], c);
          out.set_directed(ps[y], c);
        }
  }

  // Meek rules 1-3; rule 4 cannot fire when starting from a DAG's pattern.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || !out.undirected(a, b)) continue;
        bool orient = false;
        for (std::size_t c = 0; c < n && !orient; ++c) {
          if (c == a || c == b) continue;
          // R1: c -> a - b, c and b non-adjacent
          if (out.directed(c, a) && !out.adjacent(c, b)) orient = true;
          // R2: a -> c -> b
          else if (out.directed(a, c) && out.directed(c, b)) orient = true;
        }
        // R3: a - c -> b, a - d -> b, c and d non-adjacent
        for (std::size_t c = 0; c < n && !orient; ++c) {
          if (c == a || c == b || !out.undirected(a, c) || !out.directed(c, b)) continue;
          for (std::size_t d = c + 1; d < n && !orient; ++d) {
            if (d == a || d == b || !out.undirected(a, d) || !out.directed(d, b)) continue;
            if (!out.adjacent(c, d)) orient = true;
          }
        }
        if (orient) {
          out.set_directed(a, b);
          changed = true;
        }
      }
  }
  return out;
}

std::size_t shd(const Cpdag& a, const Cpdag& b) {
  if (a.names() != b.names()) fail(ErrorKind::argument, "shd: graphs have different node sets");
  std::size_t d = 0;
  for (std::size_t x = 0; x < a.size(); ++x)
    for (std::size_t y = x + 1; y < a.size(); ++y)
      if (a.mark(x, y) != b.mark(x, y)) ++d;
  return d;
}

std::size_t shd(const Dag& learned, const Dag& truth) {
  if (learned.names() != truth.names()) fail(ErrorKind::argument, "shd: graphs have different node sets");
  return shd(to_cpdag(learned), to_cpdag(truth));
}

Dag read_arc_list(std::istream& in) {
  std::string line;
  std::optional<Dag> g;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first)) continue;
    if (!g) {
      if (first != "nodes:") throw FormatError(lineno, "expected 'nodes:' header");
      std::vector<std::string> names;
      for (std::string name; tokens >> name;) names.push_back(name);
      try {
        g.emplace(std::move(names));
      } catch (const Error& e) {
        throw FormatError(lineno, e.what());
      }
      continue;
    }
    // The arrow may be written with or without surrounding spaces.
    const auto arrow = line.find("->");
    std::istringstream lhs(line.substr(0, arrow == std::string::npos ? line.size() : arrow));
    std::istringstream rhs(arrow == std::string::npos ? std::string() : line.substr(arrow + 2));
    std::string parent, child, extra;
    if (arrow == std::string::npos || !(lhs >> parent) || (lhs >> extra) || !(rhs >> child) || (rhs >> extra))
      throw FormatError(lineno, "expected 'parent -> child'");
    try {
      g->add_arc(g->index_of(parent), g->index_of(child));
    } catch (const Error& e) {
      throw FormatError(lineno, e.what());
    }
  }
  if (!g) throw FormatError(lineno, "missing 'nodes:' header");
  return std::move(*g);
}

Dag parse_arc_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_arc_list(in);
}

void write_arc_list(const Dag& g, std::ostream& out) {
  out << "nodes:";
  for (const auto& name : g.names()) out << ' ' << name;
  out << '\n';
  for (auto [p, c] : g.arcs()) out << g.name(p) << " -> " << g.name(c) << '\n';
}

std::string format_arc_list(const Dag& g) {
  std::ostringstream out;
  write_arc_list(g, out);
  return out.str();
}

}  // namespace bnci
