//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/molgraph/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace molshift {
namespace {

const char *describe(SmilesError::Kind kind) {
  switch (kind) {
  case SmilesError::Kind::kSyntax:
    return "SMILES syntax error";
  case SmilesError::Kind::kUnsupportedElement:
    return "unsupported element";
  case SmilesError::Kind::kValence:
    return "valence violation";
  case SmilesError::Kind::kDisconnected:
    return "disconnected input";
  }
  return "SMILES error";
}

// Bond order 0 marks an aromatic bond awaiting kekulization.
constexpr int kAromaticBond = 0;

struct RawAtom {
  Element element;
  bool aromatic = false;
  bool bracket = false;
  int hcount = 0;
  int charge = 0;
  std::size_t position = 0;
};

struct RawBond {
  int begin;
  int end;
  int order;
  std::size_t position;
};

struct RingOpening {
  int atom;
  std::optional<int> order;
  std::size_t position;
};

class SmilesReader {
public:
  explicit SmilesReader(std::string_view text): text_(text) { }

  void read() {
    if (text_.empty())
      fail(SmilesError::Kind::kSyntax, 0, "empty SMILES");

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (prev_ < 0)
          fail(SmilesError::Kind::kSyntax, pos_, "branch before any atom");
        if (pending_)
          fail(SmilesError::Kind::kSyntax, pos_, "bond symbol before branch");
        branches_.push_back(prev_);
        ++pos_;
        expect_atom_after_branch_ = true;
      } else if (c == ')') {
        if (branches_.empty())
          fail(SmilesError::Kind::kSyntax, pos_, "unbalanced ')'");
        if (pending_ || expect_atom_after_branch_)
          fail(SmilesError::Kind::kSyntax, pos_, "empty branch or dangling bond");
        prev_ = branches_.back();
        branches_.pop_back();
        ++pos_;
      } else if (c == '.') {
        fail(SmilesError::Kind::kDisconnected, pos_,
             "multi-fragment SMILES are not supported");
      } else if (auto order = bond_symbol(c)) {
        if (pending_)
          fail(SmilesError::Kind::kSyntax, pos_, "consecutive bond symbols");
        if (prev_ < 0)
          fail(SmilesError::Kind::kSyntax, pos_, "bond before any atom");
        pending_ = *order;
        pending_pos_ = pos_;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        read_ring_closure();
      } else if (c == '[') {
        add_atom(read_bracket_atom());
      } else {
        add_atom(read_organic_atom());
      }
    }

    if (!branches_.empty())
      fail(SmilesError::Kind::kSyntax, text_.size(), "unbalanced '('");
    if (pending_)
      fail(SmilesError::Kind::kSyntax, pending_pos_, "dangling bond");
    if (!rings_.empty()) {
      fail(SmilesError::Kind::kSyntax, rings_.begin()->second.position,
           "unclosed ring bond " + std::to_string(rings_.begin()->first));
    }
  }

  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;

private:
  [[noreturn]] void fail(SmilesError::Kind kind, std::size_t pos,
                         const std::string &msg) const {
    throw SmilesError(kind, pos, msg);
  }

  std::optional<int> bond_symbol(char c) const {
    switch (c) {
    case '-':
    case '/':
    case '\\':
      return 1;
    case '=':
      return 2;
    case '#':
      return 3;
    case ':':
      return kAromaticBond;
    case '$':
      fail(SmilesError::Kind::kSyntax, pos_, "quadruple bonds are not supported");
    default:
      return std::nullopt;
    }
  }

  int default_order(int a, int b) const {
    return atoms[a].aromatic && atoms[b].aromatic ? kAromaticBond : 1;
  }

  void add_bond(int a, int b, int order, std::size_t pos) {
    if (a == b)
      fail(SmilesError::Kind::kSyntax, pos, "atom bonded to itself");
    for (const RawBond &bond: bonds) {
      if ((bond.begin == a && bond.end == b) || (bond.begin == b && bond.end == a))
        fail(SmilesError::Kind::kSyntax, pos, "duplicate bond");
    }
    if (order == kAromaticBond && !(atoms[a].aromatic && atoms[b].aromatic)) {
      fail(SmilesError::Kind::kSyntax, pos,
           "aromatic bond between non-aromatic atoms");
    }
    bonds.push_back({ a, b, order, pos });
  }

  void add_atom(RawAtom atom) {
    atoms.push_back(atom);
    const int idx = static_cast<int>(atoms.size()) - 1;
    if (prev_ >= 0) {
      const int order = pending_.value_or(default_order(prev_, idx));
      add_bond(prev_, idx, order, pending_ ? pending_pos_ : atom.position);
    }
    pending_.reset();
    prev_ = idx;
    expect_atom_after_branch_ = false;
  }

  void read_ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0)
      fail(SmilesError::Kind::kSyntax, pos_, "ring bond before any atom");

    int number = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))
          || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        fail(SmilesError::Kind::kSyntax, pos_, "'%' must be followed by two digits");
      }
      number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      number = text_[pos_] - '0';
      ++pos_;
    }

    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, RingOpening { prev_, pending_, start });
    } else {
      const RingOpening open = it->second;
      rings_.erase(it);
      if (open.order && pending_ && *open.order != *pending_)
        fail(SmilesError::Kind::kSyntax, start, "conflicting ring bond orders");
      const int order = pending_ ? *pending_
                        : open.order ? *open.order
                                     : default_order(open.atom, prev_);
      add_bond(open.atom, prev_, order, start);
    }
    pending_.reset();
  }

  RawAtom read_organic_atom() {
    RawAtom atom;
    atom.position = pos_;
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';

    std::string symbol;
    if ((c == 'C' && next == 'l') || (c == 'B' && next == 'r')) {
      symbol = { c, next };
      pos_ += 2;
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      symbol = { c };
      ++pos_;
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      symbol = { static_cast<char>(std::toupper(c)) };
      atom.aromatic = true;
      ++pos_;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
      fail(SmilesError::Kind::kUnsupportedElement, pos_,
           std::string("unsupported atom '") + c + "'");
    } else {
      fail(SmilesError::Kind::kSyntax, pos_,
           std::string("unexpected character '") + c + "'");
    }
    atom.element = *element_from_symbol(symbol);
    return atom;
  }

  int read_count() {
    int value = 0;
    bool any = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      any = true;
      ++pos_;
    }
    return any ? value : -1;
  }

  RawAtom read_bracket_atom() {
    RawAtom atom;
    atom.bracket = true;
    atom.position = pos_;
    ++pos_;  // '['

    auto at_end = [this] { return pos_ >= text_.size(); };
    auto peek = [this] { return text_[pos_]; };

    if (at_end())
      fail(SmilesError::Kind::kSyntax, atom.position, "unterminated bracket atom");
    if (std::isdigit(static_cast<unsigned char>(peek())))
      fail(SmilesError::Kind::kSyntax, pos_, "isotopes are not supported");

    const std::size_t symbol_pos = pos_;
    std::string symbol;
    if (std::isupper(static_cast<unsigned char>(peek()))) {
      symbol.push_back(peek());
      ++pos_;
      if (!at_end() && std::islower(static_cast<unsigned char>(peek()))) {
        symbol.push_back(peek());
        ++pos_;
      }
    } else if (std::islower(static_cast<unsigned char>(peek()))) {
      symbol.push_back(peek());
      ++pos_;
      if (!at_end() && std::islower(static_cast<unsigned char>(peek()))) {
        fail(SmilesError::Kind::kUnsupportedElement, symbol_pos,
             "unsupported aromatic atom '" + symbol + peek() + "'");
      }
      if (std::string_view("bcnops").find(symbol[0]) == std::string_view::npos) {
        fail(SmilesError::Kind::kUnsupportedElement, symbol_pos,
             "unsupported aromatic atom '" + symbol + "'");
      }
      symbol[0] = static_cast<char>(std::toupper(symbol[0]));
      atom.aromatic = true;
    } else if (peek() == '*') {
      fail(SmilesError::Kind::kUnsupportedElement, pos_, "wildcard atoms are not supported");
    } else {
      fail(SmilesError::Kind::kSyntax, pos_, "expected element symbol");
    }

    auto element = element_from_symbol(symbol);
    if (!element) {
      fail(SmilesError::Kind::kUnsupportedElement, symbol_pos,
           "unsupported element '" + symbol + "'");
    }
    atom.element = *element;

    if (!at_end() && peek() == '@')
      fail(SmilesError::Kind::kSyntax, pos_, "stereochemistry is not supported");

    if (!at_end() && peek() == 'H') {
      ++pos_;
      const int count = read_count();
      atom.hcount = count < 0 ? 1 : count;
    }

    if (!at_end() && (peek() == '+' || peek() == '-')) {
      const char sign_char = peek();
      const int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      const int count = read_count();
      if (count >= 0) {
        magnitude = count;
      } else {
        while (!at_end() && peek() == sign_char) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = sign * magnitude;
    }

    if (!at_end() && peek() == ':')
      fail(SmilesError::Kind::kSyntax, pos_, "atom classes are not supported");
    if (at_end() || peek() != ']')
      fail(SmilesError::Kind::kSyntax, at_end() ? text_.size() : pos_, "expected ']'");
    ++pos_;
    return atom;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int prev_ = -1;
  std::optional<int> pending_;
  std::size_t pending_pos_ = 0;
  bool expect_atom_after_branch_ = false;
  std::vector<int> branches_;
  std::map<int, RingOpening> rings_;
};

// Perfect matching of pi-candidate atoms over aromatic bonds. The atom with
// the fewest open choices is always expanded first, which keeps fused ring
// systems close to linear time.
class Kekulizer {
public:
  Kekulizer(int num_atoms, const std::vector<RawBond> &bonds,
            const std::vector<bool> &candidate)
      : candidate_(candidate), mate_(num_atoms, -1), options_(num_atoms) {
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      const RawBond &bond = bonds[b];
      if (bond.order != kAromaticBond || !candidate[bond.begin] || !candidate[bond.end])
        continue;
      options_[bond.begin].push_back(bond.end);
      options_[bond.end].push_back(bond.begin);
    }
  }

  bool solve() {
    int best = -1;
    std::size_t best_open = 0;
    for (std::size_t u = 0; u < mate_.size(); ++u) {
      if (!candidate_[u] || mate_[u] >= 0)
        continue;
      std::size_t open = 0;
      for (int v: options_[u])
        open += mate_[v] < 0 ? 1 : 0;
      if (best < 0 || open < best_open) {
        best = static_cast<int>(u);
        best_open = open;
      }
    }
    if (best < 0)
      return true;
    if (best_open == 0)
      return false;

    for (int v: options_[best]) {
      if (mate_[v] >= 0)
        continue;
      mate_[best] = v;
      mate_[v] = best;
      if (solve())
        return true;
      mate_[best] = -1;
      mate_[v] = -1;
    }
    return false;
  }

  int mate(int atom) const { return mate_[atom]; }

private:
  const std::vector<bool> &candidate_;
  std::vector<int> mate_;
  std::vector<std::vector<int>> options_;
};

void kekulize(std::vector<RawAtom> &atoms, std::vector<RawBond> &bonds) {
  const int n = static_cast<int>(atoms.size());
  std::vector<int> base(n, 0);
  bool any_aromatic = false;
  for (const RawBond &bond: bonds) {
    const int contribution = bond.order == kAromaticBond ? 1 : bond.order;
    base[bond.begin] += contribution;
    base[bond.end] += contribution;
    any_aromatic |= bond.order == kAromaticBond;
  }
  if (!any_aromatic && std::none_of(atoms.begin(), atoms.end(),
                                    [](const RawAtom &a) { return a.aromatic; }))
    return;

  // An aromatic atom takes part in one double bond iff its lowest valence
  // still has room after its sigma bonds and hydrogens.
  std::vector<bool> candidate(n, false);
  for (int i = 0; i < n; ++i) {
    const RawAtom &atom = atoms[i];
    if (!atom.aromatic)
      continue;
    const int lowest = allowed_valences(atom.element, atom.charge).front();
    candidate[i] = lowest >= base[i] + atom.hcount + 1;
  }

  Kekulizer solver(n, bonds, candidate);
  if (!solver.solve()) {
    std::size_t pos = 0;
    for (int i = 0; i < n; ++i) {
      if (candidate[i]) {
        pos = atoms[i].position;
        break;
      }
    }
    throw SmilesError(SmilesError::Kind::kValence, pos,
                      "cannot assign a Kekule structure to the aromatic system");
  }

  for (RawBond &bond: bonds) {
    if (bond.order != kAromaticBond)
      continue;
    bond.order = solver.mate(bond.begin) == bond.end ? 2 : 1;
  }
}

std::vector<bool> ring_atoms(int n, const std::vector<RawBond> &bonds) {
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    adj[bonds[b].begin].emplace_back(bonds[b].end, static_cast<int>(b));
    adj[bonds[b].end].emplace_back(bonds[b].begin, static_cast<int>(b));
  }

  // Tarjan bridge finding; every non-bridge bond lies on a cycle.
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> bridge(bonds.size(), false);
  int timer = 0;
  auto dfs = [&](auto &&self, int u, int parent_bond) -> void {
    disc[u] = low[u] = timer++;
    for (auto [v, b]: adj[u]) {
      if (b == parent_bond)
        continue;
      if (disc[v] >= 0) {
        low[u] = std::min(low[u], disc[v]);
      } else {
        self(self, v, b);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u])
          bridge[b] = true;
      }
    }
  };
  for (int i = 0; i < n; ++i) {
    if (disc[i] < 0)
      dfs(dfs, i, -1);
  }

  std::vector<bool> in_ring(n, false);
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    if (!bridge[b]) {
      in_ring[bonds[b].begin] = true;
      in_ring[bonds[b].end] = true;
    }
  }
  return in_ring;
}

std::string error_text(SmilesError::Kind kind, std::size_t position, const std::string &message) {
  std::ostringstream os;
  os << describe(kind) << " at position " << position << ": " << message;
  return os.str();
}

}  // namespace

SmilesError::SmilesError(Kind kind, std::size_t position, const std::string &message)
    : DataError(error_text(kind, position, message)),
      kind_(kind), position_(position) { }

MolecularGraph parse_smiles(std::string_view text) {
  SmilesReader reader(text);
  reader.read();
  std::vector<RawAtom> &atoms = reader.atoms;
  std::vector<RawBond> &bonds = reader.bonds;
  const int n = static_cast<int>(atoms.size());

  kekulize(atoms, bonds);

  MolecularGraph graph;
  graph.source_smiles = std::string(text);
  graph.atoms.resize(n);
  graph.adjacency = AdjacencyMatrix::Constant(n, n, false);

  std::vector<int> bond_sum(n, 0);
  for (const RawBond &bond: bonds) {
    graph.adjacency(bond.begin, bond.end) = true;
    graph.adjacency(bond.end, bond.begin) = true;
    bond_sum[bond.begin] += bond.order;
    bond_sum[bond.end] += bond.order;
    ++graph.atoms[bond.begin].explicit_degree;
    ++graph.atoms[bond.end].explicit_degree;
  }

  const std::vector<bool> in_ring = ring_atoms(n, bonds);
  for (int i = 0; i < n; ++i) {
    const RawAtom &raw = atoms[i];
    Atom &atom = graph.atoms[i];
    atom.element = raw.element;
    atom.formal_charge = raw.charge;
    atom.in_ring = in_ring[i];

    const std::vector<int> valences = allowed_valences(raw.element, raw.charge);
    if (raw.bracket) {
      atom.implicit_h = raw.hcount;
      if (bond_sum[i] + raw.hcount > valences.back()) {
        throw SmilesError(SmilesError::Kind::kValence, raw.position,
                          std::string(element_symbol(raw.element)) + " with "
                              + std::to_string(bond_sum[i] + raw.hcount)
                              + " bonds exceeds its maximum valence");
      }
    } else {
      auto it = std::find_if(valences.begin(), valences.end(),
                             [&](int v) { return v >= bond_sum[i]; });
      if (it == valences.end()) {
        throw SmilesError(SmilesError::Kind::kValence, raw.position,
                          std::string(element_symbol(raw.element)) + " with bond order sum "
                              + std::to_string(bond_sum[i])
                              + " exceeds its maximum valence");
      }
      atom.implicit_h = *it - bond_sum[i];
    }
  }

  // Connectivity.
  std::vector<bool> seen(n, false);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = true;
  int reached = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int v = 0; v < n; ++v) {
      if (graph.adjacency(u, v) && !seen[v]) {
        seen[v] = true;
        ++reached;
        queue.push(v);
      }
    }
  }
  if (reached != n)
    throw SmilesError(SmilesError::Kind::kDisconnected, 0, "atoms are not all connected");

  return graph;
}

}  // namespace molshift
