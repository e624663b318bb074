//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Generates the bundled toy corpus: small drug-like molecules built from
// scaffolds and substituents, with synthetic targets computed from graph
// statistics.
//
//   make_toy_data <out_dir> [count] [seed]
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "molshift/molgraph/graph.hpp"
#include "molshift/molgraph/smiles.hpp"

namespace {

using namespace molshift;

const std::vector<std::string> kScaffolds = {
  "{A}CC{B}",           "{A}C(C){B}",        "{A}c1ccc({B})cc1",  "{A}c1ccccc1{B}",
  "{A}C1CCC({B})CC1",   "{A}c1ccc({B})nc1",  "{A}C(=O)N{B}",      "{A}OCC{B}",
  "{A}c1ccoc1{B}",      "{A}C=CC{B}",        "{A}CCN{B}",         "{A}c1ccsc1{B}",
  "{A}C1CC({B})C1",     "{A}c1cnc({B})nc1",  "{A}CC(=O){B}",      "{A}C1CCN({B})CC1",
};

const std::vector<std::string> kPrefixes = {
  "", "C", "CC", "O", "N", "F", "Cl", "N#C", "O=C(O)", "CC(C)", "FC(F)(F)", "Br", "CS", "NC(=O)",
};

const std::vector<std::string> kSuffixes = {
  "", "C", "O", "N", "F", "Cl", "C#N", "C(=O)O", "OC", "CC", "C(C)C", "C(F)(F)F", "Br", "S",
  "C(N)=O", "CO",
};

double electronegativity(Element e) {
  switch (e) {
  case Element::kH:
    return 2.20;
  case Element::kB:
    return 2.04;
  case Element::kC:
    return 2.55;
  case Element::kN:
    return 3.04;
  case Element::kO:
    return 3.44;
  case Element::kF:
    return 3.98;
  case Element::kP:
    return 2.19;
  case Element::kS:
    return 2.58;
  case Element::kCl:
    return 3.16;
  case Element::kBr:
    return 2.96;
  case Element::kI:
    return 2.66;
  }
  return 2.5;
}

std::string fill(std::string scaffold, const std::string &a, const std::string &b) {
  scaffold.replace(scaffold.find("{A}"), 3, a);
  const auto pos = scaffold.find("{B}");
  // An empty substituent inside parentheses would leave "()".
  if (b.empty() && pos > 0 && scaffold[pos - 1] == '(') {
    scaffold.erase(pos - 1, 4);
  } else {
    scaffold.replace(pos, 3, b);
  }
  return scaffold;
}

struct AtomTargets {
  std::vector<double> charge, fukui_e, fukui_n, nmr;
};

AtomTargets atom_targets(const MolecularGraph &g) {
  const std::vector<int> cent = total_centrality(g);
  const Eigen::MatrixXi spd = shortest_paths(g, 4);
  AtomTargets t;
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atoms[static_cast<std::size_t>(i)];
    double en_sum = electronegativity(Element::kH) * a.implicit_h;
    for (int j: g.neighbors(i))
      en_sum += electronegativity(g.atoms[static_cast<std::size_t>(j)].element);
    const int n_nb = a.total_neighbors();
    const double en_mean = n_nb > 0 ? en_sum / n_nb : electronegativity(a.element);
    t.charge.push_back(0.25 * (electronegativity(a.element) - en_mean));
    t.fukui_e.push_back(1.0 / (1.0 + cent[static_cast<std::size_t>(i)]) + (a.in_ring ? 0.15 : 0.0));
    int near = 0, hetero = 0;
    for (int j = 0; j < g.num_atoms(); ++j) {
      if (j != i && spd(i, j) <= 2) {
        ++near;
        hetero += g.atoms[static_cast<std::size_t>(j)].element != Element::kC;
      }
    }
    t.fukui_n.push_back(static_cast<double>(hetero) / (1.0 + near));
    // Toy stand-in for a shielding value: the total centrality itself.
    t.nmr.push_back(cent[static_cast<std::size_t>(i)]);
  }
  return t;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char **argv) {
  if (argc < 2) {
    std::cerr << "usage: make_toy_data <out_dir> [count] [seed]\n";
    return 1;
  }
  const std::filesystem::path out = argv[1];
  const std::size_t count = argc > 2 ? std::stoul(argv[2]) : 200;
  const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 2026;
  std::filesystem::create_directories(out);

  std::vector<std::string> candidates;
  for (const auto &s: kScaffolds) {
    for (const auto &a: kPrefixes) {
      for (const auto &b: kSuffixes)
        candidates.push_back(fill(s, a, b));
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  std::vector<std::string> smiles;
  std::vector<MolecularGraph> graphs;
  for (const auto &c: candidates) {
    if (smiles.size() == count)
      break;
    MolecularGraph g;
    try {
      g = fold_resonance(parse_smiles(c));
    } catch (const std::exception &) {
      continue;
    }
    if (g.num_atoms() < 3 || g.num_atoms() > 20)
      continue;
    const bool seen = std::any_of(graphs.begin(), graphs.end(),
                                  [&](const MolecularGraph &h) { return is_isomorphic(g, h); });
    if (seen)
      continue;
    smiles.push_back(c);
    graphs.push_back(std::move(g));
  }
  if (smiles.size() < count) {
    std::cerr << "only " << smiles.size() << " distinct molecules available\n";
    return 2;
  }

  std::ofstream atoms(out / "atoms.jsonl");
  std::ofstream mols(out / "molecules.csv");
  std::ofstream down(out / "downstream.csv");
  std::ofstream down_bin(out / "downstream_binary.csv");
  mols << "smiles,target\n";
  down << "smiles,target\n";
  down_bin << "smiles,target\n";

  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> mean_cent(graphs.size());
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    const std::vector<int> cent = total_centrality(graphs[m]);
    double sum = 0.0;
    for (int c: cent)
      sum += c;
    mean_cent[m] = sum / static_cast<double>(cent.size());
  }
  std::vector<double> sorted = mean_cent;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];

  for (std::size_t m = 0; m < graphs.size(); ++m) {
    const MolecularGraph &g = graphs[m];
    const AtomTargets t = atom_targets(g);
    nlohmann::json rec;
    rec["smiles"] = smiles[m];
    rec["atom_props"] = { { "charge", t.charge },
                          { "fukui_e", t.fukui_e },
                          { "fukui_n", t.fukui_n },
                          { "nmr", t.nmr } };
    atoms << rec.dump() << "\n";

    // Molecule-level stand-in for a gap: heteroatom and ring content.
    double hetero = 0.0, ring = 0.0, abs_charge = 0.0;
    for (std::size_t i = 0; i < g.atoms.size(); ++i) {
      hetero += g.atoms[i].element != Element::kC;
      ring += g.atoms[i].in_ring;
      abs_charge += std::abs(t.charge[i]);
    }
    const double n = g.num_atoms();
    mols << smiles[m] << "," << num(6.0 - 2.0 * ring / n + 1.5 * hetero / n + abs_charge) << "\n";

    // Downstream: noisy function of centrality statistics.
    int terminal = 0;
    for (int c: total_centrality(g))
      terminal += c == 1;
    const double y = mean_cent[m] + 0.5 * terminal / n + noise(rng);
    down << smiles[m] << "," << num(y) << "\n";
    down_bin << smiles[m] << "," << (mean_cent[m] > median ? 1 : 0) << "\n";
  }
  std::cout << "wrote " << smiles.size() << " molecules to " << out.string() << "\n";
  return 0;
}
