//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

#include "molshift/molgraph/encode.hpp"
#include "molshift/molgraph/graph.hpp"
#include "molshift/molgraph/smiles.hpp"

namespace {

using molshift::AtomVocab;
using molshift::Element;
using molshift::MolecularGraph;
using molshift::parse_smiles;
using molshift::SmilesError;
using testing::ElementsAre;
using testing::ElementsAreArray;

std::vector<int> split_ints(const std::string &field) {
  std::vector<int> values;
  std::stringstream ss(field);
  std::string item;
  while (std::getline(ss, item, ','))
    values.push_back(std::stoi(item));
  return values;
}

std::vector<std::string> read_lines(const std::string &name) {
  std::ifstream in(std::string(MOLSHIFT_TEST_DATA_DIR) + "/" + name);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty())
      lines.push_back(line);
  }
  return lines;
}

std::vector<int> implicit_h(const MolecularGraph &g) {
  std::vector<int> out;
  for (const auto &a: g.atoms)
    out.push_back(a.implicit_h);
  return out;
}

// Floyd-Warshall over the adjacency matrix, with no threshold applied.
Eigen::MatrixXi floyd_warshall(const MolecularGraph &g) {
  const int n = g.num_atoms();
  const int inf = 1 << 20;
  Eigen::MatrixXi d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      d(i, j) = i == j ? 0 : (g.adjacency(i, j) ? 1 : inf);
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    }
  }
  return d;
}

SmilesError::Kind error_kind(const std::string &smiles) {
  try {
    parse_smiles(smiles);
  } catch (const SmilesError &e) {
    return e.kind();
  }
  ADD_FAILURE() << smiles << " parsed without error";
  return SmilesError::Kind::kSyntax;
}

TEST(ParseSmiles, Methane) {
  const MolecularGraph g = parse_smiles("C");
  ASSERT_EQ(g.num_atoms(), 1);
  EXPECT_EQ(g.atoms[0].explicit_degree, 0);
  EXPECT_EQ(g.atoms[0].implicit_h, 4);
}

TEST(ParseSmiles, Ethanol) {
  const MolecularGraph g = parse_smiles("CCO");
  std::vector<int> total;
  for (const auto &a: g.atoms)
    total.push_back(a.total_neighbors());
  EXPECT_THAT(total, ElementsAre(4, 4, 2));
  EXPECT_THAT(implicit_h(g), ElementsAre(3, 2, 1));
}

TEST(ParseSmiles, AromaticAndKekuleBenzeneMatch) {
  const MolecularGraph aromatic = parse_smiles("c1ccccc1");
  const MolecularGraph kekule = parse_smiles("C1=CC=CC=C1");
  EXPECT_EQ(aromatic.atoms, kekule.atoms);
  EXPECT_EQ(aromatic.adjacency, kekule.adjacency);
  EXPECT_THAT(implicit_h(aromatic), ElementsAre(1, 1, 1, 1, 1, 1));
  for (const auto &a: aromatic.atoms)
    EXPECT_TRUE(a.in_ring);
}

TEST(ParseSmiles, BracketAtoms) {
  const MolecularGraph ammonium = parse_smiles("[NH4+]");
  EXPECT_EQ(ammonium.atoms[0].implicit_h, 4);
  EXPECT_EQ(ammonium.atoms[0].formal_charge, 1);

  const MolecularGraph acetate = parse_smiles("CC(=O)[O-]");
  EXPECT_THAT(implicit_h(acetate), ElementsAre(3, 0, 0, 0));
  EXPECT_EQ(acetate.atoms[3].formal_charge, -1);

  EXPECT_EQ(parse_smiles("[O--]").atoms[0].formal_charge, -2);
  EXPECT_EQ(parse_smiles("[N+2]").atoms[0].formal_charge, 2);
  EXPECT_EQ(parse_smiles("[H][H]").num_atoms(), 2);
}

TEST(ParseSmiles, RingClosuresAndBranches) {
  const MolecularGraph g = parse_smiles("C%10CC%10");
  EXPECT_EQ(g.num_edges(), 3);
  const MolecularGraph h = parse_smiles("C1CCCCC=1");
  EXPECT_THAT(implicit_h(h), ElementsAre(1, 2, 2, 2, 2, 1));
  const MolecularGraph b = parse_smiles("CC(C)(C)C");
  EXPECT_EQ(b.atoms[1].explicit_degree, 4);
  EXPECT_FALSE(b.atoms[1].in_ring);
  EXPECT_EQ(parse_smiles("C/C=C\\C").num_atoms(), 4);
}

TEST(ParseSmiles, HydrogenCountsMatchReferenceToolkit) {
  // Frozen from an independent cheminformatics toolkit.
  for (const std::string &line: read_lines("hcount_reference.tsv")) {
    std::stringstream ss(line);
    std::string smiles, hs, degrees;
    std::getline(ss, smiles, '\t');
    std::getline(ss, hs, '\t');
    std::getline(ss, degrees, '\t');

    const MolecularGraph g = parse_smiles(smiles);
    std::vector<int> deg;
    for (const auto &a: g.atoms)
      deg.push_back(a.explicit_degree);
    EXPECT_THAT(implicit_h(g), ElementsAreArray(split_ints(hs))) << smiles;
    EXPECT_THAT(deg, ElementsAreArray(split_ints(degrees))) << smiles;
  }
}

TEST(ParseSmiles, SyntaxErrorsReportPosition) {
  try {
    parse_smiles("CC(C");
    FAIL();
  } catch (const SmilesError &e) {
    EXPECT_EQ(e.kind(), SmilesError::Kind::kSyntax);
    EXPECT_EQ(e.position(), 4u);
    EXPECT_THAT(e.what(), testing::HasSubstr("position 4"));
  }
  try {
    parse_smiles("CC)C");
    FAIL();
  } catch (const SmilesError &e) {
    EXPECT_EQ(e.position(), 2u);
  }

  EXPECT_EQ(error_kind(""), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("C1CC"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("C=1CC#1"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("C=(C)C"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("CC="), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("C()C"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("[C@H](F)(Cl)Br"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("[13CH4]"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("[CH4"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("C11"), SmilesError::Kind::kSyntax);
  EXPECT_EQ(error_kind("C:C"), SmilesError::Kind::kSyntax);
}

TEST(ParseSmiles, UnsupportedElements) {
  EXPECT_EQ(error_kind("[Na+]"), SmilesError::Kind::kUnsupportedElement);
  EXPECT_EQ(error_kind("[Se]"), SmilesError::Kind::kUnsupportedElement);
  EXPECT_EQ(error_kind("c1cc[se]c1"), SmilesError::Kind::kUnsupportedElement);
  EXPECT_EQ(error_kind("CX"), SmilesError::Kind::kUnsupportedElement);
  EXPECT_EQ(error_kind("C*"), SmilesError::Kind::kUnsupportedElement);
}

TEST(ParseSmiles, ValenceViolations) {
  EXPECT_EQ(error_kind("C(C)(C)(C)(C)C"), SmilesError::Kind::kValence);
  EXPECT_EQ(error_kind("FC(F)=F"), SmilesError::Kind::kValence);
  EXPECT_EQ(error_kind("O=O=O"), SmilesError::Kind::kValence);
  EXPECT_EQ(error_kind("[CH5]"), SmilesError::Kind::kValence);
  EXPECT_EQ(error_kind("c1cccc1"), SmilesError::Kind::kValence);
}

TEST(ParseSmiles, MultiFragmentRejected) {
  EXPECT_EQ(error_kind("C.C"), SmilesError::Kind::kDisconnected);
  EXPECT_EQ(error_kind("[Na+].[Cl-]"), SmilesError::Kind::kUnsupportedElement);
}

TEST(ParseSmiles, ValenceInvariantHolds) {
  for (const std::string &smiles: read_lines("corpus_smiles.txt")) {
    const MolecularGraph g = parse_smiles(smiles);
    for (const auto &a: g.atoms) {
      EXPECT_GE(a.implicit_h, 0);
      const auto valences = molshift::allowed_valences(a.element, a.formal_charge);
      EXPECT_LE(a.total_neighbors(), valences.back()) << smiles;
    }
    EXPECT_EQ(g.adjacency, g.adjacency.transpose());
    EXPECT_FALSE(g.adjacency.diagonal().any());
  }
}

TEST(AllowedValences, ChargeAdjusted) {
  EXPECT_THAT(molshift::allowed_valences(Element::kN, 1), ElementsAre(4));
  EXPECT_THAT(molshift::allowed_valences(Element::kO, -1), ElementsAre(1));
  EXPECT_THAT(molshift::allowed_valences(Element::kS, 0), ElementsAre(2, 4, 6));
  EXPECT_THAT(molshift::allowed_valences(Element::kP, 0), ElementsAre(3, 5));
  EXPECT_THAT(molshift::allowed_valences(Element::kCl, -1), ElementsAre(0));
  EXPECT_THAT(molshift::allowed_valences(Element::kB, 0), ElementsAre(3));
}

std::pair<std::string, std::string> split_pair(const std::string &line) {
  const auto tab = line.find('\t');
  return { line.substr(0, tab), line.substr(tab + 1) };
}

TEST(FoldResonance, NotationVariantsFoldTogether) {
  const auto pairs = read_lines("folding_pairs.txt");
  ASSERT_GE(pairs.size(), 10u);
  for (const std::string &line: pairs) {
    const auto [aromatic, kekule] = split_pair(line);
    const MolecularGraph a = molshift::fold_resonance(parse_smiles(aromatic));
    const MolecularGraph b = molshift::fold_resonance(parse_smiles(kekule));
    EXPECT_EQ(a.atoms, b.atoms) << aromatic << " vs " << kekule;
    EXPECT_EQ(a.adjacency, b.adjacency) << aromatic << " vs " << kekule;
    EXPECT_TRUE(molshift::is_isomorphic(a, b));
  }
}

TEST(FoldResonance, PyridineSpellingsAreIsomorphic) {
  // Different starting atoms give different atom orders.
  const MolecularGraph a = molshift::fold_resonance(parse_smiles("c1ccncc1"));
  const MolecularGraph b = molshift::fold_resonance(parse_smiles("N1=CC=CC=C1"));
  EXPECT_NE(a.atoms, b.atoms);
  EXPECT_TRUE(molshift::is_isomorphic(a, b));
}

TEST(FoldResonance, ChargeSeparatedFormsFold) {
  // Nitro group written with and without the charge on nitrogen moved around.
  const MolecularGraph a = molshift::fold_resonance(parse_smiles("C[N+](=O)[O-]"));
  const MolecularGraph b = molshift::fold_resonance(parse_smiles("C[N+]([O-])=O"));
  EXPECT_TRUE(molshift::is_isomorphic(a, b));
  for (const auto &atom: a.atoms)
    EXPECT_EQ(atom.formal_charge, 0);
}

TEST(FoldResonance, AcyclicUnchangedAndIdempotent) {
  const MolecularGraph g = parse_smiles("CCO");
  const MolecularGraph once = molshift::fold_resonance(g);
  EXPECT_EQ(once.atoms, g.atoms);
  EXPECT_EQ(once.adjacency, g.adjacency);
  for (const std::string &smiles: read_lines("corpus_smiles.txt")) {
    const MolecularGraph f = molshift::fold_resonance(parse_smiles(smiles));
    const MolecularGraph ff = molshift::fold_resonance(f);
    EXPECT_EQ(f.atoms, ff.atoms);
    EXPECT_EQ(f.adjacency, ff.adjacency);
  }
}

TEST(Isomorphism, DistinguishesDifferentMolecules) {
  EXPECT_TRUE(molshift::is_isomorphic(parse_smiles("CCO"), parse_smiles("OCC")));
  EXPECT_TRUE(molshift::is_isomorphic(parse_smiles("CC(C)CO"), parse_smiles("OCC(C)C")));
  EXPECT_FALSE(molshift::is_isomorphic(parse_smiles("CCO"), parse_smiles("COC")));
  EXPECT_FALSE(molshift::is_isomorphic(parse_smiles("CCCCCC"), parse_smiles("C1CCCCC1")));
  // Same degree sequence and labels, different wiring.
  EXPECT_FALSE(molshift::is_isomorphic(parse_smiles("C1CCC2CCCC2C1"),
                                       parse_smiles("C1CCC(CC1)C1CC1")));
}

TEST(TotalCentrality, Examples) {
  EXPECT_THAT(molshift::total_centrality(parse_smiles("C")), ElementsAre(4));
  EXPECT_THAT(molshift::total_centrality(parse_smiles("c1ccccc1")),
              ElementsAre(3, 3, 3, 3, 3, 3));
  EXPECT_THAT(molshift::total_centrality(parse_smiles("OS(=O)(=O)(O)")),
              ElementsAre(2, 4, 1, 1, 2));
}

TEST(TotalCentrality, FollowsAtomPermutation) {
  EXPECT_THAT(molshift::total_centrality(parse_smiles("CCO")), ElementsAre(4, 4, 2));
  EXPECT_THAT(molshift::total_centrality(parse_smiles("OCC")), ElementsAre(2, 4, 4));
  EXPECT_THAT(molshift::total_centrality(parse_smiles("NC(=O)C")), ElementsAre(3, 3, 1, 4));
  EXPECT_THAT(molshift::total_centrality(parse_smiles("CC(N)=O")), ElementsAre(4, 3, 3, 1));
}

TEST(ShortestPaths, BenzeneRing) {
  const MolecularGraph g = parse_smiles("c1ccccc1");
  const Eigen::MatrixXi d = molshift::shortest_paths(g, 5);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j)
      EXPECT_EQ(d(i, j), std::min(std::abs(i - j), 6 - std::abs(i - j)));
  }
  EXPECT_EQ(d.maxCoeff(), 3);

  const Eigen::MatrixXi d2 = molshift::shortest_paths(g, 2);
  EXPECT_EQ(d2(0, 3), 3);  // far bucket = d_max + 1
  EXPECT_EQ(d2(1, 4), 3);
  EXPECT_EQ(d2(0, 2), 2);
}

TEST(ShortestPaths, LongChainBeyondThreshold) {
  const Eigen::MatrixXi d = molshift::shortest_paths(parse_smiles("CCCCCCCC"), 5);
  EXPECT_EQ(d(0, 7), 6);
  EXPECT_EQ(d(0, 5), 5);
  EXPECT_EQ(d(0, 6), 6);
  EXPECT_THROW(molshift::shortest_paths(parse_smiles("CC"), 0), std::invalid_argument);
}

TEST(ShortestPaths, MatchesFloydWarshallOnCorpus) {
  for (const std::string &smiles: read_lines("corpus_smiles.txt")) {
    const MolecularGraph g = parse_smiles(smiles);
    const Eigen::MatrixXi exact = floyd_warshall(g);
    for (int d_max = 1; d_max <= 6; ++d_max) {
      const Eigen::MatrixXi d = molshift::shortest_paths(g, d_max);
      for (int i = 0; i < g.num_atoms(); ++i) {
        for (int j = 0; j < g.num_atoms(); ++j) {
          const int expected = exact(i, j) > d_max ? d_max + 1 : exact(i, j);
          ASSERT_EQ(d(i, j), expected) << smiles << " d_max=" << d_max;
        }
      }
    }
  }
}

TEST(Encode, BenzeneWithoutTask) {
  const auto enc = molshift::encode(parse_smiles("c1ccccc1"), AtomVocab::organic());
  EXPECT_EQ(enc.num_nodes(), 6);
  EXPECT_EQ(enc.spd.rows(), 6);
  EXPECT_EQ(enc.spd.cols(), 6);
  EXPECT_THAT(enc.centrality, ElementsAre(3, 3, 3, 3, 3, 3));
  EXPECT_THAT(enc.atom_type_ids, ElementsAre(2, 2, 2, 2, 2, 2));
}

TEST(Encode, BenzeneWithTaskNode) {
  const auto enc =
      molshift::encode(parse_smiles("c1ccccc1"), AtomVocab::organic(), 5, 2);
  ASSERT_EQ(enc.num_nodes(), 7);
  EXPECT_EQ(enc.task_bucket(), 7);
  EXPECT_EQ(enc.far_bucket(), 6);
  for (int j = 0; j < 7; ++j) {
    EXPECT_EQ(enc.spd(6, j), 7);
    EXPECT_EQ(enc.spd(j, 6), 7);
  }
  EXPECT_EQ(enc.spd.topLeftCorner(6, 6), molshift::shortest_paths(parse_smiles("c1ccccc1"), 5));
  EXPECT_EQ(molshift::with_task(enc, std::nullopt),
            molshift::encode(parse_smiles("c1ccccc1"), AtomVocab::organic()));
}

TEST(Encode, CentralityClamped) {
  const MolecularGraph g = parse_smiles("C");
  EXPECT_EQ(molshift::encode(g, AtomVocab::organic()).centrality[0], 4);
  EXPECT_LE(molshift::kMaxCentrality, 8);
}

TEST(Encode, Errors) {
  EXPECT_THROW(molshift::encode(parse_smiles("CC"), AtomVocab()), std::invalid_argument);
  const AtomVocab carbon_only({ Element::kC });
  EXPECT_THROW(molshift::encode(parse_smiles("CO"), carbon_only), molshift::DataError);
  EXPECT_NO_THROW(molshift::encode(parse_smiles("CC"), carbon_only));
}

TEST(GraphJson, DebugDump) {
  const auto json = molshift::to_json(parse_smiles("C[O-]"));
  EXPECT_EQ(json["atoms"].size(), 2u);
  EXPECT_EQ(json["atoms"][1]["element"], "O");
  EXPECT_EQ(json["atoms"][1]["charge"], -1);
  EXPECT_EQ(json["atoms"][0]["implicit_h"], 3);
  EXPECT_EQ(json["edges"], nlohmann::json::parse("[[0,1]]"));
}

}  // namespace
