//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_MOLGRAPH_SMILES_HPP_
#define MOLSHIFT_MOLGRAPH_SMILES_HPP_

#include <cstddef>
#include <string>
#include <string_view>

#include "molshift/errors.hpp"
#include "molshift/molgraph/graph.hpp"

namespace molshift {

class SmilesError: public DataError {
public:
  enum class Kind {
    kSyntax,
    kUnsupportedElement,
    kValence,
    kDisconnected,
  };

  SmilesError(Kind kind, std::size_t position, const std::string &message);

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

private:
  Kind kind_;
  std::size_t position_;
};

/// Parses a single-fragment SMILES over B, C, N, O, P, S, F, Cl, Br, I and H.
///
/// Supported: the organic subset with aromatic lowercase forms, bracket atoms
/// with explicit hydrogen counts and charges, branches, ring closures
/// (including %nn), and the bond symbols - = # : / \ (the directional bonds
/// are read as single bonds). Stereo markers, isotopes, atom classes and
/// wildcards are rejected.
///
/// Aromatic systems are kekulized before hydrogens are assigned, so aromatic
/// and Kekule spellings of one molecule produce identical graphs. Implicit
/// hydrogens take the smallest allowed valence that covers the bond-order sum.
MolecularGraph parse_smiles(std::string_view text);

}  // namespace molshift

#endif  // MOLSHIFT_MOLGRAPH_SMILES_HPP_
