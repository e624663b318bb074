//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/molgraph/element.hpp"

#include <array>

namespace molshift {
namespace {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  int valence_electrons;
  bool expanded_octet;
};

constexpr std::array<ElementInfo, kNumElements> kElementTable = { {
    { "H", 1, 1, false },
    { "B", 5, 3, false },
    { "C", 6, 4, false },
    { "N", 7, 5, false },
    { "O", 8, 6, false },
    { "F", 9, 7, false },
    { "P", 15, 5, true },
    { "S", 16, 6, true },
    { "Cl", 17, 7, false },
    { "Br", 35, 7, false },
    { "I", 53, 7, false },
} };

const ElementInfo &info(Element element) {
  return kElementTable[static_cast<std::size_t>(element)];
}

}  // namespace

std::string_view element_symbol(Element element) {
  return info(element).symbol;
}

std::optional<Element> element_from_symbol(std::string_view symbol) {
  for (std::size_t i = 0; i < kElementTable.size(); ++i) {
    if (kElementTable[i].symbol == symbol)
      return static_cast<Element>(i);
  }
  return std::nullopt;
}

int atomic_number(Element element) {
  return info(element).atomic_number;
}

std::vector<int> allowed_valences(Element element, int formal_charge) {
  if (element == Element::kH)
    return { formal_charge == 0 ? 1 : 0 };

  const ElementInfo &ei = info(element);
  const int ve = ei.valence_electrons - formal_charge;
  if (ve <= 0 || ve >= 8)
    return { 0 };
  if (ve <= 4)
    return { ve };

  // Halogens stay monovalent; the octet-expanding elements of period 3
  // gain the hypervalent states in steps of two.
  if (ei.expanded_octet && ve == 5)
    return { 3, 5 };
  if (ei.expanded_octet && ve == 6)
    return { 2, 4, 6 };
  return { 8 - ve };
}

}  // namespace molshift
