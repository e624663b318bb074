//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_MOLGRAPH_ELEMENT_HPP_
#define MOLSHIFT_MOLGRAPH_ELEMENT_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace molshift {

// The supported element subset, in atomic-number order.
enum class Element: std::uint8_t {
  kH,
  kB,
  kC,
  kN,
  kO,
  kF,
  kP,
  kS,
  kCl,
  kBr,
  kI,
};

inline constexpr int kNumElements = 11;

std::string_view element_symbol(Element element);

std::optional<Element> element_from_symbol(std::string_view symbol);

int atomic_number(Element element);

/// Allowed total valences for an element carrying the given formal charge,
/// ascending. Charged atoms take the valences of their isoelectronic
/// neighbor (N+ behaves like C, O- like F, S+ like P, ...). Elements beyond
/// the second period keep their expanded valences (P: 3/5, S: 2/4/6).
std::vector<int> allowed_valences(Element element, int formal_charge);

}  // namespace molshift

#endif  // MOLSHIFT_MOLGRAPH_ELEMENT_HPP_
