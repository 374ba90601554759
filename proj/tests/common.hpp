#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "qichoice/gamma_spaces.hpp"

namespace testing_util {

// Family whose sets are named X0, X1, ... in order.
inline qichoice::SetFamily family(std::initializer_list<std::vector<std::string>> sets) {
  std::vector<qichoice::NamedSet> out;
  for (const auto& s : sets) out.push_back({"X" + std::to_string(out.size()), s});
  return qichoice::SetFamily(std::move(out));
}

}  // namespace testing_util
