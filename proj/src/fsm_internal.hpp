#pragma once

#include "hive/fsm.hpp"

namespace hive {

std::vector<std::string> cube_inputs(const Fsm& m);
ExprPtr canonical_cube(const std::vector<std::pair<ExprPtr, bool>>& lits, const std::vector<std::string>& inputs);
std::optional<std::vector<std::pair<ExprPtr, bool>>> cube_literals(const ExprPtr& g);

}  // namespace hive
