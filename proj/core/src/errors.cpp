#include "mdpdesign/errors.hpp"

#include <cmath>
#include <sstream>

namespace mdpdesign {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::ostringstream out;
  out << violations.size() << " invariant violation(s)";
  for (const auto& v : violations) out << "\n  - " << v;
  return out.str();
}

}  // namespace

InvariantError::InvariantError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

UnboundedDesignError::UnboundedDesignError(std::size_t variable, const std::string& what)
    : Error(what), variable_(variable) {}

BigMValidityError::BigMValidityError(double mip_objective, double rederived_objective)
    : Error([&] {
        std::ostringstream out;
        out.precision(17);
        if (std::isinf(mip_objective))
          out << "big-M validity check failed: the reformulated MIP is infeasible but a feasible design exists"
              << " (objective " << rederived_objective << ")";
        else
          out << "big-M validity check failed: MIP objective " << mip_objective
              << " but re-solving the scenario MDPs at the MIP design gives " << rederived_objective;
        return out.str();
      }()),
      mip_objective_(mip_objective),
      rederived_objective_(rederived_objective) {}

}  // namespace mdpdesign
