#pragma once

#include <map>
#include <memory>

#include "bbmlab/experiment.hpp"

namespace bbmlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string details;
};

/// Shared heavyweight artifacts (profile families, collision runs) reused
/// across criteria.
class AcceptanceContext {
 public:
  const ProfileFamily& family(double lambda);
  const CollisionOutcome& collision(double lambda, double mu0);

 private:
  std::map<double, std::shared_ptr<ProfileFamily>> families_;
  std::map<std::pair<double, double>, std::shared_ptr<CollisionOutcome>> runs_;
};

/// Runs the acceptance criteria (all, or the listed subset) and returns
/// one result per criterion, in order.  The optional callback fires as each
/// criterion finishes.
std::vector<CriterionResult> run_acceptance(
    const std::vector<int>& only = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

/// Formats one result as a single "PASS/FAIL [k] ..." line.
std::string format_criterion(const CriterionResult& r);

}  // namespace bbmlab
