#pragma once

// The verification suite: the numbered acceptance criteria and the invariant checks of every
// module, each reduced to one measured quantity compared against a pinned threshold. Random
// instances derive from the suite seed and the check id, so a report is reproducible from its
// seed alone. Reports carry no timings, which keeps repeated runs byte-identical.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace scaleevo {

struct CheckResult {
  std::string id;
  std::string description;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;

  nlohmann::ordered_json to_json() const;
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  nlohmann::ordered_json to_json() const;
  // One line per check: PASS/FAIL, id, measured vs threshold.
  std::string to_table() const;
  // Columns id,pass,measured,threshold.
  std::string to_csv() const;
};

inline constexpr int kAcceptanceCriteria = 11;

// Criterion 1..11. Throws InvalidInput for an unknown id.
CheckResult run_acceptance_criterion(int id, std::uint64_t seed);
std::vector<std::string> invariant_ids();
// Throws InvalidInput for an unknown id.
CheckResult run_invariant(const std::string& id, std::uint64_t seed);
// Checks on the model files shipped in fixtures_dir.
std::vector<CheckResult> run_fixture_checks(const std::string& fixtures_dir, std::uint64_t seed);

// suite: "acceptance", "invariants", "fixtures" or "all". Fixture checks need fixtures_dir.
VerifyReport run_verify(const std::string& suite, std::uint64_t seed, const std::string& fixtures_dir = "");

}  // namespace scaleevo
