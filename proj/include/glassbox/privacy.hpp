#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glassbox/data.hpp"
#include "glassbox/models.hpp"
#include "json.hpp"

namespace glassbox {

struct QuasiIdentifierGroup {
  std::string key;  // rendered quasi-identifier tuple
  std::vector<std::size_t> rows;
  std::map<std::string, std::size_t> sensitive_histogram;
};

struct AnonymityReport {
  std::size_t k = 0;
  std::size_t l = 0;
  double t = 0.0;
  std::size_t group_count = 0;
  std::string smallest_group;      // offends k
  std::string least_diverse_group; // offends l
  std::string most_skewed_group;   // offends t

  nlohmann::json to_json() const;
  std::string render_text() const;
};

// Partition rows by exact equality of the quasi-identifier tuple.
std::vector<QuasiIdentifierGroup> quasi_identifier_groups(const Dataset& dataset,
                                                          const std::vector<std::string>& qi,
                                                          const std::string& sensitive = {});

// Minimum quasi-identifier group size.
std::pair<std::size_t, AnonymityReport> k_anonymity(const Dataset& dataset,
                                                    const std::vector<std::string>& qi);

// Minimum over groups of the number of distinct sensitive values.
std::size_t l_diversity(const Dataset& dataset, const std::vector<std::string>& qi,
                        const std::string& sensitive);

// Maximum over groups of the total-variation distance between the group's
// sensitive distribution and the global one. Categorical sensitive columns
// only; bin numeric columns first.
double t_closeness(const Dataset& dataset, const std::vector<std::string>& qi,
                   const std::string& sensitive);

AnonymityReport anonymity_report(const Dataset& dataset, const std::vector<std::string>& qi,
                                 const std::string& sensitive);

struct MembershipAttack {
  std::size_t shadow_count = 0;
  double shadow_train_fraction = 0.5;
  double confidence_threshold = 0.0;
  double pi = 0.5;  // balanced attack accuracy
  std::size_t evaluation_members = 0;
  std::size_t evaluation_non_members = 0;

  nlohmann::json to_json() const;
  std::string render_text() const;
};

// Shadow-model attack: fits `shadows` models with the target's family and
// hyperparameters on disjoint slices of the holdout, learns the confidence
// threshold separating their member/non-member records best, then scores
// the thresholded rule against the target model on a balanced member /
// non-member evaluation set. Deterministic from seed.
MembershipAttack membership_inference(const Model& target, const Dataset& train,
                                      const Dataset& holdout, std::size_t shadows,
                                      std::uint64_t seed);

// pi <= tau (closed bound); tau defaults to chance level 0.5.
bool verify_privacy(const MembershipAttack& attack, double tau = 0.5);

}  // namespace glassbox
