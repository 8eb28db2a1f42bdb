#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wmsmon {

/// The robots.txt group that applies to one user agent.
class RobotsRules {
 public:
  RobotsRules() = default;  // allows everything

  /// Picks the group naming `agent` (product token, case-insensitive) or
  /// else the "*" group.
  static RobotsRules parse(std::string_view text, std::string_view agent);

  /// Longest matching Allow/Disallow prefix wins; Allow wins ties.
  bool allowed(std::string_view path_and_query) const;

 private:
  struct Rule {
    std::string prefix;
    bool allow;
  };
  std::vector<Rule> rules_;
};

}  // namespace wmsmon
