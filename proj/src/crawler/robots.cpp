#include "wmsmon/crawler/robots.hpp"

#include "wmsmon/core/url.hpp"

namespace wmsmon {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

RobotsRules RobotsRules::parse(std::string_view text, std::string_view agent) {
  struct Group {
    std::vector<std::string> agents;
    std::vector<Rule> rules;
  };
  std::vector<Group> groups;
  bool in_agent_lines = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const auto field = to_lower(trim(line.substr(0, colon)));
    const auto value = std::string(trim(line.substr(colon + 1)));
    if (field == "user-agent") {
      if (!in_agent_lines) groups.emplace_back();
      groups.back().agents.push_back(to_lower(value));
      in_agent_lines = true;
    } else if (field == "allow" || field == "disallow") {
      in_agent_lines = false;
      if (groups.empty()) continue;
      // An empty Disallow allows everything; it adds no rule.
      if (value.empty()) continue;
      groups.back().rules.push_back({value, field == "allow"});
    } else {
      in_agent_lines = false;
    }
  }

  const auto wanted = to_lower(agent);
  const Group* star = nullptr;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (!wanted.empty() && a == wanted) {
        RobotsRules r;
        r.rules_ = g.rules;
        return r;
      }
      if (a == "*" && star == nullptr) star = &g;
    }
  }
  RobotsRules r;
  if (star) r.rules_ = star->rules;
  return r;
}

bool RobotsRules::allowed(std::string_view path) const {
  std::size_t best = 0;
  bool verdict = true;
  for (const auto& rule : rules_) {
    if (!path.starts_with(rule.prefix)) continue;
    if (rule.prefix.size() > best || (rule.prefix.size() == best && rule.allow)) {
      best = rule.prefix.size();
      verdict = rule.allow;
    }
  }
  return verdict;
}

}  // namespace wmsmon
