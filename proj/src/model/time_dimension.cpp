#include "wmsmon/model/time_dimension.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

namespace {

using namespace std::chrono;

constexpr int kMinYear = 1900;
constexpr int kMaxYear = 2099;

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

struct DateToken {
  year_month_day date;
  bool year_only = false;
};

std::optional<DateToken> parse_date_token(std::string_view tok) {
  tok = trim_view(tok);
  if (const auto t = tok.find('T'); t != std::string_view::npos) tok = tok.substr(0, t);
  if (tok.size() == 4 && all_digits(tok)) {
    return DateToken{year{to_int(tok)} / January / 1, true};
  }
  if (tok.size() == 7 && tok[4] == '-' && all_digits(tok.substr(0, 4)) && all_digits(tok.substr(5))) {
    const year_month_day d{year{to_int(tok.substr(0, 4))},
                           month{static_cast<unsigned>(to_int(tok.substr(5)))}, day{1}};
    if (!d.ok()) return std::nullopt;
    return DateToken{d, false};
  }
  if (tok.size() == 10 && tok[4] == '-' && tok[7] == '-' && all_digits(tok.substr(0, 4)) &&
      all_digits(tok.substr(5, 2)) && all_digits(tok.substr(8, 2))) {
    const year_month_day d{year{to_int(tok.substr(0, 4))},
                           month{static_cast<unsigned>(to_int(tok.substr(5, 2)))},
                           day{static_cast<unsigned>(to_int(tok.substr(8, 2)))}};
    if (!d.ok()) return std::nullopt;
    return DateToken{d, false};
  }
  return std::nullopt;
}

bool is_open_end(std::string_view tok) {
  tok = trim_view(tok);
  return iequals(tok, "current") || iequals(tok, "now") || iequals(tok, "present");
}

std::optional<TimeExtent> parse_item(std::string_view item) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto slash = item.find('/', start);
    parts.push_back(item.substr(start, slash == std::string_view::npos ? item.npos : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (parts.size() > 3) return std::nullopt;

  const auto first = parse_date_token(parts[0]);
  if (!first) return std::nullopt;
  TimeExtent extent;
  extent.start = first->date;
  extent.end = first->date;
  extent.year_granularity = first->year_only;
  if (parts.size() >= 2) {
    if (is_open_end(parts[1])) {
      extent.open_ended = true;
    } else {
      const auto last = parse_date_token(parts[1]);
      if (!last) return std::nullopt;
      if (last->year_only) {
        // A year-only end covers the whole year.
        extent.end = last->date.year() / December / 31;
      } else {
        extent.end = last->date;
      }
      if (sys_days{extent.end} < sys_days{extent.start}) return std::nullopt;
    }
  }
  if (parts.size() == 3) {
    const auto period = parse_iso_duration(trim_view(parts[2]));
    if (!period || !period->positive()) return std::nullopt;
    extent.period = period;
  }
  return extent;
}

void add_year_tokens(std::string_view text, std::set<int>& years) {
  for (std::size_t i = 0; i + 4 <= text.size(); ++i) {
    if (!all_digits(text.substr(i, 4))) continue;
    const bool left_ok = i == 0 || !std::isdigit(static_cast<unsigned char>(text[i - 1]));
    const bool right_ok =
        i + 4 == text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 4]));
    if (!left_ok || !right_ok) continue;
    const int y = to_int(text.substr(i, 4));
    if (y >= kMinYear && y <= kMaxYear) years.insert(y);
    i += 3;
  }
}

}  // namespace

std::optional<IsoDuration> parse_iso_duration(std::string_view text) {
  if (text.size() < 2 || (text[0] != 'P' && text[0] != 'p')) return std::nullopt;
  IsoDuration d;
  bool in_time = false;
  bool any = false;
  std::string number;
  for (std::size_t i = 1; i < text.size(); ++i) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if ((c >= '0' && c <= '9') || c == '.') {
      number += c;
      continue;
    }
    if (c == 'T') {
      if (in_time || !number.empty()) return std::nullopt;
      in_time = true;
      continue;
    }
    if (number.empty()) return std::nullopt;
    const bool fractional = number.find('.') != std::string::npos;
    if (fractional && !(in_time && c == 'S')) return std::nullopt;
    const int whole = fractional ? 0 : to_int(number);
    switch (c) {
      case 'Y':
        if (in_time) return std::nullopt;
        d.years = whole;
        break;
      case 'M':
        (in_time ? d.minutes : d.months) = whole;
        break;
      case 'W':
        if (in_time) return std::nullopt;
        d.days += whole * 7;
        break;
      case 'D':
        if (in_time) return std::nullopt;
        d.days += whole;
        break;
      case 'H':
        if (!in_time) return std::nullopt;
        d.hours = whole;
        break;
      case 'S':
        if (!in_time) return std::nullopt;
        d.seconds = std::stod(number);
        break;
      default:
        return std::nullopt;
    }
    number.clear();
    any = true;
  }
  if (!any || !number.empty()) return std::nullopt;
  return d;
}

std::vector<TimeExtent> parse_time_dimension(std::string_view text) {
  std::vector<TimeExtent> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = trim_view(text.substr(start, comma - start));
    if (!item.empty()) {
      if (auto extent = parse_item(item)) out.push_back(*extent);
    }
    start = comma + 1;
  }
  if (out.empty()) {
    throw TimeError(TimeErrc::Unparseable, "no date in time dimension '" + std::string(text) + "'");
  }
  return out;
}

std::set<int> extract_layer_years(const LayerRecord& layer) {
  std::set<int> years;
  if (layer.time_dimension) {
    try {
      for (const auto& e : parse_time_dimension(*layer.time_dimension)) {
        const int first = std::max(kMinYear, static_cast<int>(e.start.year()));
        const int last = std::min(kMaxYear, static_cast<int>(e.end.year()));
        for (int y = first; y <= last; ++y) years.insert(y);
      }
    } catch (const TimeError&) {
      // no collection time recorded in the dimension
    }
  }
  if (layer.name) add_year_tokens(*layer.name, years);
  add_year_tokens(layer.title, years);
  return years;
}

}  // namespace wmsmon
