#include "arenakit/action.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

namespace {

struct VerbEntry {
  std::string_view verb;
  ActionKind kind;
};

constexpr std::array<VerbEntry, 14> kVerbs = {{
    {"noop", ActionKind::kNoop},
    {"click", ActionKind::kClick},
    {"hover", ActionKind::kHover},
    {"type", ActionKind::kType},
    {"press", ActionKind::kPress},
    {"scroll", ActionKind::kScroll},
    {"tab_focus", ActionKind::kTabFocus},
    {"new_tab", ActionKind::kNewTab},
    {"tab_close", ActionKind::kTabClose},
    // The agent prompts spell the tab-closing verb this way.
    {"close_tab", ActionKind::kTabClose},
    {"go_back", ActionKind::kGoBack},
    {"go_forward", ActionKind::kGoForward},
    {"goto", ActionKind::kGoto},
    {"stop", ActionKind::kStop},
}};

constexpr std::array<std::string_view, 7> kNamedKeys = {
    "ctrl", "alt", "shift", "meta", "enter", "tab", "delete"};

bool is_verb_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view s) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// Index of the ']' matching the '[' at `open`, or npos.
std::size_t matching_bracket(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::size_t skip_spaces(std::string_view s, std::size_t pos) {
  while (pos < s.size() && text::is_space(s[pos])) ++pos;
  return pos;
}

class ArgReader {
 public:
  ArgReader(std::string_view verb, std::string_view rest) : verb_(verb), rest_(rest) {}

  bool at_end() const { return text::trim(rest_.substr(pos_)).empty(); }

  void expect_end() const {
    if (!at_end()) {
      throw ParseError("unexpected trailing text after '" + std::string(verb_) +
                       "' arguments: '" + std::string(text::trim(rest_.substr(pos_))) +
                       "'");
    }
  }

  // A short bracketed argument such as an id or direction.
  std::string next(std::string_view what) {
    pos_ = skip_spaces(rest_, pos_);
    if (pos_ >= rest_.size() || rest_[pos_] != '[') {
      throw ParseError("'" + std::string(verb_) + "' is missing its " + std::string(what) +
                       " argument");
    }
    auto close = matching_bracket(rest_, pos_);
    if (close == std::string_view::npos) {
      throw ParseError("unterminated '[' in '" + std::string(verb_) + "' arguments");
    }
    std::string content(rest_.substr(pos_ + 1, close - pos_ - 1));
    pos_ = close + 1;
    return content;
  }

  // The free-text argument that runs to the end of the action. Brackets in
  // the content are handled by depth matching; when that leaves an invalid
  // tail the content extends to the last ']' instead. With `with_flag` an
  // optional trailing "[0]" / "[1]" is accepted.
  std::pair<std::string, std::optional<bool>> tail(std::string_view what, bool with_flag) {
    pos_ = skip_spaces(rest_, pos_);
    if (pos_ >= rest_.size() || rest_[pos_] != '[') {
      throw ParseError("'" + std::string(verb_) + "' is missing its " + std::string(what) +
                       " argument");
    }
    std::size_t open = pos_;
    auto close = matching_bracket(rest_, open);
    if (close != std::string_view::npos) {
      std::string content(rest_.substr(open + 1, close - open - 1));
      std::string_view remainder = text::trim(rest_.substr(close + 1));
      if (remainder.empty()) return {content, std::nullopt};
      if (with_flag) {
        if (auto flag = flag_value(remainder)) return {content, flag};
      }
    }
    std::string_view body = text::trim(rest_.substr(open));
    std::optional<bool> flag;
    if (with_flag && body.size() >= 3) {
      if (auto f = flag_value(body.substr(body.size() - 3))) {
        std::string_view stripped = text::trim(body.substr(0, body.size() - 3));
        if (stripped.size() >= 2 && stripped.back() == ']') {
          flag = f;
          body = stripped;
        }
      }
    }
    if (body.size() < 2 || body.back() != ']') {
      throw ParseError("unterminated '[' in '" + std::string(verb_) + "' arguments");
    }
    return {std::string(body.substr(1, body.size() - 2)), flag};
  }

 private:
  static std::optional<bool> flag_value(std::string_view s) {
    if (s == "[0]") return false;
    if (s == "[1]") return true;
    return std::nullopt;
  }

  std::string_view verb_;
  std::string_view rest_;
  std::size_t pos_ = 0;
};

ElementRef parse_element(std::string_view content) {
  auto comma = content.find(',');
  if (comma != std::string_view::npos) {
    auto x = parse_double(content.substr(0, comma));
    auto y = parse_double(content.substr(comma + 1));
    if (!x || !y) throw ParseError("malformed coordinates '" + std::string(content) + "'");
    return ElementRef::at(*x, *y);
  }
  auto id = parse_int(content);
  if (!id || *id <= 0) throw ParseError("malformed element id '" + std::string(content) + "'");
  return ElementRef::by_id(*id);
}

std::string serialize_element(const ElementRef& ref) {
  if (ref.is_id()) return std::to_string(ref.id());
  return format_double(ref.coords().x) + "," + format_double(ref.coords().y);
}

}  // namespace

std::string_view to_string(ActionKind kind) {
  for (const auto& entry : kVerbs) {
    if (entry.kind == kind) return entry.verb;
  }
  return "noop";
}

Action Action::click(ElementRef el) {
  Action a;
  a.kind = ActionKind::kClick;
  a.element = el;
  return a;
}

Action Action::hover(ElementRef el) {
  Action a;
  a.kind = ActionKind::kHover;
  a.element = el;
  return a;
}

Action Action::type(ElementRef el, std::string content, bool press_enter) {
  Action a;
  a.kind = ActionKind::kType;
  a.element = el;
  a.text = std::move(content);
  a.press_enter = press_enter;
  return a;
}

Action Action::press(std::string key_comb) {
  Action a;
  a.kind = ActionKind::kPress;
  a.text = std::move(key_comb);
  return a;
}

Action Action::scroll(ScrollDirection dir) {
  Action a;
  a.kind = ActionKind::kScroll;
  a.direction = dir;
  return a;
}

Action Action::tab_focus(std::int64_t index) {
  Action a;
  a.kind = ActionKind::kTabFocus;
  a.index = index;
  return a;
}

Action Action::simple(ActionKind kind) {
  Action a;
  a.kind = kind;
  return a;
}

Action Action::go_to(std::string url) {
  Action a;
  a.kind = ActionKind::kGoto;
  a.text = std::move(url);
  return a;
}

Action Action::stop(std::string answer) {
  Action a;
  a.kind = ActionKind::kStop;
  a.text = std::move(answer);
  return a;
}

bool is_valid_key_combination(std::string_view combo) {
  if (text::trim(combo).empty()) return false;
  for (const auto& raw : text::split(combo, '+')) {
    std::string key = text::to_lower(text::trim(raw));
    if (key.size() == 1 && ((key[0] >= 'a' && key[0] <= 'z') || (key[0] >= '0' && key[0] <= '9'))) {
      continue;
    }
    bool named = false;
    for (auto name : kNamedKeys) named = named || key == name;
    if (!named) return false;
  }
  return true;
}

bool is_well_formed(const Action& a) {
  auto element_ok = [&] {
    if (!a.element) return false;
    if (a.element->is_id()) return a.element->id() > 0;
    return std::isfinite(a.element->coords().x) && std::isfinite(a.element->coords().y);
  };
  bool no_element = !a.element, no_text = !a.text, no_flag = !a.press_enter,
       no_dir = !a.direction, no_index = !a.index;
  switch (a.kind) {
    case ActionKind::kNoop:
    case ActionKind::kNewTab:
    case ActionKind::kTabClose:
    case ActionKind::kGoBack:
    case ActionKind::kGoForward:
      return no_element && no_text && no_flag && no_dir && no_index;
    case ActionKind::kClick:
    case ActionKind::kHover:
      return element_ok() && no_text && no_flag && no_dir && no_index;
    case ActionKind::kType:
      return element_ok() && a.text && a.press_enter && no_dir && no_index;
    case ActionKind::kPress:
      return no_element && a.text && is_valid_key_combination(*a.text) && no_flag &&
             no_dir && no_index;
    case ActionKind::kScroll:
      return no_element && no_text && no_flag && a.direction && no_index;
    case ActionKind::kTabFocus:
      return no_element && no_text && no_flag && no_dir && a.index && *a.index >= 0;
    case ActionKind::kGoto:
      return no_element && a.text && !text::trim(*a.text).empty() && no_flag && no_dir &&
             no_index;
    case ActionKind::kStop:
      return no_element && a.text && no_flag && no_dir && no_index;
  }
  return false;
}

Action parse_action(std::string_view input) {
  std::string_view s = text::trim(input);
  if (s.empty()) throw ParseError("empty action");
  std::size_t verb_end = 0;
  while (verb_end < s.size() && is_verb_char(s[verb_end])) ++verb_end;
  std::string verb = text::to_lower(s.substr(0, verb_end));
  if (verb.empty()) throw ParseError("action must start with a verb: '" + std::string(s) + "'");

  const VerbEntry* entry = nullptr;
  for (const auto& candidate : kVerbs) {
    if (candidate.verb == verb) entry = &candidate;
  }
  if (entry == nullptr) throw ParseError("unknown action '" + verb + "'");

  ArgReader args(verb, s.substr(verb_end));
  switch (entry->kind) {
    case ActionKind::kNoop:
    case ActionKind::kNewTab:
    case ActionKind::kTabClose:
    case ActionKind::kGoBack:
    case ActionKind::kGoForward:
      args.expect_end();
      return Action::simple(entry->kind);
    case ActionKind::kClick:
    case ActionKind::kHover: {
      auto element = parse_element(args.next("element"));
      args.expect_end();
      return entry->kind == ActionKind::kClick ? Action::click(element)
                                               : Action::hover(element);
    }
    case ActionKind::kType: {
      auto element = parse_element(args.next("element"));
      auto [content, flag] = args.tail("content", true);
      return Action::type(element, std::move(content), flag.value_or(true));
    }
    case ActionKind::kPress: {
      auto combo = args.next("key combination");
      args.expect_end();
      if (!is_valid_key_combination(combo)) {
        throw ParseError("invalid key combination '" + combo + "'");
      }
      return Action::press(std::move(combo));
    }
    case ActionKind::kScroll: {
      std::string dir = text::to_lower(text::trim(args.next("direction")));
      args.expect_end();
      if (text::starts_with_icase(dir, "direction=")) dir = dir.substr(10);
      if (dir == "down") return Action::scroll(ScrollDirection::kDown);
      if (dir == "up") return Action::scroll(ScrollDirection::kUp);
      throw ParseError("scroll direction must be up or down, got '" + dir + "'");
    }
    case ActionKind::kTabFocus: {
      auto raw = args.next("tab index");
      args.expect_end();
      auto index = parse_int(raw);
      if (!index) throw ParseError("malformed tab index '" + raw + "'");
      return Action::tab_focus(*index);
    }
    case ActionKind::kGoto: {
      auto [url, flag] = args.tail("url", false);
      if (text::trim(url).empty()) throw ParseError("'goto' is missing its url argument");
      return Action::go_to(std::move(url));
    }
    case ActionKind::kStop: {
      if (args.at_end()) return Action::stop("");
      auto [answer, flag] = args.tail("answer", false);
      return Action::stop(std::move(answer));
    }
  }
  throw ParseError("unknown action '" + verb + "'");
}

std::string serialize(const Action& a) {
  std::string out(to_string(a.kind));
  auto bracket = [&](std::string_view content) {
    out += " [";
    out += content;
    out += "]";
  };
  switch (a.kind) {
    case ActionKind::kClick:
    case ActionKind::kHover:
      if (a.element) bracket(serialize_element(*a.element));
      break;
    case ActionKind::kType:
      if (a.element) bracket(serialize_element(*a.element));
      bracket(a.text.value_or(""));
      bracket(a.press_enter.value_or(true) ? "1" : "0");
      break;
    case ActionKind::kScroll:
      bracket(a.direction == ScrollDirection::kUp ? "up" : "down");
      break;
    case ActionKind::kTabFocus:
      bracket(std::to_string(a.index.value_or(0)));
      break;
    case ActionKind::kPress:
    case ActionKind::kGoto:
    case ActionKind::kStop:
      bracket(a.text.value_or(""));
      break;
    default:
      break;
  }
  return out;
}

std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::kCot ? "cot" : "direct";
}

std::optional<PromptMode> prompt_mode_from_string(std::string_view name) {
  if (name == "cot") return PromptMode::kCot;
  if (name == "direct") return PromptMode::kDirect;
  return std::nullopt;
}

std::optional<std::string> find_fenced_action(std::string_view output, PromptMode mode) {
  constexpr std::string_view kFence = "```";
  std::optional<std::string> chosen;
  std::size_t pos = 0;
  while (true) {
    auto open = output.find(kFence, pos);
    if (open == std::string_view::npos) break;
    auto close = output.find(kFence, open + kFence.size());
    if (close == std::string_view::npos) break;
    chosen = std::string(text::trim(output.substr(open + kFence.size(),
                                                  close - open - kFence.size())));
    if (mode == PromptMode::kDirect) break;
    pos = close + kFence.size();
  }
  return chosen;
}

ExtractedAction extract_action(std::string_view output, PromptMode mode) {
  auto raw = find_fenced_action(output, mode);
  if (!raw) throw ExtractionError("no ``` fenced action found in model output");
  return ExtractedAction{parse_action(*raw), *raw};
}

}  // namespace arenakit
