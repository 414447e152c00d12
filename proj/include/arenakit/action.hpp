#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace arenakit {

enum class ActionKind {
  kNoop,
  kClick,
  kHover,
  kType,
  kPress,
  kScroll,
  kTabFocus,
  kNewTab,
  kTabClose,
  kGoBack,
  kGoForward,
  kGoto,
  kStop,
};

std::string_view to_string(ActionKind kind);

enum class ScrollDirection { kUp, kDown };

struct Coords {
  double x = 0;
  double y = 0;
  bool operator==(const Coords&) const = default;
};

// Either a positive element id from the latest observation or a point.
struct ElementRef {
  std::variant<std::int64_t, Coords> target;

  static ElementRef by_id(std::int64_t id) { return ElementRef{id}; }
  static ElementRef at(double x, double y) { return ElementRef{Coords{x, y}}; }

  bool is_id() const { return std::holds_alternative<std::int64_t>(target); }
  std::int64_t id() const { return std::get<std::int64_t>(target); }
  const Coords& coords() const { return std::get<Coords>(target); }

  bool operator==(const ElementRef&) const = default;
};

// One element of the action space. Only the fields the kind needs are set:
//   click/hover: element         type: element, text, press_enter
//   press: text (key combo)       scroll: direction
//   tab_focus: index              goto: text (url)   stop: text (answer)
struct Action {
  ActionKind kind = ActionKind::kNoop;
  std::optional<ElementRef> element;
  std::optional<std::string> text;
  std::optional<bool> press_enter;
  std::optional<ScrollDirection> direction;
  std::optional<std::int64_t> index;

  static Action noop() { return {}; }
  static Action click(ElementRef el);
  static Action hover(ElementRef el);
  static Action type(ElementRef el, std::string content, bool press_enter = true);
  static Action press(std::string key_comb);
  static Action scroll(ScrollDirection dir);
  static Action tab_focus(std::int64_t index);
  static Action simple(ActionKind kind);
  static Action go_to(std::string url);
  static Action stop(std::string answer);

  bool operator==(const Action&) const = default;
};

// True when exactly the fields required by the kind are present and valid.
bool is_well_formed(const Action& action);

// Case-insensitive check of "key(+key)*" against the supported key names.
bool is_valid_key_combination(std::string_view combo);

// Parses one canonical action string. Throws ParseError on unknown verbs,
// missing arguments or malformed ids. Never aborts on any input.
Action parse_action(std::string_view text);

// Canonical single-line form; parse_action(serialize(a)) == a.
std::string serialize(const Action& action);

enum class PromptMode { kDirect, kCot };

std::string_view to_string(PromptMode mode);
std::optional<PromptMode> prompt_mode_from_string(std::string_view name);

struct ExtractedAction {
  Action action;
  std::string raw;  // contents of the chosen ``` fence, trimmed
};

// Pulls the action out of a model completion: the last fenced span in CoT
// mode, the first in direct mode. Throws ExtractionError when no fenced
// span exists and propagates ParseError.
ExtractedAction extract_action(std::string_view llm_output, PromptMode mode);

// Returns the fenced span the extractor would choose without parsing it.
std::optional<std::string> find_fenced_action(std::string_view llm_output, PromptMode mode);

}  // namespace arenakit
