#include "arenakit/axtree.hpp"

#include <algorithm>
#include <array>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

namespace {

struct RoleName {
  Role role;
  std::string_view name;
};

constexpr std::array<RoleName, 18> kRoleNames = {{
    {Role::kRootWebArea, "RootWebArea"},
    {Role::kLink, "link"},
    {Role::kButton, "button"},
    {Role::kTextbox, "textbox"},
    {Role::kCheckbox, "checkbox"},
    {Role::kRadio, "radio"},
    {Role::kCombobox, "combobox"},
    {Role::kOption, "option"},
    {Role::kImg, "img"},
    {Role::kHeading, "heading"},
    {Role::kStaticText, "StaticText"},
    {Role::kListitem, "listitem"},
    {Role::kRow, "row"},
    {Role::kCell, "cell"},
    {Role::kSearchbox, "searchbox"},
    {Role::kTab, "tab"},
    {Role::kMenuitem, "menuitem"},
    {Role::kGroup, "group"},
}};

bool is_dropped(const DomNode& node) {
  static constexpr std::array kDroppedTags = {
      "head", "script", "style", "title", "template", "noscript", "meta", "link"};
  if (std::any_of(kDroppedTags.begin(), kDroppedTags.end(),
                  [&](const char* tag) { return node.tag == tag; })) {
    return true;
  }
  if (node.attr("hidden") != nullptr) return true;
  if (const auto* aria = node.attr("aria-hidden"); aria && text::iequals(*aria, "true")) {
    return true;
  }
  if (node.tag == "input") {
    const auto* type = node.attr("type");
    if (type && text::iequals(*type, "hidden")) return true;
  }
  return false;
}

std::optional<Role> role_for(const DomNode& node) {
  if (const auto* explicit_role = node.attr("role")) {
    auto role = role_from_string(text::trim(*explicit_role));
    if (role && *role != Role::kRootWebArea && *role != Role::kStaticText) return role;
  }
  const std::string& tag = node.tag;
  if (tag == "a") return Role::kLink;
  if (tag == "button") return Role::kButton;
  if (tag == "input") {
    const auto* type_attr = node.attr("type");
    std::string type = type_attr ? text::to_lower(text::trim(*type_attr)) : "text";
    if (type.empty()) type = "text";
    if (type == "button" || type == "submit" || type == "reset") return Role::kButton;
    if (type == "search") return Role::kSearchbox;
    if (type == "text" || type == "password" || type == "email" ||
        type == "number" || type == "tel" || type == "url") {
      return Role::kTextbox;
    }
    if (type == "checkbox") return Role::kCheckbox;
    if (type == "radio") return Role::kRadio;
    return std::nullopt;
  }
  if (tag == "select") return Role::kCombobox;
  if (tag == "option") return Role::kOption;
  if (tag == "textarea") return Role::kTextbox;
  if (tag == "img") return Role::kImg;
  if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') {
    return Role::kHeading;
  }
  if (tag == "li") return Role::kListitem;
  if (tag == "tr") return Role::kRow;
  if (tag == "td" || tag == "th") return Role::kCell;
  if (tag == "fieldset") return Role::kGroup;
  return std::nullopt;
}

// Structural roles show their text as StaticText children; every other role
// carries its text in the accessible name instead.
bool is_container(Role role) {
  return role == Role::kRootWebArea || role == Role::kListitem ||
         role == Role::kRow || role == Role::kGroup || role == Role::kCombobox;
}

std::string accessible_name(const DomNode& node, Role role) {
  if (const auto* label = node.attr("aria-label")) {
    auto name = text::collapse_whitespace(*label);
    if (!name.empty()) return name;
  }
  if (const auto* alt = node.attr("alt")) {
    auto name = text::collapse_whitespace(*alt);
    if (!name.empty()) return name;
  }
  if (!is_container(role)) {
    auto name = inner_text(node);
    if (!name.empty()) return name;
  }
  if (const auto* value = node.attr("value")) {
    return text::collapse_whitespace(*value);
  }
  return {};
}

std::string bool_property(const std::string& raw) {
  return text::iequals(text::trim(raw), "false") ? "False" : "True";
}

std::vector<std::pair<std::string, std::string>> properties_for(
    const DomNode& node, const DomSnapshot& snapshot) {
  std::vector<std::pair<std::string, std::string>> props;
  auto from_attrs = [&](std::string_view key,
                        std::initializer_list<std::string_view> attrs) {
    for (auto attr : attrs) {
      if (const auto* value = node.attr(attr)) {
        props.emplace_back(std::string(key), bool_property(*value));
        return;
      }
    }
  };

  if (snapshot.focused) {
    if (*snapshot.focused == node.node_path) props.emplace_back("focused", "True");
  } else {
    from_attrs("focused", {"autofocus"});
  }
  from_attrs("required", {"required", "aria-required"});
  from_attrs("checked", {"checked", "aria-checked"});
  from_attrs("expanded", {"aria-expanded"});
  from_attrs("disabled", {"disabled", "aria-disabled"});
  return props;
}

class Deriver {
 public:
  explicit Deriver(const DomSnapshot& snapshot) : snapshot_(snapshot) {}

  std::vector<AxNode> run() {
    const DomNode& root = snapshot_.root;
    emit(Role::kRootWebArea, snapshot_.title, {}, 0, root.node_path);
    visit_children(root, 1, false);
    return std::move(nodes_);
  }

 private:
  void emit(Role role, std::string name,
            std::vector<std::pair<std::string, std::string>> props, int depth,
            const NodePath& path) {
    AxNode node;
    node.id = static_cast<int>(nodes_.size()) + 1;
    node.role = role;
    node.name = std::move(name);
    node.properties = std::move(props);
    node.depth = depth;
    node.dom_path = path;
    nodes_.push_back(std::move(node));
  }

  void emit_text(const std::string& run, const NodePath& path, int depth, bool suppress) {
    if (suppress) return;
    auto content = text::collapse_whitespace(run);
    if (!content.empty()) emit(Role::kStaticText, std::move(content), {}, depth, path);
  }

  // Text runs and child elements in document order.
  void visit_children(const DomNode& node, int depth, bool suppress_text) {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i < node.text_runs.size()) emit_text(node.text_runs[i], node.node_path, depth, suppress_text);
      visit(node.children[i], depth, suppress_text);
    }
    if (node.text_runs.size() > node.children.size()) {
      emit_text(node.text_runs[node.children.size()], node.node_path, depth, suppress_text);
    }
  }

  void visit(const DomNode& node, int depth, bool suppress_text) {
    if (is_dropped(node)) return;
    int child_depth = depth;
    bool child_suppress = suppress_text;
    if (auto role = role_for(node)) {
      emit(*role, accessible_name(node, *role), properties_for(node, snapshot_), depth,
           node.node_path);
      child_depth = depth + 1;
      if (!is_container(*role)) child_suppress = true;
    }
    visit_children(node, child_depth, child_suppress);
  }

  const DomSnapshot& snapshot_;
  std::vector<AxNode> nodes_;
};

}  // namespace

std::string_view to_string(Role role) {
  for (const auto& entry : kRoleNames) {
    if (entry.role == role) return entry.name;
  }
  return "generic";
}

std::optional<Role> role_from_string(std::string_view name) {
  for (const auto& entry : kRoleNames) {
    if (entry.name == name) return entry.role;
  }
  return std::nullopt;
}

AxTree::AxTree(std::vector<AxNode> nodes, std::shared_ptr<const DomSnapshot> source,
               Viewport window)
    : nodes_(std::move(nodes)), source_(std::move(source)), window_(window) {
  if (!nodes_.empty() && window_.offset >= nodes_.size()) {
    window_.offset = nodes_.size() - 1;
  }
  if (window_.limit && *window_.limit == 0) window_.limit = 1;
}

std::span<const AxNode> AxTree::visible() const {
  std::span<const AxNode> all(nodes_);
  if (all.empty()) return all;
  auto rest = all.subspan(window_.offset);
  if (window_.limit && *window_.limit < rest.size()) return rest.first(*window_.limit);
  return rest;
}

AxTree derive_axtree(std::shared_ptr<const DomSnapshot> snapshot, Viewport window) {
  auto nodes = Deriver(*snapshot).run();
  return AxTree(std::move(nodes), std::move(snapshot), window);
}

std::string render_axtree(const AxTree& tree) {
  std::string out;
  bool first = true;
  for (const auto& node : tree.visible()) {
    if (!first) out.push_back('\n');
    first = false;
    out.append(static_cast<std::size_t>(node.depth) * 2, ' ');
    out += "[" + std::to_string(node.id) + "] ";
    out += to_string(node.role);
    out += " '" + node.name + "'";
    for (const auto& [key, value] : node.properties) out += " " + key + ": " + value;
  }
  return out;
}

const AxNode& resolve_element(const AxTree& tree, int id) {
  for (const auto& node : tree.visible()) {
    if (node.id == id) return node;
  }
  throw UnknownElement("Unknown element id " + std::to_string(id));
}

}  // namespace arenakit
