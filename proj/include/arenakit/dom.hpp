#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arenakit {

// Child indices from the document root down to a node. The root's path is
// empty; a child's path extends its parent's by one index.
using NodePath = std::vector<std::size_t>;

std::string to_string(const NodePath& path);

struct DomNode {
  std::string tag;
  std::map<std::string, std::string> attributes;
  // Concatenated immediate text content (text directly inside this element).
  std::string text;
  std::vector<DomNode> children;
  NodePath node_path;
  // The same immediate text split by position: text_runs[i] precedes
  // children[i] and the last run trails every child. Always
  // children.size() + 1 entries.
  std::vector<std::string> text_runs{std::string{}};

  const std::string* attr(std::string_view name) const;
  bool has_class(std::string_view cls) const;
};

struct DomSnapshot {
  DomNode root;
  std::string base_url;
  std::string title;
  // Element holding keyboard focus, when the environment knows it.
  std::optional<NodePath> focused;
};

// Error-recovering HTML parse. Never fails: unknown tags are kept, comments
// and script/style bodies are dropped, unclosed elements close at EOF. The
// root is always the document element (tag "html"), synthesized when the
// input lacks one.
DomSnapshot parse_html(std::string_view html, std::string base_url = {});

// Null when the path does not resolve.
const DomNode* find_node(const DomSnapshot& snapshot, const NodePath& path);

// All descendant text in document order, whitespace collapsed.
std::string inner_text(const DomNode& node);

// Absolute positional XPath for a node, e.g. "/html[1]/body[1]/div[2]".
std::string xpath_for(const DomSnapshot& snapshot, const NodePath& path);

// Pre-order walk; the visitor returns false to skip a node's subtree.
template <typename Visitor>
void walk_preorder(const DomNode& node, Visitor&& visit) {
  if (!visit(node)) return;
  for (const auto& child : node.children) walk_preorder(child, visit);
}

}  // namespace arenakit
