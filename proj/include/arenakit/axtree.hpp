#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arenakit/dom.hpp"

namespace arenakit {

enum class Role {
  kRootWebArea,
  kLink,
  kButton,
  kTextbox,
  kCheckbox,
  kRadio,
  kCombobox,
  kOption,
  kImg,
  kHeading,
  kStaticText,
  kListitem,
  kRow,
  kCell,
  kSearchbox,
  kTab,
  kMenuitem,
  kGroup,
};

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

struct AxNode {
  int id = 0;
  Role role = Role::kStaticText;
  std::string name;
  std::vector<std::pair<std::string, std::string>> properties;
  int depth = 0;
  NodePath dom_path;

  bool operator==(const AxNode&) const = default;
};

// Node window over the pre-order list. Applied after numbering, so ids
// are those of the full tree.
struct Viewport {
  std::size_t offset = 0;
  std::optional<std::size_t> limit;  // nullopt = unbounded
};

class AxTree {
 public:
  AxTree(std::vector<AxNode> nodes, std::shared_ptr<const DomSnapshot> source,
         Viewport window);

  // Every node of the page, ids 1..N in pre-order.
  const std::vector<AxNode>& nodes() const { return nodes_; }
  // The part of the tree inside the viewport window.
  std::span<const AxNode> visible() const;

  const DomSnapshot& source() const { return *source_; }
  const std::shared_ptr<const DomSnapshot>& source_ptr() const { return source_; }
  const Viewport& window() const { return window_; }

 private:
  std::vector<AxNode> nodes_;
  std::shared_ptr<const DomSnapshot> source_;
  Viewport window_;
};

AxTree derive_axtree(std::shared_ptr<const DomSnapshot> snapshot,
                     Viewport window = {});

// One line per visible node: indentation of two spaces per depth unit,
// "[id] role 'name'", then " key: value" per property.
std::string render_axtree(const AxTree& tree);

// Looks the id up among the visible nodes; throws UnknownElement.
const AxNode& resolve_element(const AxTree& tree, int id);

}  // namespace arenakit
