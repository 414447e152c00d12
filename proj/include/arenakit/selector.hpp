#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arenakit/dom.hpp"

namespace arenakit {

// A CSS subset: tag, #id, .class, [attr] / [attr=value], joined by the
// descendant combinator (whitespace).
class Selector {
 public:
  // Throws SelectorError on malformed input.
  static Selector parse(std::string_view expression);

  bool matches(const DomNode& node, const std::vector<const DomNode*>& ancestors) const;

  // First match in document order.
  const DomNode* query_first(const DomNode& root) const;
  std::vector<const DomNode*> query_all(const DomNode& root) const;

 private:
  struct Compound {
    std::string tag;  // empty or "*" = any
    std::string id;
    std::vector<std::string> classes;
    std::vector<std::pair<std::string, std::optional<std::string>>> attributes;

    bool matches(const DomNode& node) const;
  };

  std::vector<Compound> parts_;
};

}  // namespace arenakit
