#include "arenakit/selector.hpp"

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

namespace {

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '_';
}

}  // namespace

Selector Selector::parse(std::string_view expression) {
  Selector selector;
  std::string_view in = text::trim(expression);
  if (in.empty()) throw SelectorError("empty selector");
  std::size_t pos = 0;

  auto read_ident = [&]() {
    std::size_t start = pos;
    while (pos < in.size() && is_ident_char(in[pos])) ++pos;
    if (start == pos) {
      throw SelectorError("expected identifier at offset " + std::to_string(start) +
                          " in '" + std::string(in) + "'");
    }
    return std::string(in.substr(start, pos - start));
  };

  while (pos < in.size()) {
    Compound compound;
    bool any = false;
    if (in[pos] == '*') {
      compound.tag = "*";
      ++pos;
      any = true;
    } else if (is_ident_char(in[pos])) {
      compound.tag = text::to_lower(read_ident());
      any = true;
    }
    while (pos < in.size() && !text::is_space(in[pos])) {
      char c = in[pos];
      if (c == '#') {
        ++pos;
        compound.id = read_ident();
      } else if (c == '.') {
        ++pos;
        compound.classes.push_back(read_ident());
      } else if (c == '[') {
        auto close = in.find(']', pos);
        if (close == std::string_view::npos) throw SelectorError("unterminated '['");
        std::string_view body = text::trim(in.substr(pos + 1, close - pos - 1));
        auto eq = body.find('=');
        std::string key = text::to_lower(text::trim(body.substr(0, eq)));
        if (key.empty()) throw SelectorError("empty attribute name");
        std::optional<std::string> value;
        if (eq != std::string_view::npos) {
          std::string_view raw = text::trim(body.substr(eq + 1));
          if (raw.size() >= 2 && (raw.front() == '"' || raw.front() == '\'') &&
              raw.back() == raw.front()) {
            raw = raw.substr(1, raw.size() - 2);
          }
          value = std::string(raw);
        }
        compound.attributes.emplace_back(std::move(key), std::move(value));
        pos = close + 1;
      } else {
        throw SelectorError(std::string("unexpected '") + c + "' in selector");
      }
      any = true;
    }
    if (!any) throw SelectorError("empty compound selector");
    selector.parts_.push_back(std::move(compound));
    while (pos < in.size() && text::is_space(in[pos])) ++pos;
  }
  return selector;
}

bool Selector::Compound::matches(const DomNode& node) const {
  if (!tag.empty() && tag != "*" && node.tag != tag) return false;
  if (!id.empty()) {
    const auto* value = node.attr("id");
    if (value == nullptr || *value != id) return false;
  }
  for (const auto& cls : classes) {
    if (!node.has_class(cls)) return false;
  }
  for (const auto& [key, expected] : attributes) {
    const auto* value = node.attr(key);
    if (value == nullptr) return false;
    if (expected && *value != *expected) return false;
  }
  return true;
}

bool Selector::matches(const DomNode& node,
                       const std::vector<const DomNode*>& ancestors) const {
  if (parts_.empty() || !parts_.back().matches(node)) return false;
  // Greedy right-to-left matching is exact for descendant-only chains.
  std::size_t part = parts_.size() - 1;
  for (std::size_t i = ancestors.size(); i-- > 0 && part > 0;) {
    if (parts_[part - 1].matches(*ancestors[i])) --part;
  }
  return part == 0;
}

namespace {

template <typename OnMatch>
bool search(const Selector& selector, const DomNode& node,
            std::vector<const DomNode*>& ancestors, OnMatch&& on_match) {
  if (selector.matches(node, ancestors) && !on_match(node)) return false;
  ancestors.push_back(&node);
  for (const auto& child : node.children) {
    if (!search(selector, child, ancestors, on_match)) return false;
  }
  ancestors.pop_back();
  return true;
}

}  // namespace

const DomNode* Selector::query_first(const DomNode& root) const {
  const DomNode* found = nullptr;
  std::vector<const DomNode*> ancestors;
  search(*this, root, ancestors, [&](const DomNode& node) {
    found = &node;
    return false;
  });
  return found;
}

std::vector<const DomNode*> Selector::query_all(const DomNode& root) const {
  std::vector<const DomNode*> found;
  std::vector<const DomNode*> ancestors;
  search(*this, root, ancestors, [&](const DomNode& node) {
    found.push_back(&node);
    return true;
  });
  return found;
}

}  // namespace arenakit
