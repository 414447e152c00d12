#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace arenakit {

// How {{variable}} substitutions are written into the output.
enum class Escape {
  kHtml,  // & < > " ' become entities
  kUrl,   // percent-encoding of everything but unreserved characters
  kRaw,
};

// Logic-light page templates.
//
//   {{path.to.value}}                         substitution
//   {{#each coll [reversed] [where COND]}} .. {{else}} .. {{/each}}
//   {{#first coll [where COND]}} .. {{/first}}   (also #last)
//   {{#if COND}} .. {{else}} .. {{/if}}          (also #unless)
//   {{count coll [where COND]}}  {{next_id coll [where COND]}}
//   {{! comment}}
//
// COND is "a=b", "a!=b", "a~b" (case-insensitive contains) or a bare path
// (truthiness), joined by "and". Operands are dotted paths or "quoted"
// literals; bare integers are literals. Inside loops the record's fields
// shadow the outer context and @index / @number give the 0/1-based position.
class Template {
 public:
  Template();

  // Throws TemplateError on unbalanced or malformed tags.
  static Template compile(std::string_view source);

  std::string render(const nlohmann::json& context, Escape escape) const;

  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const std::vector<Node>> nodes_;
};

std::string html_escape(std::string_view s);
std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

// Text form of a JSON value as templates print it: strings verbatim,
// integers in decimal, null as "".
std::string json_to_text(const nlohmann::json& value);

}  // namespace arenakit
