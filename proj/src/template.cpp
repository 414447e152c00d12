#include "arenakit/template.hpp"

#include <algorithm>
#include <charconv>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;

namespace {

struct Operand {
  bool literal = false;
  std::string value;  // literal text or dotted path
};

struct Clause {
  Operand lhs;
  std::string op;  // "", "=", "!=", "~"
  Operand rhs;
};

using Condition = std::vector<Clause>;

}  // namespace

struct Template::Node {
  enum class Kind { kText, kVar, kEach, kFirst, kLast, kIf, kUnless, kCount, kNextId };
  Kind kind = Kind::kText;
  std::string text;  // literal text, variable path or collection path
  bool reversed = false;
  Condition cond;
  std::vector<Node> body;
  std::vector<Node> otherwise;
};

namespace {

using Node = Template::Node;
using Scopes = std::vector<const json*>;

struct Token {
  enum class Kind { kWord, kLiteral, kOp };
  Kind kind;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s, std::string_view tag) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (text::is_space(c)) {
      ++i;
    } else if (c == '"') {
      auto end = s.find('"', i + 1);
      if (end == std::string_view::npos) {
        throw TemplateError("unterminated string literal in {{" + std::string(tag) + "}}");
      }
      tokens.push_back({Token::Kind::kLiteral, std::string(s.substr(i + 1, end - i - 1))});
      i = end + 1;
    } else if (c == '=' || c == '~') {
      tokens.push_back({Token::Kind::kOp, std::string(1, c)});
      ++i;
    } else if (c == '!' && i + 1 < s.size() && s[i + 1] == '=') {
      tokens.push_back({Token::Kind::kOp, "!="});
      i += 2;
    } else {
      std::size_t start = i;
      while (i < s.size() && !text::is_space(s[i]) && s[i] != '=' && s[i] != '~' &&
             s[i] != '"' && !(s[i] == '!' && i + 1 < s.size() && s[i + 1] == '=')) {
        ++i;
      }
      tokens.push_back({Token::Kind::kWord, std::string(s.substr(start, i - start))});
    }
  }
  return tokens;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

class TagArgs {
 public:
  TagArgs(std::vector<Token> tokens, std::string_view tag)
      : tokens_(std::move(tokens)), tag_(tag) {}

  bool done() const { return pos_ >= tokens_.size(); }

  bool accept_word(std::string_view word) {
    if (!done() && tokens_[pos_].kind == Token::Kind::kWord && tokens_[pos_].text == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string path() {
    if (done() || tokens_[pos_].kind != Token::Kind::kWord) fail("expected a path");
    return tokens_[pos_++].text;
  }

  Operand operand() {
    if (done() || tokens_[pos_].kind == Token::Kind::kOp) fail("expected an operand");
    const Token& t = tokens_[pos_++];
    if (t.kind == Token::Kind::kLiteral || all_digits(t.text)) return {true, t.text};
    return {false, t.text};
  }

  Condition condition() {
    Condition cond;
    do {
      Clause clause;
      clause.lhs = operand();
      if (!done() && tokens_[pos_].kind == Token::Kind::kOp) {
        clause.op = tokens_[pos_++].text;
        clause.rhs = operand();
      }
      cond.push_back(std::move(clause));
    } while (accept_word("and"));
    return cond;
  }

  void expect_done() {
    if (!done()) fail("unexpected '" + tokens_[pos_].text + "'");
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw TemplateError(why + " in {{" + std::string(tag_) + "}}");
  }

 private:
  std::vector<Token> tokens_;
  std::string_view tag_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::vector<Node> parse_all() {
    std::vector<Node> nodes;
    std::vector<Node> ignored;
    auto end = parse_until(nodes, ignored, "");
    if (!end.empty()) throw TemplateError("unexpected {{/" + end + "}}");
    return nodes;
  }

 private:
  // Parses until {{/close}} (or EOF when close is empty); returns the name of
  // the closing tag that ended the run.
  std::string parse_until(std::vector<Node>& body, std::vector<Node>& otherwise,
                          const std::string& close) {
    std::vector<Node>* out = &body;
    while (pos_ < src_.size()) {
      auto open = src_.find("{{", pos_);
      if (open == std::string_view::npos) {
        push_text(*out, src_.substr(pos_));
        pos_ = src_.size();
        break;
      }
      push_text(*out, src_.substr(pos_, open - pos_));
      auto end = src_.find("}}", open + 2);
      if (end == std::string_view::npos) throw TemplateError("unterminated {{ tag");
      std::string_view tag = text::trim(src_.substr(open + 2, end - open - 2));
      pos_ = end + 2;
      if (tag.empty()) throw TemplateError("empty {{}} tag");

      if (tag.front() == '!') continue;
      if (tag.front() == '/') {
        std::string name(text::trim(tag.substr(1)));
        if (name != close) {
          throw TemplateError("{{/" + name + "}} does not close " +
                              (close.empty() ? std::string("anything") : "{{#" + close + "}}"));
        }
        return name;
      }
      if (tag == "else") {
        if (close.empty() || out == &otherwise) throw TemplateError("misplaced {{else}}");
        out = &otherwise;
        continue;
      }
      if (tag.front() == '#') {
        out->push_back(parse_block(tag));
        continue;
      }
      auto space = tag.find_first_of(" \t\n");
      std::string_view word = tag.substr(0, space);
      if (word == "count" || word == "next_id") {
        Node node;
        node.kind = word == "count" ? Node::Kind::kCount : Node::Kind::kNextId;
        TagArgs args(tokenize(tag.substr(word.size()), tag), tag);
        node.text = args.path();
        if (args.accept_word("where")) node.cond = args.condition();
        args.expect_done();
        out->push_back(std::move(node));
        continue;
      }
      if (space != std::string_view::npos) {
        throw TemplateError("malformed tag {{" + std::string(tag) + "}}");
      }
      Node node;
      node.kind = Node::Kind::kVar;
      node.text = std::string(tag);
      out->push_back(std::move(node));
    }
    if (!close.empty()) throw TemplateError("missing {{/" + close + "}}");
    return {};
  }

  Node parse_block(std::string_view tag) {
    auto space = tag.find_first_of(" \t\n");
    std::string name(tag.substr(1, space == std::string_view::npos ? space : space - 1));
    std::string_view rest = space == std::string_view::npos ? "" : tag.substr(space);
    TagArgs args(tokenize(rest, tag), tag);
    Node node;
    if (name == "each" || name == "first" || name == "last") {
      node.kind = name == "each"    ? Node::Kind::kEach
                  : name == "first" ? Node::Kind::kFirst
                                    : Node::Kind::kLast;
      node.text = args.path();
      if (node.kind == Node::Kind::kEach) node.reversed = args.accept_word("reversed");
      if (args.accept_word("where")) node.cond = args.condition();
    } else if (name == "if" || name == "unless") {
      node.kind = name == "if" ? Node::Kind::kIf : Node::Kind::kUnless;
      node.cond = args.condition();
    } else {
      throw TemplateError("unknown block {{#" + name + "}}");
    }
    args.expect_done();
    parse_until(node.body, node.otherwise, name);
    return node;
  }

  static void push_text(std::vector<Node>& out, std::string_view text) {
    if (text.empty()) return;
    Node node;
    node.kind = Node::Kind::kText;
    node.text = std::string(text);
    out.push_back(std::move(node));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

const json& null_json() {
  static const json kNull;
  return kNull;
}

const json& lookup(const Scopes& scopes, std::string_view path) {
  auto segments = text::split(path, '.');
  for (std::size_t i = scopes.size(); i-- > 0;) {
    const json& scope = *scopes[i];
    if (!scope.is_object()) continue;
    auto it = scope.find(segments.front());
    if (it == scope.end()) continue;
    const json* cur = &*it;
    for (std::size_t s = 1; s < segments.size(); ++s) {
      if (cur->is_object()) {
        auto child = cur->find(segments[s]);
        if (child == cur->end()) return null_json();
        cur = &*child;
      } else if (cur->is_array() && all_digits(segments[s])) {
        std::size_t index = std::stoul(segments[s]);
        if (index >= cur->size()) return null_json();
        cur = &(*cur)[index];
      } else {
        return null_json();
      }
    }
    return *cur;
  }
  return null_json();
}

bool truthy(const json& v) {
  if (v.is_null()) return false;
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>() != 0;
  if (v.is_string()) return !v.get_ref<const std::string&>().empty();
  return !v.empty();
}

std::string operand_text(const Scopes& scopes, const Operand& op) {
  return op.literal ? op.value : json_to_text(lookup(scopes, op.value));
}

bool holds(const Scopes& scopes, const Condition& cond) {
  for (const auto& clause : cond) {
    bool ok = false;
    if (clause.op.empty()) {
      ok = clause.lhs.literal ? !clause.lhs.value.empty()
                              : truthy(lookup(scopes, clause.lhs.value));
    } else {
      std::string lhs = operand_text(scopes, clause.lhs);
      std::string rhs = operand_text(scopes, clause.rhs);
      if (clause.op == "=") {
        ok = lhs == rhs;
      } else if (clause.op == "!=") {
        ok = lhs != rhs;
      } else {
        ok = text::to_lower(lhs).find(text::to_lower(rhs)) != std::string::npos;
      }
    }
    if (!ok) return false;
  }
  return true;
}

json loop_scope(const json& record, std::size_t index) {
  json scope = record.is_object() ? record : json{{"this", record}};
  scope["@index"] = index;
  scope["@number"] = index + 1;
  return scope;
}

// Records of the collection at `path` satisfying `cond`, with their scopes.
std::vector<json> select(const Scopes& scopes, const Node& node) {
  const json& coll = lookup(scopes, node.text);
  std::vector<json> out;
  if (coll.is_null()) return out;
  if (!coll.is_array()) throw TemplateError("'" + node.text + "' is not a collection");
  Scopes inner = scopes;
  for (const auto& record : coll) {
    json scope = loop_scope(record, 0);
    inner.push_back(&scope);
    bool keep = node.cond.empty() || holds(inner, node.cond);
    inner.pop_back();
    if (keep) out.push_back(record);
  }
  return out;
}

std::string escape_value(std::string_view value, Escape escape) {
  switch (escape) {
    case Escape::kHtml:
      return html_escape(value);
    case Escape::kUrl:
      return url_encode(value);
    case Escape::kRaw:
      break;
  }
  return std::string(value);
}

void render_nodes(const std::vector<Node>& nodes, Scopes& scopes, Escape escape,
                  std::string& out);

void render_records(const Node& node, std::vector<json> records, Scopes& scopes,
                    Escape escape, std::string& out) {
  if (records.empty()) {
    render_nodes(node.otherwise, scopes, escape, out);
    return;
  }
  if (node.reversed) std::reverse(records.begin(), records.end());
  for (std::size_t i = 0; i < records.size(); ++i) {
    json scope = loop_scope(records[i], i);
    scopes.push_back(&scope);
    render_nodes(node.body, scopes, escape, out);
    scopes.pop_back();
  }
}

void render_nodes(const std::vector<Node>& nodes, Scopes& scopes, Escape escape,
                  std::string& out) {
  for (const auto& node : nodes) {
    switch (node.kind) {
      case Node::Kind::kText:
        out += node.text;
        break;
      case Node::Kind::kVar:
        out += escape_value(json_to_text(lookup(scopes, node.text)), escape);
        break;
      case Node::Kind::kEach:
        render_records(node, select(scopes, node), scopes, escape, out);
        break;
      case Node::Kind::kFirst:
      case Node::Kind::kLast: {
        auto records = select(scopes, node);
        if (records.size() > 1) {
          json keep = node.kind == Node::Kind::kFirst ? records.front() : records.back();
          records = {std::move(keep)};
        }
        render_records(node, std::move(records), scopes, escape, out);
        break;
      }
      case Node::Kind::kIf:
      case Node::Kind::kUnless: {
        bool pass = holds(scopes, node.cond) == (node.kind == Node::Kind::kIf);
        render_nodes(pass ? node.body : node.otherwise, scopes, escape, out);
        break;
      }
      case Node::Kind::kCount:
        out += std::to_string(select(scopes, node).size());
        break;
      case Node::Kind::kNextId: {
        long long max_id = 0;
        for (const auto& record : select(scopes, node)) {
          if (!record.is_object() || !record.contains("id")) continue;
          std::string id = json_to_text(record["id"]);
          long long value = 0;
          auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), value);
          if (ec == std::errc() && ptr == id.data() + id.size()) {
            max_id = std::max(max_id, value);
          }
        }
        out += std::to_string(max_id + 1);
        break;
      }
    }
  }
}

}  // namespace

Template::Template() : nodes_(std::make_shared<const std::vector<Node>>()) {}

Template Template::compile(std::string_view source) {
  Template t;
  t.source_ = std::string(source);
  t.nodes_ = std::make_shared<const std::vector<Node>>(Parser(t.source_).parse_all());
  return t;
}

std::string Template::render(const json& context, Escape escape) const {
  std::string out;
  Scopes scopes{&context};
  render_nodes(*nodes_, scopes, escape, out);
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
        c == '-' || c == '.' || c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

std::string url_decode(std::string_view s) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 &&
               hex(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string json_to_text(const json& value) {
  switch (value.type()) {
    case json::value_t::null:
      return {};
    case json::value_t::string:
      return value.get<std::string>();
    case json::value_t::boolean:
      return value.get<bool>() ? "true" : "false";
    case json::value_t::number_integer:
      return std::to_string(value.get<long long>());
    case json::value_t::number_unsigned:
      return std::to_string(value.get<unsigned long long>());
    default:
      return value.dump();
  }
}

}  // namespace arenakit
