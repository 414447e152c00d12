#include "arenakit/dom.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

#include "arenakit/text.hpp"

namespace arenakit {

std::string to_string(const NodePath& path) {
  std::string out = "/";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out.push_back('/');
    out += std::to_string(path[i]);
  }
  return out;
}

const std::string* DomNode::attr(std::string_view name) const {
  auto it = attributes.find(std::string(name));
  return it == attributes.end() ? nullptr : &it->second;
}

bool DomNode::has_class(std::string_view cls) const {
  const std::string* value = attr("class");
  if (value == nullptr) return false;
  for (const auto& token : text::split(text::collapse_whitespace(*value), ' ')) {
    if (token == cls) return true;
  }
  return false;
}

namespace {

constexpr std::array kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array kClosesParagraph = {
    "address", "article", "aside", "blockquote", "details", "div", "dl",
    "fieldset", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
    "h6", "header", "hr", "main", "menu", "nav", "ol", "p", "pre",
    "section", "table", "ul"};

// Elements that bound the search for an implicitly closed element.
constexpr std::array kScopeBoundary = {"html", "table", "td", "th", "caption",
                                       "button", "object", "template"};

template <std::size_t N>
bool contains(const std::array<const char*, N>& set, std::string_view tag) {
  return std::any_of(set.begin(), set.end(),
                     [&](const char* item) { return tag == item; });
}

bool is_heading(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '-' || c == '_' || c == ':' || c == '.';
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct NamedEntity {
  const char* name;
  std::uint32_t codepoint;
};

// HTML 4 named character references. nbsp decodes to a plain space.
constexpr std::array<NamedEntity, 252> kEntities = {{
    {"AElig", 0xC6}, {"Aacute", 0xC1}, {"Acirc", 0xC2}, {"Agrave", 0xC0}, {"Alpha", 0x391},
    {"Aring", 0xC5}, {"Atilde", 0xC3}, {"Auml", 0xC4}, {"Beta", 0x392}, {"Ccedil", 0xC7},
    {"Chi", 0x3A7}, {"Dagger", 0x2021}, {"Delta", 0x394}, {"ETH", 0xD0}, {"Eacute", 0xC9},
    {"Ecirc", 0xCA}, {"Egrave", 0xC8}, {"Epsilon", 0x395}, {"Eta", 0x397}, {"Euml", 0xCB},
    {"Gamma", 0x393}, {"Iacute", 0xCD}, {"Icirc", 0xCE}, {"Igrave", 0xCC}, {"Iota", 0x399},
    {"Iuml", 0xCF}, {"Kappa", 0x39A}, {"Lambda", 0x39B}, {"Mu", 0x39C}, {"Ntilde", 0xD1},
    {"Nu", 0x39D}, {"OElig", 0x152}, {"Oacute", 0xD3}, {"Ocirc", 0xD4}, {"Ograve", 0xD2},
    {"Omega", 0x3A9}, {"Omicron", 0x39F}, {"Oslash", 0xD8}, {"Otilde", 0xD5}, {"Ouml", 0xD6},
    {"Phi", 0x3A6}, {"Pi", 0x3A0}, {"Prime", 0x2033}, {"Psi", 0x3A8}, {"Rho", 0x3A1},
    {"Scaron", 0x160}, {"Sigma", 0x3A3}, {"THORN", 0xDE}, {"Tau", 0x3A4}, {"Theta", 0x398},
    {"Uacute", 0xDA}, {"Ucirc", 0xDB}, {"Ugrave", 0xD9}, {"Upsilon", 0x3A5}, {"Uuml", 0xDC},
    {"Xi", 0x39E}, {"Yacute", 0xDD}, {"Yuml", 0x178}, {"Zeta", 0x396}, {"aacute", 0xE1},
    {"acirc", 0xE2}, {"acute", 0xB4}, {"aelig", 0xE6}, {"agrave", 0xE0}, {"alefsym", 0x2135},
    {"alpha", 0x3B1}, {"amp", 0x26}, {"and", 0x2227}, {"ang", 0x2220}, {"aring", 0xE5},
    {"asymp", 0x2248}, {"atilde", 0xE3}, {"auml", 0xE4}, {"bdquo", 0x201E}, {"beta", 0x3B2},
    {"brvbar", 0xA6}, {"bull", 0x2022}, {"cap", 0x2229}, {"ccedil", 0xE7}, {"cedil", 0xB8},
    {"cent", 0xA2}, {"chi", 0x3C7}, {"circ", 0x2C6}, {"clubs", 0x2663}, {"cong", 0x2245},
    {"copy", 0xA9}, {"crarr", 0x21B5}, {"cup", 0x222A}, {"curren", 0xA4}, {"dArr", 0x21D3},
    {"dagger", 0x2020}, {"darr", 0x2193}, {"deg", 0xB0}, {"delta", 0x3B4}, {"diams", 0x2666},
    {"divide", 0xF7}, {"eacute", 0xE9}, {"ecirc", 0xEA}, {"egrave", 0xE8}, {"empty", 0x2205},
    {"emsp", 0x2003}, {"ensp", 0x2002}, {"epsilon", 0x3B5}, {"equiv", 0x2261}, {"eta", 0x3B7},
    {"eth", 0xF0}, {"euml", 0xEB}, {"euro", 0x20AC}, {"exist", 0x2203}, {"fnof", 0x192},
    {"forall", 0x2200}, {"frac12", 0xBD}, {"frac14", 0xBC}, {"frac34", 0xBE}, {"frasl", 0x2044},
    {"gamma", 0x3B3}, {"ge", 0x2265}, {"gt", 0x3E}, {"hArr", 0x21D4}, {"harr", 0x2194},
    {"hearts", 0x2665}, {"hellip", 0x2026}, {"iacute", 0xED}, {"icirc", 0xEE}, {"iexcl", 0xA1},
    {"igrave", 0xEC}, {"image", 0x2111}, {"infin", 0x221E}, {"int", 0x222B}, {"iota", 0x3B9},
    {"iquest", 0xBF}, {"isin", 0x2208}, {"iuml", 0xEF}, {"kappa", 0x3BA}, {"lArr", 0x21D0},
    {"lambda", 0x3BB}, {"lang", 0x2329}, {"laquo", 0xAB}, {"larr", 0x2190}, {"lceil", 0x2308},
    {"ldquo", 0x201C}, {"le", 0x2264}, {"lfloor", 0x230A}, {"lowast", 0x2217}, {"loz", 0x25CA},
    {"lrm", 0x200E}, {"lsaquo", 0x2039}, {"lsquo", 0x2018}, {"lt", 0x3C}, {"macr", 0xAF},
    {"mdash", 0x2014}, {"micro", 0xB5}, {"middot", 0xB7}, {"minus", 0x2212}, {"mu", 0x3BC},
    {"nabla", 0x2207}, {"nbsp", 0x20}, {"ndash", 0x2013}, {"ne", 0x2260}, {"ni", 0x220B},
    {"not", 0xAC}, {"notin", 0x2209}, {"nsub", 0x2284}, {"ntilde", 0xF1}, {"nu", 0x3BD},
    {"oacute", 0xF3}, {"ocirc", 0xF4}, {"oelig", 0x153}, {"ograve", 0xF2}, {"oline", 0x203E},
    {"omega", 0x3C9}, {"omicron", 0x3BF}, {"oplus", 0x2295}, {"or", 0x2228}, {"ordf", 0xAA},
    {"ordm", 0xBA}, {"oslash", 0xF8}, {"otilde", 0xF5}, {"otimes", 0x2297}, {"ouml", 0xF6},
    {"para", 0xB6}, {"part", 0x2202}, {"permil", 0x2030}, {"perp", 0x22A5}, {"phi", 0x3C6},
    {"pi", 0x3C0}, {"piv", 0x3D6}, {"plusmn", 0xB1}, {"pound", 0xA3}, {"prime", 0x2032},
    {"prod", 0x220F}, {"prop", 0x221D}, {"psi", 0x3C8}, {"quot", 0x22}, {"rArr", 0x21D2},
    {"radic", 0x221A}, {"rang", 0x232A}, {"raquo", 0xBB}, {"rarr", 0x2192}, {"rceil", 0x2309},
    {"rdquo", 0x201D}, {"real", 0x211C}, {"reg", 0xAE}, {"rfloor", 0x230B}, {"rho", 0x3C1},
    {"rlm", 0x200F}, {"rsaquo", 0x203A}, {"rsquo", 0x2019}, {"sbquo", 0x201A},
    {"scaron", 0x161}, {"sdot", 0x22C5}, {"sect", 0xA7}, {"shy", 0xAD}, {"sigma", 0x3C3},
    {"sigmaf", 0x3C2}, {"sim", 0x223C}, {"spades", 0x2660}, {"sub", 0x2282}, {"sube", 0x2286},
    {"sum", 0x2211}, {"sup", 0x2283}, {"sup1", 0xB9}, {"sup2", 0xB2}, {"sup3", 0xB3},
    {"supe", 0x2287}, {"szlig", 0xDF}, {"tau", 0x3C4}, {"there4", 0x2234}, {"theta", 0x3B8},
    {"thetasym", 0x3D1}, {"thinsp", 0x2009}, {"thorn", 0xFE}, {"tilde", 0x2DC}, {"times", 0xD7},
    {"trade", 0x2122}, {"uArr", 0x21D1}, {"uacute", 0xFA}, {"uarr", 0x2191}, {"ucirc", 0xFB},
    {"ugrave", 0xF9}, {"uml", 0xA8}, {"upsih", 0x3D2}, {"upsilon", 0x3C5}, {"uuml", 0xFC},
    {"weierp", 0x2118}, {"xi", 0x3BE}, {"yacute", 0xFD}, {"yen", 0xA5}, {"yuml", 0xFF},
    {"zeta", 0x3B6}, {"zwj", 0x200D}, {"zwnj", 0x200C},
}};

std::string decode_entities(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] != '&') {
      out.push_back(in[i++]);
      continue;
    }
    auto semi = in.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(in[i++]);
      continue;
    }
    std::string_view body = in.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() >= 2 && body[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = body[1] == 'x' || body[1] == 'X';
      std::string_view digits = body.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (ok) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& entity : kEntities) {
        if (body == entity.name) {
          append_utf8(out, entity.codepoint);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(in[i++]);
    }
  }
  return out;
}

class TreeBuilder {
 public:
  explicit TreeBuilder(DomSnapshot& snapshot) : snapshot_(snapshot) {
    snapshot_.root.tag = "html";
    stack_.push_back(&snapshot_.root);
  }

  void text(std::string_view raw) {
    if (raw.empty()) return;
    std::string decoded = decode_entities(raw);
    DomNode* top = stack_.back();
    top->text += decoded;
    top->text_runs.back() += decoded;
  }

  void start_tag(const std::string& tag,
                 std::map<std::string, std::string> attributes,
                 bool self_closing) {
    if (tag == "html") {
      for (auto& [k, v] : attributes) snapshot_.root.attributes.emplace(k, v);
      return;
    }
    apply_implicit_closes(tag);
    DomNode* parent = stack_.back();
    DomNode child;
    child.tag = tag;
    child.attributes = std::move(attributes);
    child.node_path = parent->node_path;
    child.node_path.push_back(parent->children.size());
    parent->children.push_back(std::move(child));
    parent->text_runs.emplace_back();
    DomNode* inserted = &parent->children.back();
    if (!self_closing && !contains(kVoidElements, tag)) stack_.push_back(inserted);
  }

  void end_tag(const std::string& tag) {
    if (tag == "html") return;
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == tag) {
        stack_.resize(i);
        return;
      }
    }
  }

  const DomNode& top() const { return *stack_.back(); }

 private:
  // Pops through the nearest open `tag` unless a boundary element is hit
  // first. `stops` adds extra boundaries.
  bool close_in_scope(std::string_view tag,
                      std::initializer_list<std::string_view> stops = {}) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& open = stack_[i]->tag;
      if (open == tag) {
        stack_.resize(i);
        return true;
      }
      if (contains(kScopeBoundary, open)) return false;
      if (std::find(stops.begin(), stops.end(), open) != stops.end()) return false;
    }
    return false;
  }

  void apply_implicit_closes(const std::string& tag) {
    if (contains(kClosesParagraph, tag)) close_in_scope("p");
    if (is_heading(tag) && is_heading(stack_.back()->tag)) stack_.pop_back();
    if (tag == "li") close_in_scope("li", {"ul", "ol"});
    if (tag == "dt" || tag == "dd") {
      if (!close_in_scope("dt", {"dl"})) close_in_scope("dd", {"dl"});
    }
    if (tag == "option" || tag == "optgroup") {
      if (stack_.back()->tag == "option") stack_.pop_back();
      if (tag == "optgroup" && stack_.back()->tag == "optgroup") stack_.pop_back();
    }
    if (tag == "a") close_in_scope("a");
    if (tag == "button") close_in_scope("button");
    if (tag == "td" || tag == "th") {
      if (!close_in_scope("td", {"tr"})) close_in_scope("th", {"tr"});
    }
    if (tag == "tr" || tag == "thead" || tag == "tbody" || tag == "tfoot") {
      close_open_cell();
      close_table_part("tr");
      if (tag != "tr") {
        close_table_part("thead");
        close_table_part("tbody");
        close_table_part("tfoot");
      }
    }
  }

  void close_open_cell() {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& open = stack_[i]->tag;
      if (open == "td" || open == "th") {
        stack_.resize(i);
        return;
      }
      if (open == "table" || open == "tr") return;
    }
  }

  void close_table_part(std::string_view part) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& open = stack_[i]->tag;
      if (open == part) {
        stack_.resize(i);
        return;
      }
      if (open == "table") return;
    }
  }

  DomSnapshot& snapshot_;
  std::vector<DomNode*> stack_;
};

class Tokenizer {
 public:
  Tokenizer(std::string_view html, TreeBuilder& builder)
      : in_(html), builder_(builder) {}

  void run() {
    while (pos_ < in_.size()) {
      if (in_[pos_] == '<') {
        if (try_markup()) continue;
        builder_.text("<");
        ++pos_;
        continue;
      }
      auto next = in_.find('<', pos_);
      if (next == std::string_view::npos) next = in_.size();
      builder_.text(in_.substr(pos_, next - pos_));
      pos_ = next;
    }
  }

 private:
  bool starts_with(std::string_view s) const {
    return in_.substr(pos_, s.size()) == s;
  }

  void skip_past(std::string_view terminator) {
    auto end = in_.find(terminator, pos_);
    pos_ = end == std::string_view::npos ? in_.size() : end + terminator.size();
  }

  bool try_markup() {
    if (starts_with("<!--")) {
      pos_ += 4;
      skip_past("-->");
      return true;
    }
    if (starts_with("<!") || starts_with("<?")) {
      skip_past(">");
      return true;
    }
    if (starts_with("</")) {
      if (pos_ + 2 >= in_.size() || !is_alpha(in_[pos_ + 2])) {
        // "</>" and "</ " are dropped like a bogus comment.
        skip_past(">");
        return true;
      }
      pos_ += 2;
      std::string name = read_name();
      skip_past(">");
      builder_.end_tag(name);
      return true;
    }
    if (pos_ + 1 < in_.size() && is_alpha(in_[pos_ + 1])) {
      ++pos_;
      read_start_tag();
      return true;
    }
    return false;
  }

  std::string read_name() {
    std::size_t start = pos_;
    while (pos_ < in_.size() && is_name_char(in_[pos_])) ++pos_;
    return text::to_lower(in_.substr(start, pos_ - start));
  }

  void skip_spaces() {
    while (pos_ < in_.size() && text::is_space(in_[pos_])) ++pos_;
  }

  void read_start_tag() {
    std::string name = read_name();
    std::map<std::string, std::string> attributes;
    bool self_closing = false;
    while (pos_ < in_.size()) {
      skip_spaces();
      if (pos_ >= in_.size()) break;
      char c = in_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        ++pos_;
        if (pos_ < in_.size() && in_[pos_] == '>') {
          self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      std::size_t start = pos_;
      while (pos_ < in_.size() && !text::is_space(in_[pos_]) && in_[pos_] != '=' &&
             in_[pos_] != '>' && !(in_[pos_] == '/' && pos_ + 1 < in_.size() &&
                                   in_[pos_ + 1] == '>')) {
        ++pos_;
      }
      std::string key = text::to_lower(in_.substr(start, pos_ - start));
      if (key.empty()) {
        ++pos_;
        continue;
      }
      skip_spaces();
      std::string value;
      if (pos_ < in_.size() && in_[pos_] == '=') {
        ++pos_;
        skip_spaces();
        value = read_attribute_value();
      }
      attributes.emplace(std::move(key), std::move(value));
    }
    builder_.start_tag(name, std::move(attributes), self_closing);
    if (!self_closing) consume_raw_text(name);
  }

  std::string read_attribute_value() {
    if (pos_ >= in_.size()) return {};
    char quote = in_[pos_];
    if (quote == '"' || quote == '\'') {
      ++pos_;
      auto end = in_.find(quote, pos_);
      if (end == std::string_view::npos) end = in_.size();
      std::string value = decode_entities(in_.substr(pos_, end - pos_));
      pos_ = std::min(end + 1, in_.size());
      return value;
    }
    std::size_t start = pos_;
    while (pos_ < in_.size() && !text::is_space(in_[pos_]) && in_[pos_] != '>') ++pos_;
    return decode_entities(in_.substr(start, pos_ - start));
  }

  // script/style bodies are discarded; textarea/title bodies are plain text.
  void consume_raw_text(const std::string& tag) {
    bool keep = tag == "textarea" || tag == "title";
    if (!keep && tag != "script" && tag != "style") return;
    std::string close = "</" + tag;
    std::string lowered = text::to_lower(in_.substr(pos_));
    auto end = lowered.find(close);
    std::size_t stop = end == std::string::npos ? in_.size() : pos_ + end;
    if (keep) builder_.text(in_.substr(pos_, stop - pos_));
    pos_ = stop;
    if (end != std::string::npos) {
      pos_ += close.size();
      skip_past(">");
    }
    builder_.end_tag(tag);
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  TreeBuilder& builder_;
};

}  // namespace

DomSnapshot parse_html(std::string_view html, std::string base_url) {
  DomSnapshot snapshot;
  snapshot.base_url = std::move(base_url);
  TreeBuilder builder(snapshot);
  Tokenizer(html, builder).run();

  walk_preorder(snapshot.root, [&](const DomNode& node) {
    if (node.tag == "title" && snapshot.title.empty()) {
      snapshot.title = text::collapse_whitespace(node.text);
      return false;
    }
    return snapshot.title.empty();
  });
  return snapshot;
}

const DomNode* find_node(const DomSnapshot& snapshot, const NodePath& path) {
  const DomNode* node = &snapshot.root;
  for (std::size_t index : path) {
    if (index >= node->children.size()) return nullptr;
    node = &node->children[index];
  }
  return node;
}

namespace {

constexpr std::array kInlineElements = {
    "a",    "abbr", "b",    "bdi",    "cite", "code", "em",    "i",   "kbd",
    "mark", "q",    "s",    "small",  "span", "strong", "sub", "sup", "time",
    "u",    "var",  "label", "font"};

void append_inner_text(const DomNode& node, std::string& out) {
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    out += node.text_runs[i];
    const DomNode& child = node.children[i];
    if (child.tag == "script" || child.tag == "style") continue;
    // Block-level children are separated from their neighbours.
    bool block = !contains(kInlineElements, child.tag);
    if (block) out.push_back(' ');
    append_inner_text(child, out);
    if (block) out.push_back(' ');
  }
  out += node.text_runs.back();
}

}  // namespace

std::string inner_text(const DomNode& node) {
  std::string raw;
  append_inner_text(node, raw);
  return text::collapse_whitespace(raw);
}

std::string xpath_for(const DomSnapshot& snapshot, const NodePath& path) {
  std::string out = "/html[1]";
  const DomNode* node = &snapshot.root;
  for (std::size_t index : path) {
    if (index >= node->children.size()) break;
    const DomNode& child = node->children[index];
    std::size_t position = 1;
    for (std::size_t i = 0; i < index; ++i) {
      if (node->children[i].tag == child.tag) ++position;
    }
    out += "/" + child.tag + "[" + std::to_string(position) + "]";
    node = &child;
  }
  return out;
}

}  // namespace arenakit
