#include "tableqa/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_set>

namespace tableqa::html {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::size_t find_ci(std::string_view s, std::size_t from, std::string_view needle) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (starts_with_ci(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

void append_utf8(std::string &out, std::uint32_t cp) {
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
  std::string_view name;
  std::uint32_t codepoint;
};

// nbsp decodes to a plain space so that downstream tokenization treats it as
// a separator.
constexpr std::array<NamedEntity, 14> kNamedEntities{{
    {"amp", '&'},
    {"lt", '<'},
    {"gt", '>'},
    {"quot", '"'},
    {"apos", '\''},
    {"nbsp", ' '},
    {"ndash", 0x2013},
    {"mdash", 0x2014},
    {"copy", 0xA9},
    {"reg", 0xAE},
    {"hellip", 0x2026},
    {"middot", 0xB7},
    {"laquo", 0xAB},
    {"raquo", 0xBB},
}};

bool is_inline_element(std::string_view tag) {
  static const std::unordered_set<std::string_view> kInline = {
      "a",    "abbr", "b",    "bdi",  "bdo",   "big",  "cite",   "code", "data",
      "dfn",  "em",   "font", "i",    "kbd",   "label", "mark",  "nobr", "q",
      "s",    "samp", "small", "span", "strike", "strong", "sub", "sup",  "time",
      "tt",   "u",    "var",
  };
  return kInline.count(tag) > 0;
}

bool is_raw_text(std::string_view tag) { return tag == "script" || tag == "style"; }
bool is_rcdata(std::string_view tag) { return tag == "title" || tag == "textarea"; }

bool closes_paragraph(std::string_view tag) {
  static const std::unordered_set<std::string_view> kClosers = {
      "address", "article", "aside",  "blockquote", "center", "details", "dialog",
      "dir",     "div",     "dl",     "fieldset",   "figcaption", "figure", "footer",
      "form",    "h1",      "h2",     "h3",         "h4",     "h5",      "h6",
      "header",  "hgroup",  "hr",     "li",         "main",   "menu",    "nav",
      "ol",      "p",       "pre",    "section",    "summary", "table",  "ul",
  };
  return kClosers.count(tag) > 0;
}

bool is_heading(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

bool is_table_section(std::string_view tag) {
  return tag == "thead" || tag == "tbody" || tag == "tfoot";
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view source) : src_(source), dom_(source.size()) {
    stack_.push_back(0);
  }

  DomTree build() {
    std::size_t text_start = 0;
    while (pos_ < src_.size()) {
      if (src_[pos_] != '<' || !starts_markup(pos_)) {
        ++pos_;
        continue;
      }
      flush_text(text_start, pos_);
      consume_markup();
      text_start = pos_;
    }
    flush_text(text_start, src_.size());
    while (stack_.size() > 1) {
      dom_.node(stack_.back()).end = src_.size();
      dom_.node(stack_.back()).inner_end = src_.size();
      stack_.pop_back();
    }
    return std::move(dom_);
  }

 private:
  bool starts_markup(std::size_t at) const {
    if (at + 1 >= src_.size()) return false;
    char next = src_[at + 1];
    if (is_alpha(next) || next == '!' || next == '?') return true;
    return next == '/' && at + 2 < src_.size() && src_[at + 2] != '>';
  }

  NodeId current() const { return stack_.back(); }

  NodeId append(Node node) {
    node.parent = current();
    NodeId id = dom_.add(std::move(node));
    dom_.node(current()).children.push_back(id);
    return id;
  }

  void flush_text(std::size_t from, std::size_t to) {
    if (from >= to) return;
    Node text;
    text.kind = NodeKind::Text;
    text.text = decode_entities(src_.substr(from, to - from));
    text.begin = from;
    text.end = to;
    append(std::move(text));
  }

  // Pops stack entries at index >= `index`, closing them at `at`.
  void close_from(std::size_t index, std::size_t at) {
    while (stack_.size() > index) {
      dom_.node(stack_.back()).end = at;
      dom_.node(stack_.back()).inner_end = at;
      stack_.pop_back();
    }
  }

  // Stack index of the nearest element named in `targets`, searching down
  // from the top and giving up at any element named in `boundaries`.
  std::optional<std::size_t> find_open(std::initializer_list<std::string_view> targets,
                                       std::initializer_list<std::string_view> boundaries) const {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string &tag = dom_.node(stack_[i]).tag;
      if (std::find(targets.begin(), targets.end(), tag) != targets.end()) return i;
      if (std::find(boundaries.begin(), boundaries.end(), tag) != boundaries.end()) return std::nullopt;
    }
    return std::nullopt;
  }

  void consume_markup() {
    const std::size_t start = pos_;
    if (src_.compare(pos_, 4, "<!--") == 0) {
      std::size_t close = src_.find("-->", pos_ + 4);
      std::size_t body_end = close == std::string_view::npos ? src_.size() : close;
      pos_ = close == std::string_view::npos ? src_.size() : close + 3;
      Node comment;
      comment.kind = NodeKind::Comment;
      comment.text = std::string(src_.substr(start + 4, body_end - (start + 4)));
      comment.begin = start;
      comment.end = pos_;
      append(std::move(comment));
      return;
    }
    if (src_[pos_ + 1] == '!' || src_[pos_ + 1] == '?') {
      std::size_t close = src_.find('>', pos_);
      pos_ = close == std::string_view::npos ? src_.size() : close + 1;
      Node bogus;
      bogus.kind = starts_with_ci(src_, start + 2, "doctype") ? NodeKind::Doctype : NodeKind::Comment;
      std::size_t body_end = close == std::string_view::npos ? src_.size() : close;
      bogus.text = std::string(src_.substr(start + 2, body_end - (start + 2)));
      bogus.begin = start;
      bogus.end = pos_;
      append(std::move(bogus));
      return;
    }
    if (src_[pos_ + 1] == '/') {
      if (!is_alpha(src_[pos_ + 2])) {
        // "</3" and friends: a bogus comment per the HTML5 tokenizer.
        std::size_t close = src_.find('>', pos_);
        std::size_t body_end = close == std::string_view::npos ? src_.size() : close;
        pos_ = close == std::string_view::npos ? src_.size() : close + 1;
        Node bogus;
        bogus.kind = NodeKind::Comment;
        bogus.text = std::string(src_.substr(start + 2, body_end - (start + 2)));
        bogus.begin = start;
        bogus.end = pos_;
        append(std::move(bogus));
        return;
      }
      pos_ += 2;
      std::string name = read_tag_name();
      std::size_t close = src_.find('>', pos_);
      pos_ = close == std::string_view::npos ? src_.size() : close + 1;
      handle_end_tag(name, start, pos_);
      return;
    }
    pos_ += 1;
    std::string name = read_tag_name();
    std::vector<Attribute> attributes;
    bool self_closing = read_attributes(attributes);
    handle_start_tag(std::move(name), std::move(attributes), self_closing, start);
  }

  std::string read_tag_name() {
    std::string name;
    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>' && src_[pos_] != '/') {
      name.push_back(lower(src_[pos_]));
      ++pos_;
    }
    return name;
  }

  // Reads attributes up to and including the closing '>'. Returns true for "/>".
  bool read_attributes(std::vector<Attribute> &out) {
    bool self_closing = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (is_space(c)) {
        ++pos_;
        continue;
      }
      if (c == '>') {
        ++pos_;
        return self_closing;
      }
      if (c == '/') {
        self_closing = pos_ + 1 < src_.size() && src_[pos_ + 1] == '>';
        ++pos_;
        continue;
      }
      self_closing = false;
      std::string name;
      while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '=' && src_[pos_] != '>' &&
             !(src_[pos_] == '/' && name.size() > 0)) {
        name.push_back(lower(src_[pos_]));
        ++pos_;
      }
      while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
      std::string value;
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
          char quote = src_[pos_++];
          std::size_t close = src_.find(quote, pos_);
          std::size_t stop = close == std::string_view::npos ? src_.size() : close;
          value = decode_entities(src_.substr(pos_, stop - pos_));
          pos_ = close == std::string_view::npos ? src_.size() : close + 1;
        } else {
          std::size_t from = pos_;
          while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
          value = decode_entities(src_.substr(from, pos_ - from));
        }
      }
      bool duplicate = std::any_of(out.begin(), out.end(), [&](const Attribute &a) { return a.name == name; });
      if (!name.empty() && !duplicate) out.push_back({std::move(name), std::move(value)});
    }
    return self_closing;
  }

  void apply_implicit_closes(std::string_view name, std::size_t at) {
    if (closes_paragraph(name)) {
      if (auto p = find_open({"p"}, {"table", "td", "th", "caption", "button"})) close_from(*p, at);
    }
    if (name == "li") {
      if (auto li = find_open({"li"}, {"ul", "ol", "table", "td", "th"})) close_from(*li, at);
    } else if (name == "dt" || name == "dd") {
      if (auto d = find_open({"dt", "dd"}, {"dl", "table", "td", "th"})) close_from(*d, at);
    } else if (name == "option" || name == "optgroup") {
      if (dom_.node(current()).is("option")) close_from(stack_.size() - 1, at);
    } else if (name == "tr") {
      if (auto tr = find_open({"tr"}, {"table"})) close_from(*tr, at);
    } else if (name == "td" || name == "th") {
      if (auto cell = find_open({"td", "th"}, {"tr", "table"})) close_from(*cell, at);
    } else if (is_table_section(name) || name == "caption" || name == "colgroup") {
      if (auto table = find_open({"table"}, {})) close_from(*table + 1, at);
    } else if (is_heading(name)) {
      if (is_heading(dom_.node(current()).tag)) close_from(stack_.size() - 1, at);
    }
  }

  void handle_start_tag(std::string name, std::vector<Attribute> attributes, bool self_closing,
                        std::size_t start) {
    apply_implicit_closes(name, start);
    Node element;
    element.kind = NodeKind::Element;
    element.tag = name;
    element.attributes = std::move(attributes);
    element.begin = start;
    element.end = pos_;
    element.inner_begin = pos_;
    element.inner_end = pos_;
    NodeId id = append(std::move(element));
    if (self_closing || is_void_element(name)) return;
    stack_.push_back(id);

    if (is_raw_text(name) || is_rcdata(name)) {
      std::string closing = "</" + name;
      std::size_t close = find_ci(src_, pos_, closing);
      std::size_t stop = close == std::string_view::npos ? src_.size() : close;
      if (stop > pos_) {
        Node text;
        text.kind = NodeKind::Text;
        auto raw = src_.substr(pos_, stop - pos_);
        text.text = is_rcdata(name) ? decode_entities(raw) : std::string(raw);
        text.begin = pos_;
        text.end = stop;
        append(std::move(text));
      }
      pos_ = stop;
    }
  }

  void handle_end_tag(const std::string &name, std::size_t start, std::size_t end) {
    if (name.empty() || is_void_element(name)) return;
    std::optional<std::size_t> open;
    if (name == "table") {
      open = find_open({"table"}, {});
    } else if (name == "tr" || name == "td" || name == "th" || is_table_section(name) || name == "caption" ||
               name == "colgroup") {
      open = find_open({name}, {"table"});
    } else {
      for (std::size_t i = stack_.size(); i-- > 1;) {
        const std::string &tag = dom_.node(stack_[i]).tag;
        if (tag == name) {
          open = i;
          break;
        }
        if (tag == "table" || tag == "td" || tag == "th" || tag == "caption") break;
      }
    }
    if (!open) return;
    close_from(*open + 1, start);
    dom_.node(stack_.back()).end = end;
    dom_.node(stack_.back()).inner_end = start;
    stack_.pop_back();
  }

  std::string_view src_;
  DomTree dom_;
  std::vector<NodeId> stack_;
  std::size_t pos_ = 0;
};

std::string escape_text(std::string_view text, bool attribute) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
          break;
        }
        [[fallthrough]];
      default: out.push_back(c);
    }
  }
  return out;
}

void serialize_node(const DomTree &dom, NodeId id, std::string &out) {
  const Node &n = dom.node(id);
  switch (n.kind) {
    case NodeKind::Root:
      for (NodeId c : n.children) serialize_node(dom, c, out);
      return;
    case NodeKind::Text: {
      const Node &parent = dom.node(n.parent);
      out += parent.is_element() && is_raw_text(parent.tag) ? n.text : escape_text(n.text, false);
      return;
    }
    case NodeKind::Comment:
      out += "<!--" + n.text + "-->";
      return;
    case NodeKind::Doctype:
      out += "<!" + n.text + ">";
      return;
    case NodeKind::Element:
      out += "<" + n.tag;
      for (const auto &a : n.attributes) out += " " + a.name + "=\"" + escape_text(a.value, true) + "\"";
      out += ">";
      if (is_void_element(n.tag)) return;
      for (NodeId c : n.children) serialize_node(dom, c, out);
      out += "</" + n.tag + ">";
      return;
  }
}

void collect_text(const DomTree &dom, NodeId id, std::string &out) {
  const Node &n = dom.node(id);
  if (n.kind == NodeKind::Text) {
    out += n.text;
    return;
  }
  if (n.kind == NodeKind::Comment || n.kind == NodeKind::Doctype) return;
  if (n.is_element() && (is_raw_text(n.tag) || n.tag == "template")) return;
  bool block = n.is_element() && !is_inline_element(n.tag);
  if (block) out.push_back(' ');
  for (NodeId c : n.children) collect_text(dom, c, out);
  if (block) out.push_back(' ');
}

}  // namespace

std::optional<std::string_view> Node::attribute(std::string_view name) const {
  for (const auto &a : attributes) {
    if (a.name == name) return a.value;
  }
  return std::nullopt;
}

DomTree::DomTree(std::size_t source_size) {
  Node root;
  root.kind = NodeKind::Root;
  root.begin = 0;
  root.end = source_size;
  root.inner_begin = 0;
  root.inner_end = source_size;
  nodes_.push_back(std::move(root));
}

NodeId DomTree::add(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::vector<NodeId> DomTree::descendants(NodeId from) const {
  std::vector<NodeId> order;
  std::vector<NodeId> pending{from};
  while (!pending.empty()) {
    NodeId id = pending.back();
    pending.pop_back();
    order.push_back(id);
    const auto &children = nodes_[id].children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) pending.push_back(*it);
  }
  return order;
}

NodeId DomTree::find_first(std::string_view tag, NodeId from) const {
  for (NodeId id : descendants(from)) {
    if (nodes_[id].is(tag)) return id;
  }
  return kNoNode;
}

std::vector<NodeId> DomTree::find_all(std::string_view tag, NodeId from) const {
  std::vector<NodeId> found;
  for (NodeId id : descendants(from)) {
    if (nodes_[id].is(tag)) found.push_back(id);
  }
  return found;
}

std::vector<NodeId> DomTree::ancestors(NodeId id) const {
  std::vector<NodeId> chain;
  for (NodeId p = nodes_.at(id).parent; p != kNoNode; p = nodes_[p].parent) chain.push_back(p);
  return chain;
}

bool DomTree::is_ancestor(NodeId ancestor, NodeId id) const {
  for (NodeId p = nodes_.at(id).parent; p != kNoNode; p = nodes_[p].parent) {
    if (p == ancestor) return true;
  }
  return false;
}

NodeId DomTree::lowest_common_ancestor(NodeId a, NodeId b) const {
  if (a == b) return a;
  std::unordered_set<NodeId> seen{a};
  for (NodeId p : ancestors(a)) seen.insert(p);
  if (seen.count(b)) return b;
  for (NodeId p : ancestors(b)) {
    if (seen.count(p)) return p;
  }
  return 0;
}

DomTree parse_html(std::string_view source) { return TreeBuilder(source).build(); }

std::string serialize(const DomTree &dom) {
  std::string out;
  serialize_node(dom, 0, out);
  return out;
}

std::string visible_text(const DomTree &dom, NodeId id) {
  std::string raw;
  collect_text(dom, id, raw);
  return normalize_whitespace(raw);
}

std::string decode_entities(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] != '&') {
      out.push_back(raw[i++]);
      continue;
    }
    std::size_t semi = raw.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(raw[i++]);
      continue;
    }
    std::string_view body = raw.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() >= 2 && body[0] == '#') {
      bool hex = body[1] == 'x' || body[1] == 'X';
      std::string_view digits = body.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
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
        append_utf8(out, cp == 0xA0 ? ' ' : cp);
        decoded = true;
      }
    } else {
      for (const auto &e : kNamedEntities) {
        if (e.name == body) {
          append_utf8(out, e.codepoint);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(raw[i++]);
    }
  }
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool space = is_space(c);
    if (!space && static_cast<unsigned char>(c) == 0xC2 && i + 1 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      space = true;
      ++i;
    }
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool is_void_element(std::string_view tag) {
  static const std::unordered_set<std::string_view> kVoid = {
      "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr",
  };
  return kVoid.count(tag) > 0;
}

bool is_block_element(std::string_view tag) { return !is_inline_element(tag); }

}  // namespace tableqa::html
