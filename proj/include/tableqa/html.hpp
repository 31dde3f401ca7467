#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tableqa::html {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

enum class NodeKind { Root, Element, Text, Comment, Doctype };

struct Attribute {
  std::string name;
  std::string value;
};

/// One node of the parsed document. `begin`/`end` are byte offsets into the
/// source: for elements, `begin` is the '<' of the open tag and `end` is one
/// past the '>' of the close tag (or the position at which the element was
/// implicitly closed).
struct Node {
  NodeKind kind = NodeKind::Element;
  std::string tag;  // lowercase; empty for non-elements
  std::vector<Attribute> attributes;
  std::string text;  // decoded text for Text, body for Comment
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  std::size_t begin = 0;
  std::size_t end = 0;
  // Content between the open tag's '>' and the close tag's '<' (or the
  // implicit close point); equal for void elements.
  std::size_t inner_begin = 0;
  std::size_t inner_end = 0;

  bool is_element() const { return kind == NodeKind::Element; }
  bool is(std::string_view name) const { return kind == NodeKind::Element && tag == name; }
  std::optional<std::string_view> attribute(std::string_view name) const;
};

/// Arena-backed DOM. Node 0 is always the synthetic root spanning the input.
class DomTree {
 public:
  explicit DomTree(std::size_t source_size = 0);

  const Node &root() const { return nodes_.front(); }
  const Node &node(NodeId id) const { return nodes_.at(id); }
  Node &node(NodeId id) { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  NodeId add(Node node);

  /// Pre-order traversal (document order) starting at `from`.
  std::vector<NodeId> descendants(NodeId from = 0) const;
  /// First element with `tag` in document order, or kNoNode.
  NodeId find_first(std::string_view tag, NodeId from = 0) const;
  std::vector<NodeId> find_all(std::string_view tag, NodeId from = 0) const;
  std::vector<NodeId> ancestors(NodeId id) const;  // nearest first, excludes id
  NodeId lowest_common_ancestor(NodeId a, NodeId b) const;
  bool is_ancestor(NodeId ancestor, NodeId id) const;

 private:
  std::vector<Node> nodes_;
};

/// Lenient HTML parse: never fails, malformed markup yields a best-effort tree.
DomTree parse_html(std::string_view source);

/// Re-serialize a parsed tree with explicit close tags.
std::string serialize(const DomTree &dom);

/// Visible text under `id`: script/style/comments dropped, block-level
/// boundaries become spaces, whitespace collapsed and trimmed.
std::string visible_text(const DomTree &dom, NodeId id);

std::string decode_entities(std::string_view raw);
std::string normalize_whitespace(std::string_view text);

bool is_void_element(std::string_view tag);
bool is_block_element(std::string_view tag);

}  // namespace tableqa::html
