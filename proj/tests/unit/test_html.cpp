#include <doctest.h>

#include <string>

#include "tableqa/html.hpp"
#include "tableqa/random.hpp"

using namespace tableqa::html;

namespace {

// Child spans sit inside their parent; siblings are ordered and disjoint.
void check_offsets(const DomTree &dom, NodeId id, std::size_t source_size) {
  const Node &n = dom.node(id);
  CHECK(n.begin <= n.end);
  CHECK(n.end <= source_size);
  std::size_t cursor = n.begin;
  for (NodeId c : n.children) {
    const Node &child = dom.node(c);
    CHECK(child.parent == id);
    CHECK(child.begin >= cursor);
    CHECK(child.end <= n.end);
    cursor = child.end;
    check_offsets(dom, c, source_size);
  }
}

std::string random_markup(tableqa::Rng &rng, int depth) {
  static const std::vector<std::string> tags{"div", "p", "span", "table", "tr", "td", "th", "b", "li", "ul", "h2"};
  static const std::vector<std::string> words{"alpha", "beta &amp; co", "x<y", "  ", "42", "caf\xc3\xa9"};
  std::string out;
  const std::size_t parts = 1 + rng.index(4);
  for (std::size_t i = 0; i < parts; ++i) {
    switch (rng.index(depth > 3 ? 3 : 6)) {
      case 0: out += rng.pick(words); break;
      case 1: out += "<!-- note -->"; break;
      case 2: out += "<br>"; break;
      default: {
        const std::string &tag = rng.pick(tags);
        out += "<" + tag + (rng.bernoulli(0.3) ? " class=\"c\"" : "") + ">";
        out += random_markup(rng, depth + 1);
        if (rng.bernoulli(0.8)) out += "</" + tag + ">";
      }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("html") {
  TEST_CASE("minimal document has one p node holding the text") {
    const std::string src = "<html><body><p>x</p></body></html>";
    const DomTree dom = parse_html(src);
    const auto ps = dom.find_all("p");
    REQUIRE(ps.size() == 1);
    CHECK(visible_text(dom, ps[0]) == "x");
    CHECK(src.substr(dom.node(ps[0]).begin, dom.node(ps[0]).end - dom.node(ps[0]).begin) == "<p>x</p>");
  }

  TEST_CASE("unclosed table markup yields one table/tr/td chain") {
    const DomTree dom = parse_html("<table><tr><td>a</table>");
    REQUIRE(dom.find_all("table").size() == 1);
    REQUIRE(dom.find_all("tr").size() == 1);
    REQUIRE(dom.find_all("td").size() == 1);
    const NodeId td = dom.find_first("td");
    const NodeId tr = dom.find_first("tr");
    const NodeId table = dom.find_first("table");
    CHECK(dom.is_ancestor(tr, td));
    CHECK(dom.is_ancestor(table, tr));
    CHECK(visible_text(dom, td) == "a");
  }

  TEST_CASE("empty input gives only the synthetic root") {
    const DomTree dom = parse_html("");
    CHECK(dom.size() == 1);
    CHECK(dom.root().kind == NodeKind::Root);
    CHECK(dom.root().children.empty());
  }

  TEST_CASE("implicitly closed cells and rows become siblings") {
    const DomTree dom = parse_html("<table><tr><td>1<td>2<tr><td>3<td>4</table>");
    const auto rows = dom.find_all("tr");
    REQUIRE(rows.size() == 2);
    CHECK(dom.node(rows[0]).parent == dom.node(rows[1]).parent);
    CHECK(dom.find_all("td", rows[0]).size() == 2);
    CHECK(dom.find_all("td", rows[1]).size() == 2);
  }

  TEST_CASE("script and style bodies are raw text") {
    const DomTree dom = parse_html("<body><script>if (a < b) { x = '</div>'; }</script><p>t</p></body>");
    CHECK(dom.find_all("div").empty());
    CHECK(dom.find_all("p").size() == 1);
    CHECK(visible_text(dom, 0) == "t");
  }

  TEST_CASE("entities decode, nbsp folds into whitespace") {
    CHECK(decode_entities("a&amp;b &lt;c&gt; &#65;&#x42; &quot;q&quot;") == "a&b <c> AB \"q\"");
    CHECK(decode_entities("&unknown; &amp") == "&unknown; &amp");
    CHECK(normalize_whitespace("  a \t\n b\xc2\xa0 c  ") == "a b c");
  }

  TEST_CASE("attributes are parsed with and without quotes") {
    const DomTree dom = parse_html("<table role=presentation class='x y' data-n=\"1\" hidden></table>");
    const Node &t = dom.node(dom.find_first("table"));
    CHECK(t.attribute("role") == "presentation");
    CHECK(t.attribute("class") == "x y");
    CHECK(t.attribute("data-n") == "1");
    CHECK(t.attribute("hidden") == "");
    CHECK_FALSE(t.attribute("missing").has_value());
  }

  TEST_CASE("block boundaries separate visible text") {
    const DomTree dom = parse_html("<div>one<p>two</p>three<!-- hidden --><span>four</span></div>");
    CHECK(visible_text(dom, 0) == "one two threefour");
  }

  TEST_CASE("lowest common ancestor") {
    const DomTree dom = parse_html("<div id=a><section><h1>t</h1></section><div><table></table></div></div>");
    const NodeId lca = dom.lowest_common_ancestor(dom.find_first("h1"), dom.find_first("table"));
    CHECK(dom.node(lca).attribute("id") == "a");
  }

  TEST_CASE("property: offsets nest and slices reproduce explicitly closed elements") {
    tableqa::Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
      const std::string src = "<html><body>" + random_markup(rng, 0) + "</body></html>";
      const DomTree dom = parse_html(src);
      check_offsets(dom, 0, src.size());
      for (NodeId id : dom.descendants()) {
        const Node &n = dom.node(id);
        if (!n.is_element()) continue;
        const std::string slice = src.substr(n.begin, n.end - n.begin);
        CHECK(slice.rfind("<" + n.tag, 0) == 0);
        const std::string close = "</" + n.tag + ">";
        if (slice.size() >= close.size() && slice.compare(slice.size() - close.size(), close.size(), close) == 0) {
          CHECK(slice.back() == '>');
        }
      }
    }
  }

  TEST_CASE("property: parsing the serialization is a fixed point") {
    tableqa::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const std::string src = random_markup(rng, 0);
      const std::string once = serialize(parse_html(src));
      const std::string twice = serialize(parse_html(once));
      CHECK(once == twice);
    }
  }
}
