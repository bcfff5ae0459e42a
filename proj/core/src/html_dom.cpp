#include "html_dom.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <utility>

#include "tqa/utf8.hpp"

namespace tqa::html {

namespace {

constexpr std::array<std::string_view, 14> kVoidTags = {
    "area", "base", "br", "col", "embed", "hr", "img",
    "input", "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 24> kBoundaryTags = {
    "td", "th", "tr", "table", "thead", "tbody", "tfoot", "caption",
    "br", "p", "div", "li", "ul", "ol", "dt", "dd",
    "h1", "h2", "h3", "h4", "h5", "h6", "hr", "blockquote"};

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

constexpr std::array<NamedEntity, 16> kEntities = {{
    {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},        {"quot", U'"'},
    {"apos", U'\''},    {"nbsp", 0x00A0},   {"yen", 0x00A5},     {"copy", 0x00A9},
    {"times", 0x00D7},  {"minus", 0x2212},  {"ndash", 0x2013},   {"mdash", 0x2014},
    {"hellip", 0x2026}, {"middot", 0x00B7}, {"reg", 0x00AE},     {"emsp", 0x2003},
}};

bool contains(auto const& list, std::string_view name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_table_section(std::string_view tag) {
  return tag == "thead" || tag == "tbody" || tag == "tfoot";
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view src) : src_(src) {
    root_ = std::make_unique<Node>();
    root_->tag = "#root";
    stack_.push_back(root_.get());
  }

  std::unique_ptr<Node> run() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<' && try_markup()) continue;
      read_text();
    }
    return std::move(root_);
  }

 private:
  Node* top() { return stack_.back(); }

  void add_text(std::string text) {
    if (text.empty()) return;
    auto& kids = top()->children;
    if (!kids.empty() && kids.back()->kind == Node::Kind::kText) {
      kids.back()->text += text;
      return;
    }
    auto node = std::make_unique<Node>();
    node->kind = Node::Kind::kText;
    node->text = std::move(text);
    kids.push_back(std::move(node));
  }

  void read_text() {
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < src_.size() && src_[pos_] != '<') ++pos_;
    add_text(decode_entities(src_.substr(start, pos_ - start)));
  }

  // Returns false when the '<' does not open markup and should be text.
  bool try_markup() {
    const std::string_view rest = src_.substr(pos_);
    if (rest.starts_with("<!--")) {
      const auto end = src_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? src_.size() : end + 3;
      return true;
    }
    if (rest.starts_with("<!") || rest.starts_with("<?")) {
      const auto end = src_.find('>', pos_);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      return true;
    }
    if (rest.size() >= 2 && rest[1] == '/') {
      if (rest.size() < 3 || !std::isalpha(static_cast<unsigned char>(rest[2]))) return false;
      std::size_t p = pos_ + 2;
      const std::size_t name_start = p;
      while (p < src_.size() && is_name_char(src_[p])) ++p;
      const std::string name = lower(src_.substr(name_start, p - name_start));
      const auto end = src_.find('>', p);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      close_tag(name);
      return true;
    }
    if (rest.size() < 2 || !std::isalpha(static_cast<unsigned char>(rest[1]))) return false;
    open_tag();
    return true;
  }

  void open_tag() {
    std::size_t p = pos_ + 1;
    const std::size_t name_start = p;
    while (p < src_.size() && is_name_char(src_[p])) ++p;
    auto node = std::make_unique<Node>();
    node->tag = lower(src_.substr(name_start, p - name_start));
    bool self_closing = false;
    while (p < src_.size()) {
      while (p < src_.size() && is_ws(src_[p])) ++p;
      if (p >= src_.size()) break;
      if (src_[p] == '>') {
        ++p;
        break;
      }
      if (src_[p] == '/') {
        ++p;
        if (p < src_.size() && src_[p] == '>') {
          self_closing = true;
          ++p;
          break;
        }
        continue;
      }
      const std::size_t an_start = p;
      while (p < src_.size() && !is_ws(src_[p]) && src_[p] != '=' && src_[p] != '>' &&
             !(src_[p] == '/' && p + 1 < src_.size() && src_[p + 1] == '>')) {
        ++p;
      }
      Attribute attr;
      attr.name = lower(src_.substr(an_start, p - an_start));
      while (p < src_.size() && is_ws(src_[p])) ++p;
      if (p < src_.size() && src_[p] == '=') {
        ++p;
        while (p < src_.size() && is_ws(src_[p])) ++p;
        if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'')) {
          const char quote = src_[p++];
          const std::size_t v_start = p;
          while (p < src_.size() && src_[p] != quote) ++p;
          attr.value = decode_entities(src_.substr(v_start, p - v_start));
          if (p < src_.size()) ++p;
        } else {
          const std::size_t v_start = p;
          while (p < src_.size() && !is_ws(src_[p]) && src_[p] != '>') ++p;
          attr.value = decode_entities(src_.substr(v_start, p - v_start));
        }
      }
      if (!attr.name.empty()) node->attrs.push_back(std::move(attr));
    }
    pos_ = p;

    const std::string tag = node->tag;
    if (tag == "script" || tag == "style") {
      skip_raw_text(tag);
      return;
    }
    if (tag == "td" || tag == "th") {
      close_within_table({"td", "th"});
    } else if (tag == "tr") {
      close_within_table({"tr"});
    } else if (is_table_section(tag)) {
      close_within_table({"thead", "tbody", "tfoot"});
    }

    Node* raw = node.get();
    top()->children.push_back(std::move(node));
    if (!self_closing && !is_void_element(tag)) stack_.push_back(raw);
  }

  void skip_raw_text(const std::string& tag) {
    const std::string closing = "</" + tag;
    while (pos_ < src_.size()) {
      const auto hit = src_.find('<', pos_);
      if (hit == std::string_view::npos) {
        pos_ = src_.size();
        return;
      }
      if (lower(src_.substr(hit, closing.size())) == closing) {
        const auto end = src_.find('>', hit);
        pos_ = end == std::string_view::npos ? src_.size() : end + 1;
        return;
      }
      pos_ = hit + 1;
    }
  }

  // Pops up to and including the innermost open element named in `names`,
  // without crossing the innermost open <table>.
  void close_within_table(std::initializer_list<std::string_view> names) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& tag = stack_[i]->tag;
      if (tag == "table") return;
      if (std::find(names.begin(), names.end(), tag) != names.end()) {
        // A new row also ends the open cell; a new section ends the open row.
        stack_.resize(i);
        return;
      }
    }
  }

  void close_tag(const std::string& name) {
    const bool crosses_tables = name == "table";
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& tag = stack_[i]->tag;
      if (tag == name) {
        stack_.resize(i);
        return;
      }
      if (tag == "table" && !crosses_tables) return;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::unique_ptr<Node> root_;
  std::vector<Node*> stack_;
};

void serialize_into(const Node& node, std::string& out) {
  if (node.kind == Node::Kind::kText) {
    out += escape_text(node.text);
    return;
  }
  const bool is_root = node.tag == "#root";
  if (!is_root) {
    out += '<';
    out += node.tag;
    for (const auto& a : node.attrs) {
      out += ' ';
      out += a.name;
      out += "=\"";
      out += escape_attr(a.value);
      out += '"';
    }
    out += '>';
    if (is_void_element(node.tag)) return;
  }
  for (const auto& child : node.children) serialize_into(*child, out);
  if (!is_root) {
    out += "</";
    out += node.tag;
    out += '>';
  }
}

void flat_text_into(const Node& node, std::string& out) {
  if (node.kind == Node::Kind::kText) {
    out += node.text;
    return;
  }
  const bool boundary = contains(kBoundaryTags, node.tag);
  if (boundary) out += ' ';
  for (const auto& child : node.children) flat_text_into(*child, out);
  if (boundary) out += ' ';
}

}  // namespace

const Attribute* Node::attr(std::string_view name) const {
  for (const auto& a : attrs) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::unique_ptr<Node> parse(std::string_view html) { return TreeBuilder(html).run(); }

bool is_void_element(std::string_view tag) { return contains(kVoidTags, tag); }

std::string serialize(const Node& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

std::string serialize_children(const Node& node) {
  std::string out;
  for (const auto& child : node.children) serialize_into(*child, out);
  return out;
}

std::string flat_text(const Node& node) {
  std::string raw;
  for (const auto& child : node.children) flat_text_into(*child, raw);
  return utf8::collapse_whitespace(raw);
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    bool ok = false;
    if (body.size() > 1 && body[0] == '#') {
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      std::uint32_t value = 0;
      const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value, hex ? 16 : 10);
      ok = res.ec == std::errc{} && res.ptr == digits.data() + digits.size() && !digits.empty() &&
           value > 0 && value <= 0x10FFFF;
      cp = value;
    } else {
      for (const auto& e : kEntities) {
        if (e.name == body) {
          cp = e.cp;
          ok = true;
          break;
        }
      }
    }
    if (!ok) {
      out.push_back(s[i++]);
      continue;
    }
    utf8::append(out, cp);
    i = semi + 1;
  }
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '<': out += "&lt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace tqa::html
