#pragma once

// Minimal forgiving HTML tree builder. Only what table cleaning needs:
// elements, attributes, text, implicit closing of table-section tags.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace tqa::html {

struct Attribute {
  std::string name;  // lowercased
  std::string value;  // entity-decoded
};

struct Node {
  enum class Kind { kElement, kText };

  Kind kind = Kind::kElement;
  std::string tag;  // lowercased; "#root" for the document node
  std::vector<Attribute> attrs;
  std::string text;  // kText only, entity-decoded
  std::vector<std::unique_ptr<Node>> children;

  bool is(std::string_view name) const { return kind == Kind::kElement && tag == name; }
  const Attribute* attr(std::string_view name) const;
};

/// Comments, doctype, processing instructions, <script> and <style> are
/// dropped while parsing.
std::unique_ptr<Node> parse(std::string_view html);

bool is_void_element(std::string_view tag);

std::string serialize(const Node& node);
std::string serialize_children(const Node& node);

/// Plain text of a subtree. Block-level and table-structure tags act as
/// word boundaries; inline tags do not. Whitespace is collapsed and trimmed.
std::string flat_text(const Node& node);

std::string decode_entities(std::string_view s);
std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);

}  // namespace tqa::html
