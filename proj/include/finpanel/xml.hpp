#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace finpanel::xml {

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Node {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::string text; // concatenated character data directly under this node
    std::vector<Node> children;

    const Node *child(std::string_view name) const;
    std::string attr(std::string_view key) const;
};

/// Parses a single-document fixture file: optional XML declaration and
/// comments, one root element, attributes, nested elements, character data
/// with the five standard entities. No namespaces, CDATA, or DTDs — the
/// fixture schemas do not use them. Throws ParseError on malformed input.
Node parse(std::string_view input);

Node parse_file(const std::string &path);

std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);

} // namespace finpanel::xml
