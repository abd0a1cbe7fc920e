#include "finpanel/xml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace finpanel::xml {

const Node *Node::child(std::string_view name) const {
    for (const auto &c : children) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

std::string Node::attr(std::string_view key) const {
    auto it = attrs.find(std::string(key));
    return it == attrs.end() ? std::string() : it->second;
}

namespace {

class Cursor {
  public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() { return s_[pos_++]; }

    bool starts_with(std::string_view prefix) const {
        return s_.compare(pos_, prefix.size(), prefix) == 0;
    }
    void advance(std::size_t n) { pos_ += n; }

    void skip_space() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) {
            ++pos_;
        }
    }

    [[noreturn]] void fail(const std::string &what) const {
        throw ParseError(what + " at offset " + std::to_string(pos_));
    }

    std::size_t pos() const { return pos_; }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
}

std::string read_name(Cursor &cur) {
    std::string name;
    while (!cur.eof() && is_name_char(cur.peek())) {
        name.push_back(cur.get());
    }
    if (name.empty()) {
        cur.fail("expected name");
    }
    return name;
}

void append_entity(Cursor &cur, std::string &out) {
    // cur is positioned just past '&'
    std::string ent;
    while (!cur.eof() && cur.peek() != ';') {
        ent.push_back(cur.get());
        if (ent.size() > 8) {
            cur.fail("unterminated entity");
        }
    }
    if (cur.eof()) {
        cur.fail("unterminated entity");
    }
    cur.get(); // ';'
    if (ent == "amp") {
        out.push_back('&');
    } else if (ent == "lt") {
        out.push_back('<');
    } else if (ent == "gt") {
        out.push_back('>');
    } else if (ent == "quot") {
        out.push_back('"');
    } else if (ent == "apos") {
        out.push_back('\'');
    } else if (!ent.empty() && ent[0] == '#') {
        // numeric references pass through as UTF-8 for the ASCII range only
        long code = std::strtol(ent.c_str() + (ent[1] == 'x' ? 2 : 1), nullptr,
                                ent[1] == 'x' ? 16 : 10);
        if (code <= 0 || code > 127) {
            cur.fail("unsupported character reference &" + ent + ";");
        }
        out.push_back(static_cast<char>(code));
    } else {
        cur.fail("unknown entity &" + ent + ";");
    }
}

std::string read_attr_value(Cursor &cur) {
    if (cur.eof() || (cur.peek() != '"' && cur.peek() != '\'')) {
        cur.fail("expected attribute value");
    }
    const char quote = cur.get();
    std::string value;
    while (!cur.eof() && cur.peek() != quote) {
        char c = cur.get();
        if (c == '&') {
            append_entity(cur, value);
        } else {
            value.push_back(c);
        }
    }
    if (cur.eof()) {
        cur.fail("unterminated attribute value");
    }
    cur.get();
    return value;
}

void skip_misc(Cursor &cur) {
    for (;;) {
        cur.skip_space();
        if (cur.starts_with("<?")) {
            while (!cur.eof() && !cur.starts_with("?>")) {
                cur.advance(1);
            }
            if (cur.eof()) {
                cur.fail("unterminated processing instruction");
            }
            cur.advance(2);
        } else if (cur.starts_with("<!--")) {
            cur.advance(4);
            while (!cur.eof() && !cur.starts_with("-->")) {
                cur.advance(1);
            }
            if (cur.eof()) {
                cur.fail("unterminated comment");
            }
            cur.advance(3);
        } else {
            return;
        }
    }
}

Node parse_element(Cursor &cur) {
    if (cur.eof() || cur.get() != '<') {
        cur.fail("expected element");
    }
    Node node;
    node.name = read_name(cur);
    for (;;) {
        cur.skip_space();
        if (cur.eof()) {
            cur.fail("unterminated start tag");
        }
        if (cur.starts_with("/>")) {
            cur.advance(2);
            return node;
        }
        if (cur.peek() == '>') {
            cur.get();
            break;
        }
        std::string key = read_name(cur);
        cur.skip_space();
        if (cur.eof() || cur.get() != '=') {
            cur.fail("expected '=' after attribute " + key);
        }
        cur.skip_space();
        node.attrs[key] = read_attr_value(cur);
    }
    // content
    for (;;) {
        if (cur.eof()) {
            cur.fail("unterminated element <" + node.name + ">");
        }
        if (cur.starts_with("<!--")) {
            skip_misc(cur);
            continue;
        }
        if (cur.starts_with("</")) {
            cur.advance(2);
            std::string closing = read_name(cur);
            if (closing != node.name) {
                cur.fail("mismatched closing tag </" + closing + "> for <" + node.name + ">");
            }
            cur.skip_space();
            if (cur.eof() || cur.get() != '>') {
                cur.fail("malformed closing tag");
            }
            return node;
        }
        if (cur.peek() == '<') {
            node.children.push_back(parse_element(cur));
        } else {
            char c = cur.get();
            if (c == '&') {
                append_entity(cur, node.text);
            } else {
                node.text.push_back(c);
            }
        }
    }
}

} // namespace

Node parse(std::string_view input) {
    Cursor cur(input);
    skip_misc(cur);
    if (cur.eof()) {
        throw ParseError("empty document");
    }
    Node root = parse_element(cur);
    skip_misc(cur);
    if (!cur.eof()) {
        cur.fail("trailing content after root element");
    }
    return root;
}

Node parse_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
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
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace finpanel::xml
