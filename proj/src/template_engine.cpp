/*
 * Copyright (c) 2026, the portten authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "portten/template_engine.hpp"

#include <cctype>
#include <sstream>

namespace portten::tmpl {

namespace {

struct Node;
using NodeList = std::vector<Node>;

// Endpoint of an integer range: literal or identifier resolved at render.
struct RangeBound {
    bool isLiteral = false;
    std::int64_t literal = 0;
    std::string identifier;
};

struct ForRange {
    bool isIntRange = false;  // a..b form; otherwise iterate a bound list
    RangeBound lo, hi;
    std::string listName;
};

struct Node {
    enum class Kind { Text, Var, For, If };
    Kind kind = Kind::Text;
    int line = 0;

    std::string text;      // Text
    std::string name;      // Var: identifier; For: loop variable; If: condition
    ForRange range;        // For
    NodeList body;         // For body / If then-branch
    NodeList elseBody;     // If else-branch
};

[[noreturn]] void parseFail(int line, const std::string& msg) {
    throw ValidationError("template parse error at line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void renderFail(int line, const std::string& msg) {
    throw ValidationError("template render error at line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> splitWhitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

bool isIntegerLiteral(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

RangeBound parseRangeBound(std::string_view token, int line) {
    RangeBound b;
    if (isIntegerLiteral(token)) {
        b.isLiteral = true;
        b.literal = std::stoll(std::string(token));
    } else if (isValidIdentifier(token)) {
        b.identifier = std::string(token);
    } else {
        parseFail(line, "malformed range bound '" + std::string(token) + "'");
    }
    return b;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodeList parseAll() {
        NodeList nodes = parseNodes();
        if (!pendingTag_.empty()) {
            // parseNodes only stops early on a block-closing tag.
            parseFail(line_, "unexpected '{% " + pendingTag_ + " %}' with no open block");
        }
        return nodes;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::string pendingTag_;  // closing tag that stopped parseNodes

    void advanceLines(std::string_view chunk) {
        for (char c : chunk) {
            if (c == '\n') ++line_;
        }
    }

    // Parses until end of input or until a closing tag (endfor/endif/else)
    // is seen; the tag name is left in pendingTag_ and pos_ points past it.
    NodeList parseNodes() {
        NodeList nodes;
        pendingTag_.clear();
        while (pos_ < src_.size()) {
            std::size_t marker = src_.find('{', pos_);
            bool isTag = false;
            while (marker != std::string_view::npos && marker + 1 < src_.size()) {
                const char c = src_[marker + 1];
                if (c == '{' || c == '%') {
                    isTag = true;
                    break;
                }
                marker = src_.find('{', marker + 1);
            }
            if (marker == std::string_view::npos || !isTag) {
                appendText(nodes, src_.substr(pos_));
                pos_ = src_.size();
                break;
            }
            if (marker > pos_) {
                appendText(nodes, src_.substr(pos_, marker - pos_));
                pos_ = marker;
            }
            if (src_[pos_ + 1] == '{') {
                parseVar(nodes);
            } else {
                if (parseTag(nodes)) return nodes;  // closing tag: caller handles it
            }
        }
        return nodes;
    }

    void appendText(NodeList& nodes, std::string_view text) {
        if (text.empty()) return;
        Node n;
        n.kind = Node::Kind::Text;
        n.line = line_;
        n.text = std::string(text);
        advanceLines(text);
        nodes.push_back(std::move(n));
    }

    void parseVar(NodeList& nodes) {
        const int startLine = line_;
        std::size_t close = src_.find("}}", pos_ + 2);
        if (close == std::string_view::npos) {
            parseFail(startLine, "unterminated '{{'");
        }
        std::string_view inner = src_.substr(pos_ + 2, close - pos_ - 2);
        advanceLines(src_.substr(pos_, close + 2 - pos_));
        pos_ = close + 2;
        auto tokens = splitWhitespace(inner);
        if (tokens.size() != 1 || !isValidIdentifier(tokens[0])) {
            parseFail(startLine, "malformed substitution '{{" + std::string(inner) + "}}'");
        }
        Node n;
        n.kind = Node::Kind::Var;
        n.line = startLine;
        n.name = tokens[0];
        nodes.push_back(std::move(n));
    }

    // Returns true when the parsed tag closes the current block.
    bool parseTag(NodeList& nodes) {
        const int startLine = line_;
        std::size_t close = src_.find("%}", pos_ + 2);
        if (close == std::string_view::npos) {
            parseFail(startLine, "unterminated '{%'");
        }
        std::string_view inner = src_.substr(pos_ + 2, close - pos_ - 2);
        advanceLines(src_.substr(pos_, close + 2 - pos_));
        pos_ = close + 2;
        auto tokens = splitWhitespace(inner);
        if (tokens.empty()) parseFail(startLine, "empty tag");
        const std::string& tag = tokens[0];

        if (tag == "for") {
            nodes.push_back(parseFor(tokens, startLine));
            return false;
        }
        if (tag == "if") {
            nodes.push_back(parseIf(tokens, startLine));
            return false;
        }
        if (tag == "endfor" || tag == "endif" || tag == "else") {
            if (tokens.size() != 1) parseFail(startLine, "'" + tag + "' takes no arguments");
            pendingTag_ = tag;
            return true;
        }
        parseFail(startLine, "unknown tag '" + tag + "'");
    }

    Node parseFor(const std::vector<std::string>& tokens, int startLine) {
        if (tokens.size() != 4 || tokens[2] != "in" || !isValidIdentifier(tokens[1])) {
            parseFail(startLine, "malformed for tag; expected {% for VAR in RANGE %}");
        }
        Node n;
        n.kind = Node::Kind::For;
        n.line = startLine;
        n.name = tokens[1];
        const std::string& rangeTok = tokens[3];
        std::size_t dots = rangeTok.find("..");
        if (dots != std::string::npos) {
            n.range.isIntRange = true;
            n.range.lo = parseRangeBound(std::string_view(rangeTok).substr(0, dots), startLine);
            n.range.hi = parseRangeBound(std::string_view(rangeTok).substr(dots + 2), startLine);
        } else if (isValidIdentifier(rangeTok)) {
            n.range.listName = rangeTok;
        } else {
            parseFail(startLine, "malformed loop range '" + rangeTok + "'");
        }
        n.body = parseNodes();
        if (pendingTag_ != "endfor") {
            parseFail(startLine, "unclosed {% for %} (missing {% endfor %})");
        }
        pendingTag_.clear();
        return n;
    }

    Node parseIf(const std::vector<std::string>& tokens, int startLine) {
        if (tokens.size() != 2 || !isValidIdentifier(tokens[1])) {
            parseFail(startLine, "malformed if tag; expected {% if VAR %}");
        }
        Node n;
        n.kind = Node::Kind::If;
        n.line = startLine;
        n.name = tokens[1];
        n.body = parseNodes();
        if (pendingTag_ == "else") {
            pendingTag_.clear();
            n.elseBody = parseNodes();
        }
        if (pendingTag_ != "endif") {
            parseFail(startLine, "unclosed {% if %} (missing {% endif %})");
        }
        pendingTag_.clear();
        return n;
    }
};

// Render-time scope: loop variables shadow context bindings.
class Scope {
public:
    explicit Scope(const RenderContext& ctx) : ctx_(ctx) {}

    const Value* find(std::string_view name) const {
        for (auto it = locals_.rbegin(); it != locals_.rend(); ++it) {
            if (it->first == name) return &it->second;
        }
        return ctx_.find(name);
    }

    void push(std::string name, Value v) { locals_.emplace_back(std::move(name), std::move(v)); }
    void pop() { locals_.pop_back(); }

private:
    const RenderContext& ctx_;
    std::vector<std::pair<std::string, Value>> locals_;
};

class Renderer {
public:
    explicit Renderer(const RenderContext& ctx) : scope_(ctx) {}

    std::string run(const NodeList& nodes) {
        renderNodes(nodes);
        return std::move(out_).str();
    }

private:
    Scope scope_;
    std::ostringstream out_;

    const Value& lookup(const std::string& name, int line) {
        const Value* v = scope_.find(name);
        if (!v) renderFail(line, "unbound identifier '" + name + "'");
        return *v;
    }

    std::int64_t resolveBound(const RangeBound& b, int line) {
        if (b.isLiteral) return b.literal;
        const Value& v = lookup(b.identifier, line);
        if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
        renderFail(line, "range bound '" + b.identifier + "' is not an integer");
    }

    void renderNodes(const NodeList& nodes) {
        for (const Node& n : nodes) {
            switch (n.kind) {
                case Node::Kind::Text:
                    out_ << n.text;
                    break;
                case Node::Kind::Var:
                    renderVar(n);
                    break;
                case Node::Kind::For:
                    renderFor(n);
                    break;
                case Node::Kind::If:
                    renderIf(n);
                    break;
            }
        }
    }

    void renderVar(const Node& n) {
        const Value& v = lookup(n.name, n.line);
        if (const auto* i = std::get_if<std::int64_t>(&v)) {
            out_ << *i;
        } else if (const auto* b = std::get_if<bool>(&v)) {
            out_ << (*b ? "true" : "false");
        } else if (const auto* s = std::get_if<std::string>(&v)) {
            out_ << *s;
        } else {
            renderFail(n.line, "cannot substitute list value '" + n.name + "'");
        }
    }

    void renderFor(const Node& n) {
        if (n.range.isIntRange) {
            const std::int64_t lo = resolveBound(n.range.lo, n.line);
            const std::int64_t hi = resolveBound(n.range.hi, n.line);
            for (std::int64_t i = lo; i < hi; ++i) {
                scope_.push(n.name, Value(i));
                renderNodes(n.body);
                scope_.pop();
            }
            return;
        }
        const Value& v = lookup(n.range.listName, n.line);
        if (const auto* ints = std::get_if<std::vector<std::int64_t>>(&v)) {
            for (std::int64_t i : *ints) {
                scope_.push(n.name, Value(i));
                renderNodes(n.body);
                scope_.pop();
            }
        } else if (const auto* strs = std::get_if<std::vector<std::string>>(&v)) {
            for (const std::string& s : *strs) {
                scope_.push(n.name, Value(s));
                renderNodes(n.body);
                scope_.pop();
            }
        } else {
            renderFail(n.line, "'" + n.range.listName + "' is not iterable in for");
        }
    }

    void renderIf(const Node& n) {
        const Value& v = lookup(n.name, n.line);
        const auto* b = std::get_if<bool>(&v);
        if (!b) renderFail(n.line, "non-boolean value '" + n.name + "' in if-condition");
        renderNodes(*b ? n.body : n.elseBody);
    }
};

}  // namespace

bool isValidIdentifier(std::string_view name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
    for (char c : name.substr(1)) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

RenderContext& RenderContext::bind(std::string name, Value value) {
    PORTTEN_CHECK(isValidIdentifier(name), "invalid binding identifier '" + name + "'");
    bindings_[std::move(name)] = std::move(value);
    return *this;
}

const Value* RenderContext::find(std::string_view name) const {
    auto it = bindings_.find(name);
    return it == bindings_.end() ? nullptr : &it->second;
}

struct Template::Impl {
    std::string source;
    NodeList nodes;
};

Template Template::parse(std::string_view source) {
    auto impl = std::make_shared<Impl>();
    impl->source = std::string(source);
    impl->nodes = Parser(impl->source).parseAll();
    Template t;
    t.impl_ = std::move(impl);
    return t;
}

std::string Template::render(const RenderContext& ctx) const {
    PORTTEN_CHECK(impl_ != nullptr, "render on a default-constructed template");
    return Renderer(ctx).run(impl_->nodes);
}

const std::string& Template::source() const {
    PORTTEN_CHECK(impl_ != nullptr, "source() on a default-constructed template");
    return impl_->source;
}

}  // namespace portten::tmpl
