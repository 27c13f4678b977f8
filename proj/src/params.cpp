#include "spectralkit/params.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace spectralkit {

const char* param_type_name(const ParamValue& v) {
    switch (v.index()) {
        case 0: return "bool";
        case 1: return "int";
        case 2: return "float";
        case 3: return "string";
        case 4: return "float-list";
    }
    return "unknown";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string format_value(const ParamValue& v) {
    struct Fmt {
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_double(d); }
        std::string operator()(const std::string& s) const { return quote_string(s); }
        std::string operator()(const std::vector<double>& xs) const {
            std::string out = "[";
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (i) out += ", ";
                out += format_double(xs[i]);
            }
            out += "]";
            return out;
        }
    };
    return std::visit(Fmt{}, v);
}

// Case-insensitive common-prefix length, used to rank sibling suggestions.
std::size_t common_prefix_len(const std::string& a, const std::string& b) {
    std::size_t n = std::min(a.size(), b.size());
    std::size_t i = 0;
    while (i < n && std::tolower(static_cast<unsigned char>(a[i])) ==
                        std::tolower(static_cast<unsigned char>(b[i])))
        ++i;
    return i;
}

std::string suggest(const std::string& wanted, std::vector<std::string> candidates) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const std::string& a, const std::string& b) {
                         return common_prefix_len(wanted, a) > common_prefix_len(wanted, b);
                     });
    if (candidates.size() > 3) candidates.resize(3);
    std::string out;
    for (const auto& c : candidates) {
        if (!out.empty()) out += ", ";
        out += c;
    }
    return out;
}

}  // namespace

ParamTree::ParamTree(std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw ParamError("parameter node name must not be empty");
}

ParamTree::ParamTree(const ParamTree& other)
    : name_(other.name_), frozen_(other.frozen_), leaves_(other.leaves_) {
    children_.reserve(other.children_.size());
    for (const auto& c : other.children_)
        children_.push_back(std::make_unique<ParamTree>(*c));
}

ParamTree& ParamTree::operator=(const ParamTree& other) {
    if (this == &other) return *this;
    ParamTree tmp(other);
    *this = std::move(tmp);
    return *this;
}

void ParamTree::freeze() {
    frozen_ = true;
    for (auto& c : children_) c->freeze();
}

const ParamTree* ParamTree::find_child(const std::string& n) const {
    for (const auto& c : children_)
        if (c->name_ == n) return c.get();
    return nullptr;
}

const std::pair<std::string, ParamValue>* ParamTree::find_leaf(const std::string& n) const {
    for (const auto& l : leaves_)
        if (l.first == n) return &l;
    return nullptr;
}

ParamTree& ParamTree::add_child(const std::string& child_name) {
    if (frozen_) throw ParamError("cannot add child '" + child_name + "': structure of '" + name_ + "' is frozen");
    if (find_child(child_name) || find_leaf(child_name))
        throw ParamError("duplicate name '" + child_name + "' under '" + name_ + "'");
    children_.push_back(std::make_unique<ParamTree>(child_name));
    return *children_.back();
}

void ParamTree::add_leaf(const std::string& leaf_name, ParamValue default_value) {
    if (frozen_) throw ParamError("cannot add leaf '" + leaf_name + "': structure of '" + name_ + "' is frozen");
    if (find_child(leaf_name) || find_leaf(leaf_name))
        throw ParamError("duplicate name '" + leaf_name + "' under '" + name_ + "'");
    leaves_.emplace_back(leaf_name, std::move(default_value));
}

void ParamTree::throw_unknown(const std::string& path, const std::string& segment) const {
    std::vector<std::string> sibs;
    for (const auto& l : leaves_) sibs.push_back(l.first);
    for (const auto& c : children_) sibs.push_back(c->name_);
    std::string msg = "unknown parameter '" + path + "' (no '" + segment +
                      "' under '" + name_ + "')";
    std::string near = suggest(segment, std::move(sibs));
    if (!near.empty()) msg += "; nearest: " + near;
    throw ParamError(msg);
}

ParamTree::Walk ParamTree::walk(const std::string& path) const {
    const ParamTree* node = this;
    std::size_t pos = 0;
    for (;;) {
        std::size_t dot = path.find('.', pos);
        if (dot == std::string::npos)
            return {node, path.substr(pos)};
        std::string seg = path.substr(pos, dot - pos);
        const ParamTree* next = node->find_child(seg);
        if (!next) node->throw_unknown(path, seg);
        node = next;
        pos = dot + 1;
    }
}

bool ParamTree::has_leaf(const std::string& path) const {
    try {
        Walk w = walk(path);
        return w.node->find_leaf(w.last) != nullptr;
    } catch (const ParamError&) {
        return false;
    }
}

bool ParamTree::has_child(const std::string& path) const {
    try {
        Walk w = walk(path);
        return w.node->find_child(w.last) != nullptr;
    } catch (const ParamError&) {
        return false;
    }
}

const ParamTree& ParamTree::child(const std::string& path) const {
    Walk w = walk(path);
    const ParamTree* c = w.node->find_child(w.last);
    if (!c) w.node->throw_unknown(path, w.last);
    return *c;
}

ParamTree& ParamTree::child(const std::string& path) {
    return const_cast<ParamTree&>(static_cast<const ParamTree&>(*this).child(path));
}

const ParamValue& ParamTree::value(const std::string& path) const {
    Walk w = walk(path);
    const auto* l = w.node->find_leaf(w.last);
    if (!l) w.node->throw_unknown(path, w.last);
    return l->second;
}

void ParamTree::set(const std::string& path, ParamValue v) {
    Walk w = walk(path);
    auto* node = const_cast<ParamTree*>(w.node);
    for (auto& l : node->leaves_) {
        if (l.first != w.last) continue;
        if (l.second.index() == v.index()) {
            l.second = std::move(v);
            return;
        }
        // Ints promote into float leaves; everything else must match.
        if (std::holds_alternative<double>(l.second) &&
            std::holds_alternative<std::int64_t>(v)) {
            l.second = static_cast<double>(std::get<std::int64_t>(v));
            return;
        }
        throw ParamError("type mismatch for '" + path + "': leaf is " +
                         param_type_name(l.second) + ", got " + param_type_name(v));
    }
    node->throw_unknown(path, w.last);
}

std::vector<std::string> ParamTree::child_names() const {
    std::vector<std::string> out;
    out.reserve(children_.size());
    for (const auto& c : children_) out.push_back(c->name_);
    return out;
}

std::vector<std::string> ParamTree::leaf_names() const {
    std::vector<std::string> out;
    out.reserve(leaves_.size());
    for (const auto& l : leaves_) out.push_back(l.first);
    return out;
}

std::vector<std::string> ParamTree::leaf_paths() const {
    std::vector<std::string> out;
    for (const auto& l : leaves_) out.push_back(l.first);
    for (const auto& c : children_)
        for (const auto& p : c->leaf_paths()) out.push_back(c->name_ + "." + p);
    return out;
}

void ParamTree::overlay(const ParamTree& src) {
    for (const auto& p : src.leaf_paths()) set(p, src.value(p));
}

void ParamTree::serialize_into(std::string& out, int indent) const {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out += pad + name_ + " {\n";
    std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    for (const auto& l : leaves_)
        out += inner + l.first + " = " + format_value(l.second) + "\n";
    for (const auto& c : children_) c->serialize_into(out, indent + 1);
    out += pad + "}\n";
}

std::string ParamTree::serialize() const {
    std::string out;
    serialize_into(out, 0);
    return out;
}

bool ParamTree::same_structure(const ParamTree& other) const {
    if (name_ != other.name_) return false;
    if (leaves_.size() != other.leaves_.size()) return false;
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        if (leaves_[i].first != other.leaves_[i].first) return false;
        if (leaves_[i].second.index() != other.leaves_[i].second.index()) return false;
    }
    if (children_.size() != other.children_.size()) return false;
    for (std::size_t i = 0; i < children_.size(); ++i)
        if (!children_[i]->same_structure(*other.children_[i])) return false;
    return true;
}

bool ParamTree::operator==(const ParamTree& other) const {
    if (!same_structure(other)) return false;
    for (std::size_t i = 0; i < leaves_.size(); ++i)
        if (leaves_[i].second != other.leaves_[i].second) return false;
    for (std::size_t i = 0; i < children_.size(); ++i)
        if (!(*children_[i] == *other.children_[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Text format parsing

namespace {

struct Token {
    enum Kind { Ident, Number, String, LBrace, RBrace, LBracket, RBracket, Equals, Comma, End };
    Kind kind;
    std::string text;
    int line;
    int col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_ws();
        int line = line_, col = col_;
        if (pos_ >= src_.size()) return {Token::End, "", line, col};
        char c = src_[pos_];
        switch (c) {
            case '{': advance(); return {Token::LBrace, "{", line, col};
            case '}': advance(); return {Token::RBrace, "}", line, col};
            case '[': advance(); return {Token::LBracket, "[", line, col};
            case ']': advance(); return {Token::RBracket, "]", line, col};
            case '=': advance(); return {Token::Equals, "=", line, col};
            case ',': advance(); return {Token::Comma, ",", line, col};
            case '"': return lex_string(line, col);
        }
        if (c == '+' || c == '-') {
            char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
            if (std::isdigit(static_cast<unsigned char>(n)) || n == '.')
                return lex_number(line, col);
            if (n == 'i' || n == 'n') return lex_signed_word(line, col);
            throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return lex_number(line, col);
        if (ident_start(c)) return lex_ident(line, col);
        throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Token lex_ident(int line, int col) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
        return {Token::Ident, src_.substr(start, pos_ - start), line, col};
    }

    Token lex_signed_word(int line, int col) {
        std::size_t start = pos_;
        advance();  // sign
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
        std::string text = src_.substr(start, pos_ - start);
        if (text != "-inf" && text != "+inf" && text != "-nan" && text != "+nan")
            throw ParseError("malformed number '" + text + "'", line, col);
        return {Token::Number, text, line, col};
    }

    Token lex_number(int line, int col) {
        std::size_t start = pos_;
        if (src_[pos_] == '+' || src_[pos_] == '-') advance();
        bool saw_digit = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            advance();
            saw_digit = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                advance();
                saw_digit = true;
            }
        }
        if (!saw_digit) throw ParseError("malformed number", line, col);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            bool exp_digit = false;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                advance();
                exp_digit = true;
            }
            if (!exp_digit) throw ParseError("malformed exponent", line, col);
        }
        return {Token::Number, src_.substr(start, pos_ - start), line, col};
    }

    Token lex_string(int line, int col) {
        advance();  // opening quote
        std::string out;
        while (pos_ < src_.size() && src_[pos_] != '"') {
            char c = src_[pos_];
            if (c == '\n') throw ParseError("unterminated string", line, col);
            if (c == '\\') {
                advance();
                if (pos_ >= src_.size()) throw ParseError("unterminated string", line, col);
                char e = src_[pos_];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default:
                        throw ParseError("unknown escape '\\" + std::string(1, e) + "'",
                                         line_, col_);
                }
                advance();
            } else {
                out += c;
                advance();
            }
        }
        if (pos_ >= src_.size()) throw ParseError("unterminated string", line, col);
        advance();  // closing quote
        return {Token::String, out, line, col};
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) { cur_ = lex_.next(); }

    ParamTree parse_document() {
        Token name = expect(Token::Ident, "block name");
        ParamTree root(name.text);
        expect(Token::LBrace, "'{'");
        parse_body(root);
        if (cur_.kind != Token::End)
            throw ParseError("trailing content after closing '}'", cur_.line, cur_.col);
        root.freeze();
        return root;
    }

private:
    Token expect(Token::Kind kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError(std::string("expected ") + what + ", got '" + cur_.text + "'",
                             cur_.line, cur_.col);
        Token t = cur_;
        cur_ = lex_.next();
        return t;
    }

    void parse_body(ParamTree& node) {
        for (;;) {
            if (cur_.kind == Token::RBrace) {
                cur_ = lex_.next();
                return;
            }
            Token name = expect(Token::Ident, "name or '}'");
            if (cur_.kind == Token::LBrace) {
                if (node.has_child(name.text) || node.has_leaf(name.text))
                    throw ParseError("duplicate name '" + name.text + "'", name.line, name.col);
                cur_ = lex_.next();
                parse_body(node.add_child(name.text));
            } else if (cur_.kind == Token::Equals) {
                if (node.has_child(name.text) || node.has_leaf(name.text))
                    throw ParseError("duplicate name '" + name.text + "'", name.line, name.col);
                cur_ = lex_.next();
                node.add_leaf(name.text, parse_value());
            } else {
                throw ParseError("expected '=' or '{' after '" + name.text + "'",
                                 cur_.line, cur_.col);
            }
        }
    }

    double number_as_double(const Token& t) {
        if (t.text == "inf" || t.text == "+inf") return HUGE_VAL;
        if (t.text == "-inf") return -HUGE_VAL;
        if (t.text == "nan" || t.text == "+nan" || t.text == "-nan") return NAN;
        double d = 0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
        if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
            throw ParseError("malformed number '" + t.text + "'", t.line, t.col);
        return d;
    }

    ParamValue parse_value() {
        Token t = cur_;
        switch (t.kind) {
            case Token::Ident:
                cur_ = lex_.next();
                if (t.text == "true") return true;
                if (t.text == "false") return false;
                if (t.text == "inf") return HUGE_VAL;
                if (t.text == "nan") return static_cast<double>(NAN);
                throw ParseError("unexpected word '" + t.text + "' in value position",
                                 t.line, t.col);
            case Token::String:
                cur_ = lex_.next();
                return t.text;
            case Token::Number: {
                cur_ = lex_.next();
                if (t.text.find_first_of(".eE") == std::string::npos &&
                    t.text.find("inf") == std::string::npos &&
                    t.text.find("nan") == std::string::npos) {
                    std::int64_t i = 0;
                    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), i);
                    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
                        throw ParseError("integer out of range '" + t.text + "'", t.line, t.col);
                    return i;
                }
                return number_as_double(t);
            }
            case Token::LBracket: {
                cur_ = lex_.next();
                std::vector<double> xs;
                if (cur_.kind == Token::RBracket) {
                    cur_ = lex_.next();
                    return xs;
                }
                for (;;) {
                    Token n = cur_;
                    if (n.kind != Token::Number &&
                        !(n.kind == Token::Ident && (n.text == "inf" || n.text == "nan")))
                        throw ParseError("expected number in list, got '" + n.text + "'",
                                         n.line, n.col);
                    xs.push_back(number_as_double(n));
                    cur_ = lex_.next();
                    if (cur_.kind == Token::Comma) {
                        cur_ = lex_.next();
                        continue;
                    }
                    if (cur_.kind == Token::RBracket) {
                        cur_ = lex_.next();
                        return xs;
                    }
                    throw ParseError("expected ',' or ']' in list", cur_.line, cur_.col);
                }
            }
            default:
                throw ParseError("expected value, got '" + t.text + "'", t.line, t.col);
        }
    }

    Lexer lex_;
    Token cur_;
};

}  // namespace

ParamTree ParamTree::deserialize(const std::string& text) {
    Parser p(text);
    return p.parse_document();
}

void ParamTree::set_from_string(const std::string& path, const std::string& text) {
    const ParamValue& cur = value(path);
    if (std::holds_alternative<std::string>(cur)) {
        // Raw text wins for string leaves so shell quoting stays simple;
        // a quoted form is unwrapped for symmetry with the file format.
        if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
            Lexer lx(text);
            Token t = lx.next();
            set(path, t.text);
        } else {
            set(path, text);
        }
        return;
    }
    Lexer lx(text);
    Token t = lx.next();
    try {
        switch (cur.index()) {
            case 0: {  // bool
                if (t.text == "true" || t.text == "1") { set(path, true); return; }
                if (t.text == "false" || t.text == "0") { set(path, false); return; }
                break;
            }
            case 1: {  // int
                if (t.kind == Token::Number) {
                    std::int64_t i = 0;
                    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), i);
                    if (res.ec == std::errc() && res.ptr == t.text.data() + t.text.size()) {
                        set(path, i);
                        return;
                    }
                }
                break;
            }
            case 2: {  // float
                if (t.kind == Token::Number ||
                    (t.kind == Token::Ident && (t.text == "inf" || t.text == "nan"))) {
                    char* end = nullptr;
                    double d = std::strtod(text.c_str(), &end);
                    if (end && *end == '\0') {
                        set(path, d);
                        return;
                    }
                }
                break;
            }
            case 4: {  // float-list
                std::string doc = "v { x = " + text + " }";
                ParamTree tmp = ParamTree::deserialize(doc);
                set(path, tmp.get<std::vector<double>>("x"));
                return;
            }
        }
    } catch (const ParseError&) {
        // fall through to the uniform error below
    }
    throw ParamError("cannot parse '" + text + "' as " + param_type_name(cur) +
                     " for parameter '" + path + "'");
}

}  // namespace spectralkit
