#include "rosetta/lean_frontend.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rosetta/errors.hpp"
#include "rosetta/utf8.hpp"

namespace rosetta {

namespace detail {
extern const std::string_view kDefaultInventoryText;
}

const char* to_string(TokenKind kind) noexcept {
    switch (kind) {
        case TokenKind::identifier: return "id";
        case TokenKind::number: return "num";
        case TokenKind::symbol: return "sym";
        case TokenKind::whitespace: return "ws";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SymbolInventory

SymbolInventory::SymbolInventory(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    std::erase_if(symbols_, [](const std::string& s) { return s.empty(); });
    std::sort(symbols_.begin(), symbols_.end());
    symbols_.erase(std::unique(symbols_.begin(), symbols_.end()), symbols_.end());
    for (const auto& s : symbols_) by_lead_[static_cast<unsigned char>(s.front())].push_back(s);
    for (auto& [lead, list] : by_lead_) {
        std::stable_sort(list.begin(), list.end(),
                         [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    }
}

SymbolInventory SymbolInventory::parse(std::string_view text) {
    std::vector<std::string> symbols;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        // Surrounding blanks are not part of a symbol.
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        if (!line.empty() && line.front() != '#') symbols.emplace_back(line);
        start = end + 1;
    }
    return SymbolInventory(std::move(symbols));
}

SymbolInventory SymbolInventory::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open symbol inventory " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto inventory = parse(buf.str());
    if (inventory.empty()) throw DataError("symbol inventory " + path.string() + " is empty");
    return inventory;
}

const SymbolInventory& SymbolInventory::lean_default() {
    static const SymbolInventory inventory = parse(detail::kDefaultInventoryText);
    return inventory;
}

std::size_t SymbolInventory::match(std::string_view text, std::size_t pos) const {
    if (pos >= text.size()) return 0;
    const auto it = by_lead_.find(static_cast<unsigned char>(text[pos]));
    if (it == by_lead_.end()) return 0;
    const auto rest = text.substr(pos);
    for (const auto& s : it->second) {
        if (rest.starts_with(s)) return s.size();
    }
    return 0;
}

bool SymbolInventory::contains(std::string_view symbol) const {
    return std::binary_search(symbols_.begin(), symbols_.end(), symbol,
                              [](std::string_view a, std::string_view b) { return a < b; });
}

SymbolInventory SymbolInventory::merged(std::span<const std::string> extra) const {
    auto all = symbols_;
    all.insert(all.end(), extra.begin(), extra.end());
    return SymbolInventory(std::move(all));
}

// ---------------------------------------------------------------------------
// tokenize

namespace {

bool is_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == 0xA0;
}

bool is_ascii_alpha(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

// Letters Lean accepts in identifiers: Latin-1 / Latin Extended, Greek
// (λ is excluded as it is a binder), Cyrillic.
bool is_letter(char32_t c) {
    if (is_ascii_alpha(c) || c == '_') return true;
    if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
    if (c >= 0x370 && c <= 0x3FF) return c != 0x3BB;
    if (c >= 0x400 && c <= 0x4FF) return true;
    return false;
}

bool is_subscript(char32_t c) { return c >= 0x2080 && c <= 0x209C; }

bool continues_identifier(char32_t c) {
    return is_letter(c) || is_digit(c) || c == '\'' || is_subscript(c);
}

}  // namespace

TokenSeq tokenize(std::string_view text, const SymbolInventory& inventory) {
    TokenSeq tokens;
    std::size_t pos = 0;
    auto emit = [&](TokenKind kind, std::size_t end) {
        tokens.push_back(Token{kind, std::string(text.substr(pos, end - pos)), pos});
        pos = end;
    };
    auto scan = [&](std::size_t from, auto&& accept) {
        while (from < text.size()) {
            const auto d = utf8::decode(text, from);
            if (!d.valid || !accept(d.codepoint, from)) break;
            from += d.length;
        }
        return from;
    };

    while (pos < text.size()) {
        if (const auto n = inventory.match(text, pos); n > 0) {
            emit(TokenKind::symbol, pos + n);
            continue;
        }
        const auto d = utf8::decode(text, pos);
        if (!d.valid) {
            emit(TokenKind::symbol, pos + 1);
            continue;
        }
        const char32_t c = d.codepoint;
        if (is_space(c)) {
            emit(TokenKind::whitespace, scan(pos, [](char32_t x, std::size_t) { return is_space(x); }));
        } else if (is_digit(c)) {
            // Digits with an optional single fractional part ("3.14").
            auto end = scan(pos, [](char32_t x, std::size_t) { return is_digit(x); });
            if (end + 1 < text.size() && text[end] == '.' && is_digit(static_cast<unsigned char>(text[end + 1]))) {
                end = scan(end + 1, [](char32_t x, std::size_t) { return is_digit(x); });
            }
            emit(TokenKind::number, end);
        } else if (is_letter(c)) {
            // Dotted names such as Real.sqrt stay one identifier.
            auto end = pos + d.length;
            for (;;) {
                end = scan(end, [](char32_t x, std::size_t) { return continues_identifier(x); });
                if (end + 1 < text.size() && text[end] == '.') {
                    const auto next = utf8::decode(text, end + 1);
                    if (next.valid && is_letter(next.codepoint)) {
                        end += 1;
                        continue;
                    }
                }
                break;
            }
            emit(TokenKind::identifier, end);
        } else {
            emit(TokenKind::symbol, pos + d.length);
        }
    }
    return tokens;
}

std::string render(std::span<const Token> tokens) {
    std::string out;
    for (const auto& t : tokens) out += t.text;
    return out;
}

void reindex(TokenSeq& tokens) {
    std::size_t pos = 0;
    for (auto& t : tokens) {
        t.position = pos;
        pos += t.text.size();
    }
}

// ---------------------------------------------------------------------------
// structure

namespace {

bool is_open(const Token& t) { return t.kind == TokenKind::symbol && t.text == "("; }
bool is_close(const Token& t) { return t.kind == TokenKind::symbol && t.text == ")"; }

void render_into(std::string& out, std::span<const Node> nodes) {
    for (const auto& n : nodes) {
        out += n.token.text;
        if (n.group) {
            render_into(out, n.children);
            out += n.close.text;
        }
    }
}

void flatten_into(TokenSeq& out, std::span<const Node> nodes) {
    for (const auto& n : nodes) {
        out.push_back(n.token);
        if (n.group) {
            flatten_into(out, n.children);
            out.push_back(n.close);
        }
    }
}

std::size_t depth_of(std::span<const Node> nodes) {
    std::size_t d = 0;
    for (const auto& n : nodes) {
        if (n.group) d = std::max(d, 1 + depth_of(n.children));
    }
    return d;
}

}  // namespace

StmtTree parse_structure(std::span<const Token> tokens) {
    // Explicit stack of open groups; the bottom entry is the top level.
    std::vector<std::vector<Node>> stack(1);
    std::vector<Token> openers;
    for (const auto& t : tokens) {
        if (is_open(t)) {
            openers.push_back(t);
            stack.emplace_back();
        } else if (is_close(t)) {
            if (openers.empty()) throw UnbalancedParens(t.position);
            Node group{openers.back(), std::move(stack.back()), t, true};
            openers.pop_back();
            stack.pop_back();
            stack.back().push_back(std::move(group));
        } else {
            stack.back().push_back(Node{t, {}, {}, false});
        }
    }
    if (!openers.empty()) throw UnbalancedParens(openers.back().position);
    return StmtTree{std::move(stack.front())};
}

std::string render(const StmtTree& tree) {
    std::string out;
    render_into(out, tree.nodes);
    return out;
}

TokenSeq flatten(const StmtTree& tree) {
    TokenSeq out;
    flatten_into(out, tree.nodes);
    return out;
}

std::size_t depth(const StmtTree& tree) { return depth_of(tree.nodes); }

ChainView chain_view(std::span<const Node> level, std::span<const std::string> operators) {
    ChainView view;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < level.size(); ++i) {
        const auto& n = level[i];
        if (n.group || n.token.kind != TokenKind::symbol) continue;
        if (std::find(operators.begin(), operators.end(), n.token.text) == operators.end()) continue;
        view.segments.emplace_back(begin, i);
        view.operators.push_back(i);
        begin = i + 1;
    }
    view.segments.emplace_back(begin, level.size());
    return view;
}

}  // namespace rosetta
