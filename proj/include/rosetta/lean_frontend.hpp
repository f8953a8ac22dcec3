#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rosetta {

enum class TokenKind { identifier, number, symbol, whitespace };

const char* to_string(TokenKind kind) noexcept;

struct Token {
    TokenKind kind = TokenKind::symbol;
    std::string text;
    std::size_t position = 0;  // byte offset in the source

    bool operator==(const Token&) const = default;
};

using TokenSeq = std::vector<Token>;

/// The set of multi-character (and notable single-character) symbols the
/// tokenizer recognizes by maximal munch. Loaded from a plain-text file:
/// one symbol per line, `#` starts a comment line.
class SymbolInventory {
public:
    SymbolInventory() = default;
    explicit SymbolInventory(std::vector<std::string> symbols);

    static SymbolInventory parse(std::string_view text);
    static SymbolInventory load(const std::filesystem::path& path);

    /// Symbols appearing in the worked Lean examples plus the common
    /// logical and arithmetic notation of theorem statements.
    static const SymbolInventory& lean_default();

    /// Length in bytes of the longest symbol that starts at `pos`, or 0.
    std::size_t match(std::string_view text, std::size_t pos) const;

    bool contains(std::string_view symbol) const;
    SymbolInventory merged(std::span<const std::string> extra) const;

    const std::vector<std::string>& symbols() const noexcept { return symbols_; }
    bool empty() const noexcept { return symbols_.empty(); }

private:
    std::vector<std::string> symbols_;  // sorted, unique
    // First byte -> candidate symbols, longest first.
    std::unordered_map<unsigned char, std::vector<std::string>> by_lead_;
};

TokenSeq tokenize(std::string_view text, const SymbolInventory& inventory);

std::string render(std::span<const Token> tokens);

/// Rewrites positions so each token's offset matches the concatenation of
/// the sequence.
void reindex(TokenSeq& tokens);

/// A leaf token or a parenthesized group. For a group, `token` holds the
/// opening "(" and `close` the matching ")".
struct Node {
    Token token;
    std::vector<Node> children;
    Token close;
    bool group = false;

    bool is_whitespace() const noexcept { return !group && token.kind == TokenKind::whitespace; }
    bool operator==(const Node&) const = default;
};

struct StmtTree {
    std::vector<Node> nodes;

    bool operator==(const StmtTree&) const = default;
};

/// Throws UnbalancedParens on a stray ")" or unclosed "(".
StmtTree parse_structure(std::span<const Token> tokens);

std::string render(const StmtTree& tree);

/// The tree's tokens in source order, parentheses included.
TokenSeq flatten(const StmtTree& tree);

std::size_t depth(const StmtTree& tree);

/// Top level of a node sequence partitioned on chain operators. Segment i
/// spans nodes [segments[i].first, segments[i].second); operators[i] is the
/// index of the operator between segment i and i + 1.
struct ChainView {
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    std::vector<std::size_t> operators;
};

ChainView chain_view(std::span<const Node> level, std::span<const std::string> operators);

inline ChainView chain_view(const StmtTree& tree, std::span<const std::string> operators) {
    return chain_view(tree.nodes, operators);
}

}  // namespace rosetta
