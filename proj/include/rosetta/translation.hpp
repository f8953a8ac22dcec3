#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rosetta/lean_frontend.hpp"

namespace rosetta {

inline constexpr std::string_view kDefaultSeparator = "##SEP##";

struct ScrambleSpec {
    std::string separator{kDefaultSeparator};
};

/// Symbol substitution plus scrambling. The map must be injective so every
/// translated statement decodes uniquely.
class FocusedKey {
public:
    FocusedKey(std::string name, std::map<std::string, std::string> symbol_map, ScrambleSpec scramble = {});

    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, std::string>& symbol_map() const noexcept { return forward_; }
    const std::map<std::string, std::string>& inverse_map() const noexcept { return inverse_; }
    const ScrambleSpec& scramble() const noexcept { return scramble_; }

    std::vector<std::string> sources() const;
    std::vector<std::string> targets() const;

private:
    std::string name_;
    std::map<std::string, std::string> forward_;
    std::map<std::string, std::string> inverse_;
    ScrambleSpec scramble_;
};

std::vector<std::string> default_inversion_ops();

/// Chain inversion around comparison/implication operators followed by a
/// uniform codepoint shift.
struct RandomKey {
    std::string name;
    std::int32_t shift = 10;
    std::vector<std::string> inversion_ops = default_inversion_ops();

    void validate() const;  // throws BadShift / BadKey
};

using TranslationKey = std::variant<FocusedKey, RandomKey>;

const std::string& key_name(const TranslationKey& key);

/// Key file: `kind: focused|random` header, then `name:`, and either
/// `SOURCE<TAB>TARGET` lines plus `separator:` or `shift:` and
/// `inversion_ops:`. Lines starting with `#` (and without a tab) are comments.
TranslationKey parse_key(std::string_view text);
TranslationKey load_key(const std::filesystem::path& path);

std::string format_key(const TranslationKey& key);

// Focused key steps -----------------------------------------------------------

TokenSeq apply_symbol_map(std::span<const Token> tokens, const FocusedKey& key);
TokenSeq unapply_symbol_map(std::span<const Token> tokens, const FocusedKey& key);

/// tokens ++ [separator] ++ reverse(tokens).
TokenSeq scramble(std::span<const Token> tokens, const ScrambleSpec& spec);
TokenSeq unscramble(std::span<const Token> tokens, const ScrambleSpec& spec);

// Random key steps ------------------------------------------------------------

std::string shift_codepoints(std::string_view text, std::int64_t n);

/// Mirrors every chain `s0 op1 s1 ... opN sN` into `sN opN ... op1 s0`,
/// recursing into parenthesized groups. Whitespace around operators keeps
/// its position, so the operation is an involution.
StmtTree invert_chains(const StmtTree& tree, std::span<const std::string> ops);

// Whole-statement translation --------------------------------------------------

/// Binds a key to the source symbol inventory.
class Translator {
public:
    Translator(TranslationKey key, SymbolInventory inventory = SymbolInventory::lean_default());

    const TranslationKey& key() const noexcept { return key_; }
    const std::string& name() const { return key_name(key_); }
    const SymbolInventory& source_inventory() const noexcept { return source_; }

    /// Throws UnbalancedParens for unparsable statements and
    /// NonInvertibleStatement when the output would not decode uniquely.
    std::string translate(std::string_view statement) const;
    std::string detranslate(std::string_view text) const;

private:
    std::string encode(std::string_view statement) const;

    TranslationKey key_;
    SymbolInventory source_;
    SymbolInventory target_;  // inventory used to re-tokenize translated text
};

}  // namespace rosetta
