#include "rosetta/translation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rosetta/errors.hpp"
#include "rosetta/utf8.hpp"

namespace rosetta {

// ---------------------------------------------------------------------------
// keys

FocusedKey::FocusedKey(std::string name, std::map<std::string, std::string> symbol_map, ScrambleSpec scramble)
    : name_(std::move(name)), forward_(std::move(symbol_map)), scramble_(std::move(scramble)) {
    if (scramble_.separator.empty()) throw BadKey("scramble separator is empty");
    for (const auto& [source, target] : forward_) {
        if (source.empty() || target.empty()) throw BadKey("empty symbol in map");
        if (target.find(scramble_.separator) != std::string::npos) {
            throw BadKey("target '" + target + "' contains the scramble separator");
        }
        const auto [it, inserted] = inverse_.emplace(target, source);
        if (!inserted) throw NonInjectiveMap(it->second, source, target);
    }
}

std::vector<std::string> FocusedKey::sources() const {
    std::vector<std::string> out;
    for (const auto& [s, t] : forward_) out.push_back(s);
    return out;
}

std::vector<std::string> FocusedKey::targets() const {
    std::vector<std::string> out;
    for (const auto& [t, s] : inverse_) out.push_back(t);
    return out;
}

std::vector<std::string> default_inversion_ops() { return {"->", ">", "<", ">=", "<="}; }

void RandomKey::validate() const {
    if (shift == 0) throw BadShift("shift must be non-zero");
    if (shift > static_cast<std::int32_t>(utf8::kMaxScalar) || shift < -static_cast<std::int32_t>(utf8::kMaxScalar)) {
        throw BadShift("shift " + std::to_string(shift) + " exceeds the scalar range");
    }
    for (const auto& op : inversion_ops) {
        if (op.empty()) throw BadKey("empty inversion operator");
        if (op == "(" || op == ")") throw BadKey("parentheses cannot be inversion operators");
    }
}

const std::string& key_name(const TranslationKey& key) {
    return std::visit(
        [](const auto& k) -> const std::string& {
            if constexpr (std::is_same_v<std::decay_t<decltype(k)>, FocusedKey>) {
                return k.name();
            } else {
                return k.name;
            }
        },
        key);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

TranslationKey parse_key(std::string_view text) {
    enum class Kind { unknown, focused, random };
    Kind kind = Kind::unknown;
    std::string name;
    std::map<std::string, std::string> mapping;
    ScrambleSpec spec;
    RandomKey random;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;

        if (const auto tab = line.find('\t'); tab != std::string_view::npos) {
            if (kind != Kind::focused) throw KeyParseError(line_no, "symbol mapping outside a focused key");
            const auto source = line.substr(0, tab);
            const auto target = line.substr(tab + 1);
            if (source.empty() || target.empty() || target.find('\t') != std::string_view::npos) {
                throw KeyParseError(line_no, "expected SOURCE<TAB>TARGET");
            }
            if (!mapping.emplace(std::string(source), std::string(target)).second) {
                throw KeyParseError(line_no, "symbol '" + std::string(source) + "' mapped twice");
            }
            continue;
        }
        if (line.front() == '#') continue;

        const auto colon = line.find(':');
        if (colon == std::string_view::npos) throw KeyParseError(line_no, "expected 'field: value'");
        const auto field = trim(line.substr(0, colon));
        const auto value = trim(line.substr(colon + 1));

        if (field == "kind") {
            if (kind != Kind::unknown) throw KeyParseError(line_no, "duplicate kind");
            if (value == "focused") {
                kind = Kind::focused;
            } else if (value == "random") {
                kind = Kind::random;
            } else {
                throw KeyParseError(line_no, "kind must be 'focused' or 'random'");
            }
            continue;
        }
        if (kind == Kind::unknown) throw KeyParseError(line_no, "first field must be 'kind'");

        if (field == "name") {
            name = std::string(value);
        } else if (field == "separator" && kind == Kind::focused) {
            if (value.empty()) throw KeyParseError(line_no, "empty separator");
            spec.separator = std::string(value);
        } else if (field == "shift" && kind == Kind::random) {
            std::int64_t shift = 0;
            const auto* last = value.data() + value.size();
            const auto [ptr, ec] = std::from_chars(value.data(), last, shift);
            if (ec != std::errc{} || ptr != last) throw BadShift("'" + std::string(value) + "' is not an integer");
            if (shift > utf8::kMaxScalar || shift < -static_cast<std::int64_t>(utf8::kMaxScalar)) {
                throw BadShift(std::string(value) + " exceeds the scalar range");
            }
            random.shift = static_cast<std::int32_t>(shift);
        } else if (field == "inversion_ops" && kind == Kind::random) {
            random.inversion_ops.clear();
            std::size_t from = 0;
            while (from <= value.size()) {
                auto comma = value.find(',', from);
                if (comma == std::string_view::npos) comma = value.size();
                const auto op = trim(value.substr(from, comma - from));
                if (op.empty()) throw KeyParseError(line_no, "empty inversion operator");
                random.inversion_ops.emplace_back(op);
                from = comma + 1;
            }
        } else {
            throw KeyParseError(line_no, "unexpected field '" + std::string(field) + "'");
        }
    }

    switch (kind) {
        case Kind::focused:
            return FocusedKey(name.empty() ? "focused" : name, std::move(mapping), std::move(spec));
        case Kind::random:
            random.name = name.empty() ? "random" : name;
            random.validate();
            return random;
        case Kind::unknown:
            break;
    }
    throw KeyParseError(line_no, "missing 'kind' header");
}

TranslationKey load_key(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open key file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key(buf.str());
}

std::string format_key(const TranslationKey& key) {
    std::ostringstream out;
    if (const auto* focused = std::get_if<FocusedKey>(&key)) {
        out << "kind: focused\nname: " << focused->name() << "\nseparator: " << focused->scramble().separator
            << '\n';
        for (const auto& [s, t] : focused->symbol_map()) out << s << '\t' << t << '\n';
    } else {
        const auto& random = std::get<RandomKey>(key);
        out << "kind: random\nname: " << random.name << "\nshift: " << random.shift << "\ninversion_ops: ";
        for (std::size_t i = 0; i < random.inversion_ops.size(); ++i) {
            out << (i ? "," : "") << random.inversion_ops[i];
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// focused key steps

TokenSeq apply_symbol_map(std::span<const Token> tokens, const FocusedKey& key) {
    TokenSeq out(tokens.begin(), tokens.end());
    const auto& map = key.symbol_map();
    for (auto& t : out) {
        if (t.kind != TokenKind::symbol) continue;
        if (const auto it = map.find(t.text); it != map.end()) t.text = it->second;
    }
    reindex(out);
    return out;
}

TokenSeq unapply_symbol_map(std::span<const Token> tokens, const FocusedKey& key) {
    TokenSeq out(tokens.begin(), tokens.end());
    const auto& inverse = key.inverse_map();
    const auto& forward = key.symbol_map();
    for (auto& t : out) {
        if (t.kind != TokenKind::symbol) continue;
        if (const auto it = inverse.find(t.text); it != inverse.end()) {
            t.text = it->second;
        } else if (forward.contains(t.text)) {
            // A mapped source symbol can never survive apply_symbol_map.
            throw UnknownTargetSymbol(t.text);
        }
    }
    reindex(out);
    return out;
}

TokenSeq scramble(std::span<const Token> tokens, const ScrambleSpec& spec) {
    if (render(tokens).find(spec.separator) != std::string::npos) throw SeparatorCollision(spec.separator);
    TokenSeq out;
    out.reserve(2 * tokens.size() + 1);
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.push_back(Token{TokenKind::symbol, spec.separator, 0});
    out.insert(out.end(), tokens.rbegin(), tokens.rend());
    reindex(out);
    return out;
}

TokenSeq unscramble(std::span<const Token> tokens, const ScrambleSpec& spec) {
    const auto sep = std::find_if(tokens.begin(), tokens.end(), [&](const Token& t) { return t.text == spec.separator; });
    if (sep == tokens.end()) throw MalformedScramble(MalformedScramble::Reason::no_separator);
    const auto half = static_cast<std::size_t>(sep - tokens.begin());
    if (tokens.size() != 2 * half + 1) throw MalformedScramble(MalformedScramble::Reason::bad_length);
    for (std::size_t i = 0; i < half; ++i) {
        const auto& head = tokens[i];
        const auto& tail = tokens[tokens.size() - 1 - i];
        if (head.kind != tail.kind || head.text != tail.text) {
            throw MalformedScramble(MalformedScramble::Reason::halves_mismatch);
        }
    }
    TokenSeq out(tokens.begin(), sep);
    reindex(out);
    return out;
}

// ---------------------------------------------------------------------------
// random key steps

std::string shift_codepoints(std::string_view text, std::int64_t n) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
        const auto d = utf8::decode(text, pos);
        if (!d.valid) throw InvalidUtf8(pos);
        const auto shifted = static_cast<long long>(d.codepoint) + n;
        if (!utf8::is_scalar(shifted)) throw InvalidCodepoint(pos, shifted);
        utf8::append(out, static_cast<char32_t>(shifted));
        pos += d.length;
    }
    return out;
}

namespace {

std::vector<Node> invert_level(std::span<const Node> level, std::span<const std::string> ops) {
    std::vector<Node> nodes(level.begin(), level.end());
    for (auto& n : nodes) {
        if (n.group) n.children = invert_level(n.children, ops);
    }
    const auto view = chain_view(nodes, ops);
    if (view.operators.empty()) return nodes;

    // Each segment splits into leading whitespace, core, trailing whitespace.
    struct Parts {
        std::size_t begin, core_begin, core_end, end;
    };
    std::vector<Parts> parts;
    for (const auto& [b, e] : view.segments) {
        auto cb = b;
        while (cb < e && nodes[cb].is_whitespace()) ++cb;
        auto ce = e;
        while (ce > cb && nodes[ce - 1].is_whitespace()) --ce;
        parts.push_back({b, cb, ce, e});
    }

    const auto n = view.operators.size();
    std::vector<Node> out;
    out.reserve(nodes.size());
    for (std::size_t i = 0; i <= n; ++i) {
        const auto& here = parts[i];
        const auto& mirror = parts[n - i];
        out.insert(out.end(), nodes.begin() + here.begin, nodes.begin() + here.core_begin);
        out.insert(out.end(), nodes.begin() + mirror.core_begin, nodes.begin() + mirror.core_end);
        out.insert(out.end(), nodes.begin() + here.core_end, nodes.begin() + here.end);
        if (i < n) out.push_back(nodes[view.operators[n - 1 - i]]);
    }
    return out;
}

}  // namespace

StmtTree invert_chains(const StmtTree& tree, std::span<const std::string> ops) {
    return StmtTree{invert_level(tree.nodes, ops)};
}

// ---------------------------------------------------------------------------
// Translator

Translator::Translator(TranslationKey key, SymbolInventory inventory) : key_(std::move(key)) {
    if (const auto* random = std::get_if<RandomKey>(&key_)) {
        random->validate();
        source_ = inventory.merged(random->inversion_ops);
    } else {
        source_ = std::move(inventory);
        target_ = source_.merged(std::get<FocusedKey>(key_).targets());
    }
}

std::string Translator::encode(std::string_view statement) const {
    const auto tokens = tokenize(statement, source_);
    const auto tree = parse_structure(tokens);
    if (const auto* focused = std::get_if<FocusedKey>(&key_)) {
        return render(scramble(apply_symbol_map(tokens, *focused), focused->scramble()));
    }
    const auto& random = std::get<RandomKey>(key_);
    return shift_codepoints(render(invert_chains(tree, random.inversion_ops)), random.shift);
}

std::string Translator::translate(std::string_view statement) const {
    auto out = encode(statement);
    try {
        if (detranslate(out) == statement) return out;
    } catch (const DataError&) {
    }
    throw NonInvertibleStatement(std::string(statement));
}

std::string Translator::detranslate(std::string_view text) const {
    if (const auto* focused = std::get_if<FocusedKey>(&key_)) {
        const auto& separator = focused->scramble().separator;
        const auto at = text.find(separator);
        if (at == std::string_view::npos) throw MalformedScramble(MalformedScramble::Reason::no_separator);
        const auto head = text.substr(0, at);
        const auto tail = text.substr(at + separator.size());
        if (head.size() != tail.size()) throw MalformedScramble(MalformedScramble::Reason::bad_length);
        auto tokens = tokenize(head, target_);
        std::reverse(tokens.begin(), tokens.end());
        if (render(tokens) != tail) throw MalformedScramble(MalformedScramble::Reason::halves_mismatch);
        std::reverse(tokens.begin(), tokens.end());
        return render(unapply_symbol_map(tokens, *focused));
    }
    const auto& random = std::get<RandomKey>(key_);
    const auto source = shift_codepoints(text, -static_cast<std::int64_t>(random.shift));
    return render(invert_chains(parse_structure(tokenize(source, source_)), random.inversion_ops));
}

}  // namespace rosetta
