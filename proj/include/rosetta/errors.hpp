#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rosetta {

/// Base of every error raised by the toolkit. The category decides the CLI
/// exit status: I/O problems exit 1, bad data or failed translation exit 2,
/// model transport failures exit 3.
class Error : public std::runtime_error {
public:
    enum class Category { io = 1, data = 2, transport = 3 };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    Category category_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(Category::io, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Category::data, what) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(Category::transport, what) {}
};

// lean_frontend

class UnbalancedParens : public DataError {
public:
    explicit UnbalancedParens(std::size_t position)
        : DataError("unbalanced parentheses at byte " + std::to_string(position)),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class InvalidUtf8 : public DataError {
public:
    explicit InvalidUtf8(std::size_t position)
        : DataError("invalid UTF-8 at byte " + std::to_string(position)) {}
};

// translation_engine

class KeyParseError : public DataError {
public:
    KeyParseError(std::size_t line, const std::string& what)
        : DataError("key file line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NonInjectiveMap : public DataError {
public:
    NonInjectiveMap(const std::string& first, const std::string& second, const std::string& target)
        : DataError("symbols '" + first + "' and '" + second + "' both map to '" + target + "'"),
          first_(first), second_(second) {}
    const std::string& first() const noexcept { return first_; }
    const std::string& second() const noexcept { return second_; }

private:
    std::string first_;
    std::string second_;
};

class BadShift : public DataError {
public:
    explicit BadShift(const std::string& what) : DataError("bad shift: " + what) {}
};

class BadKey : public DataError {
public:
    explicit BadKey(const std::string& what) : DataError("bad key: " + what) {}
};

class UnknownTargetSymbol : public DataError {
public:
    explicit UnknownTargetSymbol(const std::string& symbol)
        : DataError("symbol '" + symbol + "' has no preimage under the key"), symbol_(symbol) {}
    const std::string& symbol() const noexcept { return symbol_; }

private:
    std::string symbol_;
};

class SeparatorCollision : public DataError {
public:
    explicit SeparatorCollision(const std::string& separator)
        : DataError("scramble separator '" + separator + "' occurs in the input") {}
};

class MalformedScramble : public DataError {
public:
    enum class Reason { no_separator, halves_mismatch, bad_length };

    explicit MalformedScramble(Reason reason)
        : DataError(std::string("malformed scramble: ") + describe(reason)), reason_(reason) {}
    Reason reason() const noexcept { return reason_; }

    static const char* describe(Reason reason) noexcept {
        switch (reason) {
            case Reason::no_separator: return "no-separator";
            case Reason::halves_mismatch: return "halves-mismatch";
            case Reason::bad_length: return "bad-length";
        }
        return "?";
    }

private:
    Reason reason_;
};

class InvalidCodepoint : public DataError {
public:
    InvalidCodepoint(std::size_t position, long long value)
        : DataError("shift at byte " + std::to_string(position) + " yields invalid scalar value " +
                    std::to_string(value)) {}
};

class NonInvertibleStatement : public DataError {
public:
    explicit NonInvertibleStatement(const std::string& statement)
        : DataError("translation of '" + statement + "' does not decode back to the source") {}
};

// dataset_builder

class SourceParseError : public DataError {
public:
    SourceParseError(std::size_t line, const std::string& what)
        : DataError("corpus line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateId : public DataError {
public:
    explicit DuplicateId(const std::string& id) : DataError("duplicate problem id '" + id + "'") {}
};

class MissingLabel : public DataError {
public:
    explicit MissingLabel(std::size_t line)
        : DataError("corpus line " + std::to_string(line) + ": missing truth label"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SizeExceedsCorpus : public DataError {
public:
    SizeExceedsCorpus(std::size_t requested, std::size_t available)
        : DataError("requested " + std::to_string(requested) + " records but only " +
                    std::to_string(available) + " are available") {}
};

class InvalidRecord : public DataError {
public:
    explicit InvalidRecord(const std::string& what) : DataError("invalid record: " + what) {}
};

// eval_harness / reporting

class ZeroTotal : public DataError {
public:
    ZeroTotal() : DataError("accuracy of an empty set is undefined") {}
};

class MixedFamilies : public DataError {
public:
    explicit MixedFamilies(const std::string& what) : DataError("mixed test-set families: " + what) {}
};

class EmptyInput : public DataError {
public:
    explicit EmptyInput(const std::string& what) : DataError("nothing to aggregate: " + what) {}
};

class TooFewRuns : public DataError {
public:
    TooFewRuns() : DataError("standard error of the mean needs at least two runs") {}
};

class MissingCell : public DataError {
public:
    explicit MissingCell(const std::string& cell) : DataError("missing summary cell " + cell) {}
};

}  // namespace rosetta
