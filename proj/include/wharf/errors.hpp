#pragma once

#include <stdexcept>
#include <string>

namespace wharf {

/// A value does not fit the 32-bit operand budget of the triplet encoding.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Malformed compressed data or a broken walk chain.
class CorruptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (unsorted input, bad parameters).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotFoundError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Line-numbered failure while reading a text input.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string const& source, std::size_t line, std::string const& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line)
    {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace wharf
