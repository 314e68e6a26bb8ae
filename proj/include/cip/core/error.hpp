#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cip {

enum class ErrorKind {
    invalid_input,
    shape,
    duplicate_query,
    empty_support,
    parse,
    lookup,
    length_exceeded,
    selection,
    sampling,
    calibration,
    transport,
    capability,
    configuration,
    missing_logit,
    proposal,
    answer,
    io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> line,
          std::optional<std::size_t> column = std::nullopt);

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    std::optional<std::size_t> column() const noexcept { return column_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> line_;
    std::optional<std::size_t> column_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);
[[noreturn]] void fail(ErrorKind kind, const std::string& message, std::size_t line,
                       std::optional<std::size_t> column = std::nullopt);

}  // namespace cip
