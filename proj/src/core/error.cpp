#include "cip/core/error.hpp"

namespace cip {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::shape: return "shape";
        case ErrorKind::duplicate_query: return "duplicate-query";
        case ErrorKind::empty_support: return "empty-support";
        case ErrorKind::parse: return "parse";
        case ErrorKind::lookup: return "lookup";
        case ErrorKind::length_exceeded: return "length-exceeded";
        case ErrorKind::selection: return "selection";
        case ErrorKind::sampling: return "sampling";
        case ErrorKind::calibration: return "calibration";
        case ErrorKind::transport: return "transport";
        case ErrorKind::capability: return "capability";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::missing_logit: return "missing-logit";
        case ErrorKind::proposal: return "proposal";
        case ErrorKind::answer: return "answer";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

namespace {

std::string located(const std::string& message, std::optional<std::size_t> line,
                    std::optional<std::size_t> column) {
    if (!line) return message;
    std::string out = "line " + std::to_string(*line);
    if (column) out += ", column " + std::to_string(*column);
    return out + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> line,
             std::optional<std::size_t> column)
    : std::runtime_error(located(message, line, column)), kind_(kind), line_(line), column_(column) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

void fail(ErrorKind kind, const std::string& message, std::size_t line, std::optional<std::size_t> column) {
    throw Error(kind, message, line, column);
}

}  // namespace cip
