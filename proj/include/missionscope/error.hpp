#pragma once

#include <stdexcept>
#include <string>

namespace missionscope {

// Base of every library exception. `code()` is a short stable tag that the
// CLI and the HTTP facade map to exit codes / ApiError codes.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define MISSIONSCOPE_DEFINE_ERROR(Name, tag)                                  \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& message) : Error(tag, message) {}    \
    };

MISSIONSCOPE_DEFINE_ERROR(IntegrityError, "integrity")
MISSIONSCOPE_DEFINE_ERROR(KindError, "kind")
MISSIONSCOPE_DEFINE_ERROR(CompositionError, "composition")
MISSIONSCOPE_DEFINE_ERROR(DirectionError, "direction")
MISSIONSCOPE_DEFINE_ERROR(ReferenceError, "reference")
MISSIONSCOPE_DEFINE_ERROR(DuplicateError, "duplicate")
MISSIONSCOPE_DEFINE_ERROR(FormatError, "format")
MISSIONSCOPE_DEFINE_ERROR(LookupError, "lookup")
MISSIONSCOPE_DEFINE_ERROR(ConfigError, "config")
MISSIONSCOPE_DEFINE_ERROR(TriageError, "triage")
MISSIONSCOPE_DEFINE_ERROR(DomainError, "domain")
MISSIONSCOPE_DEFINE_ERROR(IoError, "io")
MISSIONSCOPE_DEFINE_ERROR(PreconditionError, "precondition")

#undef MISSIONSCOPE_DEFINE_ERROR

// Malformed XML or an unsupported GraphML construct, with the position the
// tokenizer was at when it gave up.
class ParseError : public Error {
public:
    ParseError(const std::string& message, long line, long column)
        : Error("parse", message + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line), column_(column) {}

    long line() const noexcept { return line_; }
    long column() const noexcept { return column_; }

private:
    long line_;
    long column_;
};

} // namespace missionscope
