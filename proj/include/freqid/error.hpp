#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace freqid {

/// Failure categories surfaced by the library. Each operation documents which
/// of these it can raise.
enum class ErrorCode {
    PoleAtPoint,
    SingularResolvent,
    InvalidMargin,
    InvalidRange,
    UnstableSystem,
    DegenerateImpulse,
    DimensionMismatch,
    NotInSpan,
    IndexOutOfRange,
    InvalidConfig,
    NotHermitian,
    RankDeficient,
    SingularE,
    ComplexRealization,
    InvalidParams,
    EmptyGrid,
    DegenerateFit,
    IoError,
    ParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace freqid
