#include "freqid/error.hpp"

namespace freqid {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::PoleAtPoint: return "PoleAtPoint";
    case ErrorCode::SingularResolvent: return "SingularResolvent";
    case ErrorCode::InvalidMargin: return "InvalidMargin";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::DegenerateImpulse: return "DegenerateImpulse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotInSpan: return "NotInSpan";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularE: return "SingularE";
    case ErrorCode::ComplexRealization: return "ComplexRealization";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace freqid
