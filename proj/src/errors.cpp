#include "stablekern/errors.hpp"

namespace stablekern {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParameterDomain: return "parameter-domain";
        case ErrorCode::Dimension: return "dimension";
        case ErrorCode::SingularOperator: return "singular-operator";
        case ErrorCode::Factorization: return "factorization";
        case ErrorCode::Conditioning: return "conditioning";
        case ErrorCode::InfeasibleExtension: return "infeasible-extension";
        case ErrorCode::Decomposition: return "decomposition";
        case ErrorCode::OptimizationFailure: return "optimization-failure";
        case ErrorCode::DegenerateSystem: return "degenerate-system";
        case ErrorCode::DegenerateReference: return "degenerate-reference";
        case ErrorCode::Length: return "length";
        case ErrorCode::Io: return "io";
        case ErrorCode::Parse: return "parse";
    }
    return "unknown";
}

void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace stablekern
