#ifndef STABLEKERN_ERRORS_HPP
#define STABLEKERN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stablekern {

enum class ErrorCode {
    ParameterDomain,
    Dimension,
    SingularOperator,
    Factorization,
    Conditioning,
    InfeasibleExtension,
    Decomposition,
    OptimizationFailure,
    DegenerateSystem,
    DegenerateReference,
    Length,
    Io,
    Parse,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// the C layer can translate it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace stablekern

#endif
