#ifndef STABLEKERN_KERNEL_HPP
#define STABLEKERN_KERNEL_HPP

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace stablekern {

// Kernel families. The order-delta families (TCd, DCd, HFd, HCd) carry their
// order in KernelSpec::delta; TC2 is TCd with delta = 2, HF is HFd with delta = 1.
enum class Family { DI, TC, DC, SS, TCd, DCd, HFd, HCd };

struct KernelSpec {
    Family family = Family::TC;
    double beta = 0.5;   // exponential decay, 0 < beta < 1
    double alpha = 0.0;  // DC, DCd, HCd only
    int delta = 1;       // TCd, DCd, HFd, HCd only
    double gamma = 0.5;  // SS only

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

[[nodiscard]] bool uses_alpha(Family f) noexcept;
[[nodiscard]] bool uses_delta(Family f) noexcept;

// Short family label: "DI", "TC", "DC", "SS", "TC3", "DC2", "HF1", "HC2", ...
[[nodiscard]] std::string family_label(const KernelSpec& spec);

// Inverse of family_label. Also accepts "HF" (HFd, delta 1) and the bare order
// tags "TCd", "DCd", "HFd", "HCd" (delta left at its default). Case-sensitive.
[[nodiscard]] KernelSpec spec_from_label(std::string_view label);

// Flat key-value form, e.g. "family=TC2 beta=0.8". Only the keys relevant to
// the family are written; numbers round-trip exactly.
[[nodiscard]] std::string format_spec(const KernelSpec& spec);
[[nodiscard]] KernelSpec parse_spec(std::string_view text);

// Throws ParameterDomain with the offending range in the message.
void validate(const KernelSpec& spec);

// Bandwidth of the inverse kernel matrix; -1 when the inverse is dense (SS).
[[nodiscard]] int inverse_bandwidth(const KernelSpec& spec);

// Rate of the exponential envelope beta^((t+s)/2); gamma^3 for SS.
[[nodiscard]] double envelope_rate(const KernelSpec& spec);

// kappa such that K = kappa (F D F^T)^{-1}:
//   TC 1-beta, DC 1-alpha^2*beta, TC2 (1-beta)^3, DC2 (1-beta)(1-alpha*beta)(1-alpha^2*beta),
//   order > 2 families 1, DI 1. The HF/HC variants share their TC/DC constant.
// SS has no such factorization and reports 1.
[[nodiscard]] double normalization_kappa(const KernelSpec& spec);

// Dense T x T kernel matrix. Closed forms for DI, TC, DC, SS and all order <= 2
// families; certified series for order > 2.
[[nodiscard]] Eigen::MatrixXd build_kernel(const KernelSpec& spec, Eigen::Index T);

namespace detail {

// Common structure behind every family except SS: the prefilter of the
// order-delta correlated kernel is (1 - z)^(delta - 1) (1 - alpha z), so TC-type
// kernels are the alpha = 1 case and DI is order 0. HF/HC flip signs by (-1)^|t-s|.
struct Structure {
    bool spline = false;
    int order = 0;
    double alpha = 1.0;
    double beta = 0.5;
    bool flipped = false;
};

[[nodiscard]] Structure structure_of(const KernelSpec& spec);

}  // namespace detail

}  // namespace stablekern

#endif
