#ifndef STABLEKERN_FACTOR_HPP
#define STABLEKERN_FACTOR_HPP

#include "stablekern/kernel.hpp"
#include "stablekern/toeplitz.hpp"

#include <Eigen/Dense>

#include <vector>

namespace stablekern {

// Lower-triangular banded factor L of a kernel inverse, K^{-1} = L L^T, stored
// by diagonal: diagonal d holds L(j + d, j) for j = 0 .. dim - d - 1.
class BandedFactor {
public:
    BandedFactor() = default;
    BandedFactor(Eigen::Index dim, Eigen::Index bandwidth);

    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] Eigen::Index bandwidth() const noexcept { return bandwidth_; }

    // 0-based; zero above the diagonal and outside the band.
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const;
    void set(Eigen::Index i, Eigen::Index j, double value);

    [[nodiscard]] Eigen::MatrixXd dense() const;
    [[nodiscard]] double log_diagonal_sum() const;

    // x = L^{-1} b by banded forward substitution.
    [[nodiscard]] Eigen::VectorXd solve_lower(const Eigen::VectorXd& b) const;

    // Natural log of det K (K itself, not K^{-1}).
    double logdet_K = 0.0;

private:
    Eigen::Index dim_ = 0;
    Eigen::Index bandwidth_ = 0;
    std::vector<Eigen::VectorXd> diagonals_;
};

// Cholesky factor of a symmetric positive definite banded matrix. Only the lower
// band of `a` is read. logdet_K is set to -2 sum log diag L, i.e. the log
// determinant of a^{-1}. Throws Factorization if a pivot is not positive.
[[nodiscard]] BandedFactor banded_cholesky(const Eigen::MatrixXd& a, Eigen::Index bandwidth);

// Factor of K^{-1} for an arbitrary dense SPD K without forming K^{-1}:
// with J the exchange matrix and J K J = R R^T, L = J R^{-T} J.
[[nodiscard]] BandedFactor dense_inverse_factor(const Eigen::MatrixXd& k);

// K^{-1} = kappa^{-1} P_T D_T P_T^T with P_T the lower-triangular Toeplitz
// prefilter and D_T = diag(beta^{-1}, ..., beta^{-(T-e)}) (+) B_T, e = taps - 1.
struct InverseDecomposition {
    ToeplitzSeq prefilter;
    double kappa = 1.0;
    double beta = 0.5;
    Eigen::Index dim = 0;
    Eigen::MatrixXd trailing;         // B_T, e x e
    Eigen::MatrixXd trailing_factor;  // lower Cholesky factor of B_T
    double trailing_logdet = 0.0;     // log det B_T
    bool flipped = false;      // HF/HC: conjugate by diag((-1)^t)

    [[nodiscard]] Eigen::Index order() const noexcept {
        return static_cast<Eigen::Index>(prefilter.size()) - 1;
    }
};

// Closed-form B_T for order <= 2 families; the series block for order > 2.
// Throws Dimension when T is smaller than the family's order and
// ParameterDomain for SS, which has no banded inverse.
[[nodiscard]] InverseDecomposition inverse_decomposition(const KernelSpec& spec, Eigen::Index T);

// Banded K^{-1} assembled from the decomposition; entries with |t - s| beyond the
// bandwidth are exactly zero. SS falls back to a dense numeric inverse.
[[nodiscard]] Eigen::MatrixXd build_inverse(const KernelSpec& spec, Eigen::Index T);

// Closed-form factors and determinants for DI, TC, DC, TC2, DC2 and their HF/HC
// sign flips; direct P_T D_T^{1/2} product for order > 2; scaled Toeplitz route for SS.
[[nodiscard]] BandedFactor inverse_cholesky(const KernelSpec& spec, Eigen::Index T);

}  // namespace stablekern

#endif
