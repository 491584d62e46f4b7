#ifndef STABLEKERN_MAXENT_HPP
#define STABLEKERN_MAXENT_HPP

#include <Eigen/Dense>

#include <cstddef>

namespace stablekern {

// Partially specified symmetric T x T covariance: entries c_{t,s} known for
// |t - s| <= bandwidth. Indices are 0-based.
class BandSpec {
public:
    BandSpec(Eigen::Index dim, Eigen::Index bandwidth);

    // Band of `full` (lower triangle read, mirrored).
    static BandSpec from_matrix(const Eigen::MatrixXd& full, Eigen::Index bandwidth);

    [[nodiscard]] Eigen::Index dim() const noexcept { return values_.rows(); }
    [[nodiscard]] Eigen::Index bandwidth() const noexcept { return bandwidth_; }

    [[nodiscard]] double operator()(Eigen::Index t, Eigen::Index s) const;
    // Sets both (t, s) and (s, t).
    void set(Eigen::Index t, Eigen::Index s, double value);

    // (m+1) x (m+1) principal block starting at row/column `first`.
    [[nodiscard]] Eigen::MatrixXd sliding_block(Eigen::Index first) const;

    // Known entries as a dense matrix, zeros outside the band.
    [[nodiscard]] Eigen::MatrixXd known() const;

private:
    Eigen::Index bandwidth_;
    Eigen::MatrixXd values_;
};

struct FeasibilityReport {
    bool feasible = true;
    // 1-based index t of the first sliding block that is not positive definite; 0 if none.
    std::size_t first_failure = 0;
};

// Every (m+1) x (m+1) sliding block must have smallest eigenvalue above
// 1e-12 times its spectral norm.
[[nodiscard]] FeasibilityReport check_feasibility(const BandSpec& spec);

struct CompletionResult {
    Eigen::MatrixXd matrix;
    double entropy = 0.0;  // log det of matrix
};

// Unknown corner x = [partial](n-1, 0) of an n x n symmetric matrix whose other
// entries are known: x = -(1/y_1) sum_{j=2}^{n-1} c_{n,j} y_j, y = L^{-1} e_1 with
// L the leading (n-1) x (n-1) block. The corner entries of `partial` are ignored.
// Throws InfeasibleExtension when L is not positive definite.
[[nodiscard]] double one_step_extension(const Eigen::MatrixXd& partial);

// Maximum-entropy band extension. Diagonals beyond the band are filled outward,
// left to right within each diagonal; entry (s + d, s) is the one-step extension
// of the principal submatrix on rows s .. s + d.
[[nodiscard]] CompletionResult maxent_completion(const BandSpec& spec);

}  // namespace stablekern

#endif
