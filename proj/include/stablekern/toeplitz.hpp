#ifndef STABLEKERN_TOEPLITZ_HPP
#define STABLEKERN_TOEPLITZ_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace stablekern {

// First column a_0, a_1, ... of a lower-triangular Toeplitz operator.
// Coefficients past the stored length are zero.
using ToeplitzSeq = std::vector<double>;

// First n coefficients of the inverse operator:
//   b_0 = 1/a_0,  b_k = -(1/a_0) * sum_{j<k} a_{k-j} b_j.
// Throws SingularOperator when a_0 == 0.
ToeplitzSeq toeplitz_inverse(std::span<const double> a, std::size_t n);

// First n coefficients of the product of two lower-triangular Toeplitz operators.
ToeplitzSeq toeplitz_product(std::span<const double> a, std::span<const double> b, std::size_t n);

// Dense n x n lower-triangular Toeplitz matrix with first column a.
Eigen::MatrixXd lower_toeplitz(std::span<const double> a, Eigen::Index n);

// Lazily extended inverse sequence, kept in long double because the recursion
// cancels for alternating taps. Extending to length n costs O(n * taps).
class ToeplitzInverseStream {
public:
    explicit ToeplitzInverseStream(ToeplitzSeq taps);

    long double operator[](std::size_t k);
    [[nodiscard]] const ToeplitzSeq& taps() const noexcept { return taps_; }

private:
    void extend_to(std::size_t k);

    ToeplitzSeq taps_;
    std::vector<long double> values_;
};

}  // namespace stablekern

#endif
