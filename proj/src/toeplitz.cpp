#include "stablekern/toeplitz.hpp"

#include "stablekern/errors.hpp"

#include <algorithm>

namespace stablekern {

ToeplitzSeq toeplitz_inverse(std::span<const double> a, std::size_t n) {
    if (a.empty() || a[0] == 0.0) {
        fail(ErrorCode::SingularOperator, "toeplitz_inverse: leading coefficient a_0 is zero");
    }
    ToeplitzSeq b(n, 0.0);
    if (n == 0) {
        return b;
    }
    const double inv_a0 = 1.0 / a[0];
    b[0] = inv_a0;
    for (std::size_t k = 1; k < n; ++k) {
        double acc = 0.0;
        // a_{k-j} is zero once k - j >= a.size()
        const std::size_t j_begin = k >= a.size() ? k - a.size() + 1 : 0;
        for (std::size_t j = j_begin; j < k; ++j) {
            acc += a[k - j] * b[j];
        }
        b[k] = -inv_a0 * acc;
    }
    return b;
}

ToeplitzSeq toeplitz_product(std::span<const double> a, std::span<const double> b, std::size_t n) {
    ToeplitzSeq c(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k; ++j) {
            if (j < a.size() && k - j < b.size()) {
                acc += a[j] * b[k - j];
            }
        }
        c[k] = acc;
    }
    return c;
}

Eigen::MatrixXd lower_toeplitz(std::span<const double> a, Eigen::Index n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const auto taps = static_cast<Eigen::Index>(a.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index d = 0; d < taps && j + d < n; ++d) {
            m(j + d, j) = a[static_cast<std::size_t>(d)];
        }
    }
    return m;
}

ToeplitzInverseStream::ToeplitzInverseStream(ToeplitzSeq taps) : taps_(std::move(taps)) {
    if (taps_.empty() || taps_[0] == 0.0) {
        fail(ErrorCode::SingularOperator, "toeplitz_inverse: leading coefficient a_0 is zero");
    }
    values_.reserve(1024);
    values_.push_back(1.0L / taps_[0]);
}

long double ToeplitzInverseStream::operator[](std::size_t k) {
    if (k >= values_.size()) {
        extend_to(k);
    }
    return values_[k];
}

void ToeplitzInverseStream::extend_to(std::size_t k) {
    const long double inv_a0 = 1.0L / taps_[0];
    const std::size_t width = taps_.size();
    for (std::size_t i = values_.size(); i <= k; ++i) {
        long double acc = 0.0L;
        const std::size_t reach = std::min(width - 1, i);
        for (std::size_t d = 1; d <= reach; ++d) {
            acc += static_cast<long double>(taps_[d]) * values_[i - d];
        }
        values_.push_back(-inv_a0 * acc);
    }
}

}  // namespace stablekern
