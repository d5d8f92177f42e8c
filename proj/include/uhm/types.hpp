#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace uhm {

using real_t = double;
using cplx = std::complex<double>;
using idx_t = Eigen::Index;

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Default cap on the number of elements any dense materialization may hold.
inline constexpr std::size_t kDenseElementCap = 4'000'000;

} // namespace uhm
