#pragma once

#include <complex>

#include <Eigen/Dense>

namespace hypercs {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace hypercs
