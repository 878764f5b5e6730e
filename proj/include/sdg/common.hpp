#pragma once
#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace sdg {

using Vec2 = Eigen::Vector2d;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatX2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using TriPts = Eigen::Matrix<double, 3, 2>;

// field callbacks: rows of X are points, outputs one row per point
using ScalarField = std::function<VectorXd(const MatX2&)>;
using VectorField = std::function<MatX2(const MatX2&)>;

struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };
struct MeshError   : std::runtime_error { using std::runtime_error::runtime_error; };
struct SolverError : std::runtime_error { using std::runtime_error::runtime_error; };

inline ScalarField constant_field(double v) {
  return [v](const MatX2& X) { return VectorXd::Constant(X.rows(), v); };
}

} // namespace sdg
