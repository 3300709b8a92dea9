#pragma once

#include <Eigen/Dense>

namespace saem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Sufficient statistics, parameters and latent states are all dense real
// vectors; the aliases mark which space a quantity lives in.
using SufficientStats = Vector;
using Params = Vector;
using Latent = Vector;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace saem
