#include "netmimo/system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace netmimo {

void SystemConfig::validate() const {
  if (cells < 1) throw std::invalid_argument("cells must be >= 1");
  if (antennas_per_bs < 1) throw std::invalid_argument("antennas_per_bs must be >= 1");
  if (users < 1) throw std::invalid_argument("users must be >= 1");
  if (subcarriers < 1) throw std::invalid_argument("subcarriers must be >= 1");
  if (!(coherence_length > 0.0) || !std::isfinite(coherence_length))
    throw std::invalid_argument("coherence_length must be positive and finite");
  if (!(power >= 0.0) || !std::isfinite(power))
    throw std::invalid_argument("power must be nonnegative and finite");
  if (!(backhaul_bits > 0.0))  // +inf allowed
    throw std::invalid_argument("backhaul_bits must be positive (or infinite)");
  if (coherence_length < static_cast<double>(users))
    throw std::invalid_argument("coherence_length must be >= users, got T=" +
                                std::to_string(coherence_length) + " K=" + std::to_string(users));
}

PathLossMatrix::PathLossMatrix(Eigen::MatrixXd values) : a(std::move(values)) {
  if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("path loss matrix is empty");
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (!(a(i, j) > 0.0) || !std::isfinite(a(i, j)))
        throw std::invalid_argument("path loss entries must be positive and finite");
}

PathLossMatrix example_path_loss_3x3() {
  Eigen::MatrixXd a(3, 3);
  a << 2.9775, 0.0385, 1.6055,
       0.2512, 2.7826, 0.1759,
       0.0615, 0.0492, 1.6376;
  return PathLossMatrix(a);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace netmimo
