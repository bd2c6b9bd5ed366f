#pragma once

#include <Eigen/Dense>

#include "jcedkit/grid.hpp"

namespace jced {

// Dense N_l x N_b sensitivity matrix. Row l, column b is the MW flow on line l
// (positive from -> to) per MW injected at bus b and withdrawn at the slack.
class PtdfMatrix {
 public:
  PtdfMatrix() = default;
  PtdfMatrix(Eigen::MatrixXd m, std::size_t slack) : m_(std::move(m)), slack_(slack) {}

  std::size_t lines() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t buses() const { return static_cast<std::size_t>(m_.cols()); }
  std::size_t slack() const { return slack_; }

  double operator()(std::size_t l, std::size_t b) const { return m_(l, b); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  // Line flows (MW) for a bus injection vector (MW, bus order of the case).
  Eigen::VectorXd flows(const Eigen::VectorXd& injection) const { return m_ * injection; }

 private:
  Eigen::MatrixXd m_;
  std::size_t slack_ = 0;
};

PtdfMatrix compute_ptdf(const GridCase& c);

// Direct DC power flow: solves B' theta = P with theta_slack = 0 and returns
// line flows in MW. The injection vector must sum to zero (the slack absorbs
// any residual otherwise).
Eigen::VectorXd dc_power_flow(const GridCase& c, const Eigen::VectorXd& injection);

}  // namespace jced
