#include "jcedkit/ptdf.hpp"

#include <cmath>

#include "jcedkit/error.hpp"

namespace jced {

namespace {

// Susceptance matrix with the slack row/column removed. Bus k (k != slack)
// maps to reduced index k - (k > slack).
Eigen::MatrixXd reduced_susceptance(const GridCase& c, std::size_t slack) {
  const auto nb = c.buses.size();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nb, nb);
  for (const auto& l : c.lines) {
    const auto i = c.bus_index(l.from);
    const auto j = c.bus_index(l.to);
    const double y = 1.0 / l.reactance;
    b(i, i) += y;
    b(j, j) += y;
    b(i, j) -= y;
    b(j, i) -= y;
  }
  Eigen::MatrixXd r(nb - 1, nb - 1);
  for (std::size_t i = 0, ri = 0; i < nb; ++i) {
    if (i == slack) continue;
    for (std::size_t j = 0, rj = 0; j < nb; ++j) {
      if (j == slack) continue;
      r(ri, rj) = b(i, j);
      ++rj;
    }
    ++ri;
  }
  return r;
}

Eigen::FullPivLU<Eigen::MatrixXd> factor(const Eigen::MatrixXd& b) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  if (b.rows() > 0 && !lu.isInvertible()) {
    throw NumericalError("singular susceptance matrix: network is disconnected");
  }
  return lu;
}

}  // namespace

PtdfMatrix compute_ptdf(const GridCase& c) {
  const auto nb = c.buses.size();
  const auto nl = c.lines.size();
  const auto slack = c.slack_index();
  Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(nl, nb);
  if (nb <= 1) return PtdfMatrix(ptdf, slack);

  const auto lu = factor(reduced_susceptance(c, slack));
  const Eigen::MatrixXd x = lu.inverse();  // reduced reactance matrix

  auto reduced = [&](std::size_t k) -> long { return k == slack ? -1 : static_cast<long>(k - (k > slack)); };
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& line = c.lines[l];
    const long i = reduced(c.bus_index(line.from));
    const long j = reduced(c.bus_index(line.to));
    for (std::size_t b = 0; b < nb; ++b) {
      const long k = reduced(b);
      if (k < 0) continue;
      const double ti = i < 0 ? 0.0 : x(i, k);
      const double tj = j < 0 ? 0.0 : x(j, k);
      ptdf(l, b) = (ti - tj) / line.reactance;
    }
  }
  return PtdfMatrix(ptdf, slack);
}

Eigen::VectorXd dc_power_flow(const GridCase& c, const Eigen::VectorXd& injection) {
  const auto nb = c.buses.size();
  if (static_cast<std::size_t>(injection.size()) != nb) {
    throw ValidationError("dc_power_flow: injection vector has wrong length");
  }
  const auto slack = c.slack_index();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(nb);
  if (nb > 1) {
    Eigen::VectorXd p(nb - 1);
    for (std::size_t i = 0, r = 0; i < nb; ++i) {
      if (i != slack) p(r++) = injection(i);
    }
    const auto lu = factor(reduced_susceptance(c, slack));
    Eigen::VectorXd t = lu.solve(p);
    for (std::size_t i = 0, r = 0; i < nb; ++i) {
      if (i != slack) theta(i) = t(r++);
    }
  }
  Eigen::VectorXd flows(c.lines.size());
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const auto& line = c.lines[l];
    flows(l) = (theta(c.bus_index(line.from)) - theta(c.bus_index(line.to))) / line.reactance;
  }
  return flows;
}

}  // namespace jced
