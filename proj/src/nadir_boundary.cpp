#include "jcedkit/nadir_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jcedkit/error.hpp"

namespace jced {

double PwlBoundary::operator()(double D) const {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) h = std::max(h, p(D));
  return h;
}

namespace {

SfrAggregates with_inverters(SfrAggregates a, double H, double D) {
  a.H_W = H;
  a.H_E = 0.0;
  a.D_W = D;
  a.D_E = 0.0;
  return a;
}

double abs_nadir(const SfrAggregates& base, double H, double D, double dp, double f0) {
  return std::abs(nadir_closed_form(dp, with_inverters(base, H, D), f0).deviation_hz);
}

double sse_of(const PwlPiece& p, const std::vector<BoundarySample>& pts) {
  double s = 0.0;
  for (const auto& q : pts) {
    const double r = p(q.D) - q.H;
    s += r * r;
  }
  return s;
}

bool above_all(const PwlPiece& p, const std::vector<BoundarySample>& pts) {
  for (const auto& q : pts) {
    if (p(q.D) < q.H - 1e-12 * (1.0 + std::abs(q.H))) return false;
  }
  return true;
}

PwlPiece through(double D1, double H1, double D2, double H2) {
  PwlPiece p;
  p.beta = -(H2 - H1) / (D2 - D1);
  p.alpha = H1 + p.beta * D1;
  return p;
}

}  // namespace

double boundary_inertia(const SfrAggregates& base, double D_inv, double dp_mw, double threshold_hz, double f0,
                        double h_hi, double h_tol) {
  if (dp_mw == 0.0) return 0.0;
  if (abs_nadir(base, 0.0, D_inv, dp_mw, f0) <= threshold_hz) return 0.0;
  if (abs_nadir(base, h_hi, D_inv, dp_mw, f0) > threshold_hz) return -1.0;
  double lo = 0.0, hi = h_hi;
  while (hi - lo > h_tol) {
    const double mid = 0.5 * (lo + hi);
    if (abs_nadir(base, mid, D_inv, dp_mw, f0) <= threshold_hz) hi = mid;
    else lo = mid;
  }
  return hi;
}

PwlPiece fit_piece_above(const std::vector<BoundarySample>& pts, double* sse) {
  if (pts.empty()) throw ValidationError("fit_piece_above: no samples");
  PwlPiece best;
  double best_sse = std::numeric_limits<double>::infinity();
  auto consider = [&](const PwlPiece& p) {
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !above_all(p, pts)) return;
    const double s = sse_of(p, pts);
    if (s < best_sse) {
      best_sse = s;
      best = p;
    }
  };
  const double n = static_cast<double>(pts.size());
  double md = 0.0, mh = 0.0;
  for (const auto& q : pts) {
    md += q.D;
    mh += q.H;
  }
  md /= n;
  mh /= n;
  double sdd = 0.0, sdh = 0.0;
  for (const auto& q : pts) {
    sdd += (q.D - md) * (q.D - md);
    sdh += (q.D - md) * (q.H - mh);
  }
  // The optimum of this two-variable convex QP has zero, one, or two active
  // constraints; enumerate each case.
  if (sdd > 0.0) {
    const double slope = sdh / sdd;
    consider({mh - slope * md + 0.0, -slope});
  } else {
    double hmax = -std::numeric_limits<double>::infinity();
    for (const auto& q : pts) hmax = std::max(hmax, q.H);
    consider({hmax, 0.0});
  }
  for (const auto& pj : pts) {
    double num = 0.0, den = 0.0;
    for (const auto& q : pts) {
      num += (pj.H - q.H) * (pj.D - q.D);
      den += (pj.D - q.D) * (pj.D - q.D);
    }
    const double beta = den > 0.0 ? -num / den : 0.0;
    consider({pj.H + beta * pj.D, beta});
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].D != pts[j].D) consider(through(pts[i].D, pts[i].H, pts[j].D, pts[j].H));
    }
  }
  if (!std::isfinite(best_sse)) {
    // Degenerate geometry (e.g. repeated D): flat line at the maximum.
    double hmax = -std::numeric_limits<double>::infinity();
    for (const auto& q : pts) hmax = std::max(hmax, q.H);
    best = {hmax, 0.0};
  }
  // Exact feasibility: lift alpha by any residual rounding deficit.
  double lift = 0.0;
  for (const auto& q : pts) lift = std::max(lift, q.H - best(q.D));
  best.alpha += lift;
  best.d_from = pts.front().D;
  best.d_to = pts.back().D;
  if (sse) *sse = sse_of(best, pts);
  return best;
}

std::vector<PwlPiece> fit_pwl_pieces(const std::vector<BoundarySample>& samples, int M, double* sse) {
  if (M < 1) throw ValidationError("fit_pwl_pieces: M must be >= 1");
  if (samples.empty()) throw ValidationError("fit_pwl_pieces: no samples");
  const auto n = samples.size();
  const auto m = std::min<std::size_t>(static_cast<std::size_t>(M), n);
  std::vector<PwlPiece> pieces;
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto b = k * n / m, e = (k + 1) * n / m;
    std::vector<BoundarySample> part(samples.begin() + b, samples.begin() + e);
    double s = 0.0;
    pieces.push_back(fit_piece_above(part, &s));
    total += s;
  }
  if (sse) *sse = total;
  return pieces;
}

PwlBoundary fit_nadir_boundary(const SfrAggregates& base, double dp_mw, double threshold_hz, double f0, int M,
                               double d_hi, double h_hi, const BoundaryOptions& opts) {
  if (!(threshold_hz > 0.0)) throw ValidationError("fit_nadir_boundary: threshold must be > 0");
  if (M < 1) throw ValidationError("fit_nadir_boundary: M must be >= 1");
  if (opts.grid < 2) throw ValidationError("fit_nadir_boundary: grid needs at least 2 points");
  const double dp = std::abs(dp_mw);
  PwlBoundary out;
  out.dp_mw = dp;
  out.threshold_hz = threshold_hz;

  std::vector<BoundarySample> samples;
  for (int k = 0; k < opts.grid; ++k) {
    const double D = d_hi * static_cast<double>(k) / static_cast<double>(opts.grid - 1);
    const double H = boundary_inertia(base, D, dp, threshold_hz, f0, h_hi, opts.h_tol);
    if (H >= 0.0) samples.push_back({D, H});
  }
  if (samples.empty()) {
    throw ValidationError("nadir threshold unreachable for any inverter inertia/droop within the device limits");
  }
  out.d_lo = samples.front().D;
  out.d_hi = samples.back().D;
  out.samples = samples;

  // Piece membership is fixed by the D ranges of the base partition so added
  // check points land in the piece that covers them.
  const auto n = samples.size();
  const auto m = std::min<std::size_t>(static_cast<std::size_t>(M), n);
  std::vector<std::vector<BoundarySample>> parts(m);
  std::vector<double> starts(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto b = k * n / m, e = (k + 1) * n / m;
    parts[k].assign(samples.begin() + b, samples.begin() + e);
    starts[k] = samples[b].D;
  }
  auto refit = [&]() {
    out.pieces.clear();
    for (auto& p : parts) {
      std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.D < b.D; });
      out.pieces.push_back(fit_piece_above(p));
    }
  };
  refit();
  out.sse = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto b = k * n / m, e = (k + 1) * n / m;
    out.sse += sse_of(out.pieces[k], std::vector<BoundarySample>(samples.begin() + b, samples.begin() + e));
  }

  if (opts.check_grid > 1 && out.d_hi > out.d_lo) {
    for (int round = 0; round < opts.max_refits; ++round) {
      bool added = false;
      for (int k = 0; k < opts.check_grid; ++k) {
        const double D = out.d_lo + (out.d_hi - out.d_lo) * k / (opts.check_grid - 1);
        const double H = boundary_inertia(base, D, dp, threshold_hz, f0, h_hi, opts.h_tol);
        if (H < 0.0) continue;
        if (out(D) < H) {
          std::size_t piece = 0;
          while (piece + 1 < m && starts[piece + 1] <= D) ++piece;
          parts[piece].push_back({D, H});
          added = true;
        }
      }
      if (!added) break;
      refit();
      ++out.refits;
    }
  }
  return out;
}

double max_inverter_inertia(const GridCase& c) {
  double h = 0.0;
  const double ps = c.p_sys();
  for (const auto& w : c.dibr) h += w.h_max * w.capacity_mw / ps;
  for (const auto& e : c.storage) h += e.h_max * e.p_max / ps;
  return h;
}

double max_inverter_droop(const GridCase& c) {
  double d = 0.0;
  const double ps = c.p_sys();
  for (const auto& w : c.dibr) d += w.d_max * w.capacity_mw / ps;
  for (const auto& e : c.storage) d += e.d_max * e.p_max / ps;
  return d;
}

PwlBoundary fit_nadir_boundary(const GridCase& c, double dp_mw, int M, const BoundaryOptions& opts) {
  return fit_nadir_boundary(thermal_aggregate(c), dp_mw, c.thresholds.nadir_max, c.f0_hz, M, max_inverter_droop(c),
                            max_inverter_inertia(c), opts);
}

}  // namespace jced
