#pragma once

#include <vector>

#include "jcedkit/grid.hpp"
#include "jcedkit/sfr.hpp"

namespace jced {

// A point (D^I, H^I) on the safe boundary: the least inverter inertia H^I that
// keeps |nadir| within the threshold for inverter droop D^I (both p.u.).
struct BoundarySample {
  double D = 0.0;
  double H = 0.0;
};

struct PwlPiece {
  double alpha = 0.0;
  double beta = 0.0;
  double d_from = 0.0;  // D range of the samples the piece was fitted on
  double d_to = 0.0;

  double operator()(double D) const { return alpha - beta * D; }
};

// h(D) = max_m (alpha_m - beta_m D), valid for D in [d_lo, d_hi].
struct PwlBoundary {
  std::vector<PwlPiece> pieces;
  double d_lo = 0.0;
  double d_hi = 0.0;
  double dp_mw = 0.0;         // disturbance magnitude the boundary was fitted for
  double threshold_hz = 0.0;  // nadir limit
  std::vector<BoundarySample> samples;
  double sse = 0.0;  // per-piece squared fitting error over the base samples
  int refits = 0;    // extra fits triggered by the dense conservatism check

  double operator()(double D) const;
};

struct BoundaryOptions {
  int grid = 64;          // D samples
  double h_tol = 1e-6;    // bisection tolerance on H^I
  int check_grid = 1024;  // dense conservatism check; 0 disables refitting
  int max_refits = 8;
};

// Least inverter inertia meeting the threshold at droop D_inv, by bisection
// on [0, h_hi]; returns a negative value when h_hi is insufficient.
double boundary_inertia(const SfrAggregates& base, double D_inv, double dp_mw, double threshold_hz, double f0,
                        double h_hi, double h_tol = 1e-6);

// Samples the boundary for D in [0, d_hi] and fits M contiguous pieces.
PwlBoundary fit_nadir_boundary(const SfrAggregates& base, double dp_mw, double threshold_hz, double f0, int M,
                               double d_hi, double h_hi, const BoundaryOptions& opts = {});

// Same with d_hi/h_hi taken from the case's inverter limits.
PwlBoundary fit_nadir_boundary(const GridCase& c, double dp_mw, int M, const BoundaryOptions& opts = {});

// Fits M pieces to given samples (sorted by D) under the constraint that each
// piece lies on or above its own samples.
std::vector<PwlPiece> fit_pwl_pieces(const std::vector<BoundarySample>& samples, int M, double* sse = nullptr);

// Constrained least-squares line over one piece, exposed for testing.
PwlPiece fit_piece_above(const std::vector<BoundarySample>& pts, double* sse = nullptr);

// Largest inverter aggregates reachable with the case's H_max/D_max limits.
double max_inverter_inertia(const GridCase& c);
double max_inverter_droop(const GridCase& c);

}  // namespace jced
