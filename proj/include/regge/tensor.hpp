#pragma once

#include "regge/core.hpp"

namespace regge::tensor {

/// SPD metric at a point with cached inverse and volume density.
/// Construction verifies positive definiteness.
struct Metric {
  Mat g;
  Mat ginv;
  double sqrt_det = 0.0;

  explicit Metric(const Mat& g_in);
};

bool is_spd(const Mat& g);

/// <sigma, rho>_g = tr(g^-1 sigma g^-1 rho) for symmetric (0,2) tensors.
double inner_g(const Mat& sigma, const Mat& rho, const Metric& m);

/// Tr_g sigma = tr(g^-1 sigma).
double trace_g(const Mat& sigma, const Metric& m);

/// sigma:A:rho = tr(g^-1 sigma g^-1 A g^-1 rho); fully symmetric under
/// permutations when all arguments are symmetric.
double sandwich(const Mat& sigma, const Mat& middle, const Mat& rho, const Metric& m);

/// J sigma = sigma - (1/2) g Tr_g sigma.
Mat J_map(const Mat& sigma, const Metric& m);

/// S sigma = sigma - g Tr_g sigma.
Mat S_map(const Mat& sigma, const Metric& m);

/// Facet trace reversal S_F rho = rho|_F - g|_F Tr(rho|_F); arguments are
/// the (d-1)x(d-1) representations in a facet tangent frame.
Mat SF_map(const Mat& sigma_restricted, const Metric& g_restricted);

/// Pullback of an ambient symmetric tensor to a sub-simplex with tangent
/// frame given by the columns of `frame`: (sigma|_D)_ab = frame_a . sigma .
/// frame_b. Rejects rank-deficient frames.
Mat pullback(const Mat& sigma, const Mat& frame);

}  // namespace regge::tensor
