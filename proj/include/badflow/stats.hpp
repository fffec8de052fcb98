// Small statistics helpers: ordinary least squares on a line, and Spearman
// rank correlation for the exact-vs-float consistency checks.
#pragma once

#include <stdexcept>
#include <vector>

namespace badflow {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

// Least-squares line through (xs[i], ys[i]).  Throws std::invalid_argument on
// fewer than two points or degenerate abscissae.
LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Fractional ranks (1-based, ties get the average rank).
std::vector<double> fractional_ranks(const std::vector<double>& v);

// Spearman rank correlation; needs at least three matched samples.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace badflow
