#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

namespace scopf {

// Convex increasing piecewise-linear cost on [0, inf).
// Piece j covers an interval of width length[j] with slope slope[j];
// the last piece may have infinite length. Value at 0 is 0.
class PwlCost {
public:
  PwlCost() = default;
  PwlCost(std::vector<double> lengths, std::vector<double> slopes);

  // Cost at x >= 0. Throws std::domain_error for negative x.
  double eval(double x) const;

  // Right derivative (slope of the active piece) at x >= 0.
  double slope_at(double x) const;

  // Affine pieces (slope, intercept): eval(x) = max_j slope_j*x + intercept_j.
  struct Affine {
    double slope;
    double intercept;
  };
  const std::vector<Affine>& pieces() const { return pieces_; }

  const std::vector<double>& lengths() const { return lengths_; }
  const std::vector<double>& slopes() const { return slopes_; }
  bool empty() const { return slopes_.empty(); }

  // Table in natural units scaled to per-unit: lengths /= s_base, slopes *= s_base.
  static PwlCost from_natural_units(const std::vector<double>& lengths_mw,
                                    const std::vector<double>& slopes_per_mw,
                                    double s_base);

private:
  std::vector<double> lengths_;
  std::vector<double> slopes_;
  std::vector<Affine> pieces_;
};

}  // namespace scopf
