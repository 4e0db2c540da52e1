#include "scopf/pwl.hpp"

#include <cmath>

namespace scopf {

PwlCost::PwlCost(std::vector<double> lengths, std::vector<double> slopes)
    : lengths_(std::move(lengths)), slopes_(std::move(slopes)) {
  if (lengths_.size() != slopes_.size())
    throw std::invalid_argument("pwl: lengths/slopes size mismatch");
  if (lengths_.empty()) throw std::invalid_argument("pwl: empty table");
  double prev_slope = -1.0;
  double x0 = 0.0, v0 = 0.0;
  for (size_t j = 0; j < lengths_.size(); ++j) {
    if (!(lengths_[j] > 0.0))
      throw std::invalid_argument("pwl: piece lengths must be positive");
    if (std::isinf(lengths_[j]) && j + 1 != lengths_.size())
      throw std::invalid_argument("pwl: only the last piece may be unbounded");
    if (!(slopes_[j] >= 0.0) || !std::isfinite(slopes_[j]))
      throw std::invalid_argument("pwl: slopes must be finite and nonnegative");
    if (!(slopes_[j] > prev_slope))
      throw std::invalid_argument("pwl: slopes must be strictly increasing");
    pieces_.push_back({slopes_[j], v0 - slopes_[j] * x0});
    if (!std::isinf(lengths_[j])) {
      v0 += slopes_[j] * lengths_[j];
      x0 += lengths_[j];
    }
    prev_slope = slopes_[j];
  }
}

double PwlCost::eval(double x) const {
  if (x < 0.0) throw std::domain_error("pwl: negative argument");
  double val = 0.0, rem = x;
  for (size_t j = 0; j < lengths_.size(); ++j) {
    double take = std::fmin(rem, lengths_[j]);
    val += slopes_[j] * take;
    rem -= take;
    if (rem <= 0.0) break;
  }
  if (rem > 0.0) val += slopes_.back() * rem;  // beyond a finite last piece
  return val;
}

double PwlCost::slope_at(double x) const {
  if (x < 0.0) throw std::domain_error("pwl: negative argument");
  double b = 0.0;
  for (size_t j = 0; j < lengths_.size(); ++j) {
    b += lengths_[j];
    if (x < b) return slopes_[j];
  }
  return slopes_.back();
}

PwlCost PwlCost::from_natural_units(const std::vector<double>& lengths_mw,
                                    const std::vector<double>& slopes_per_mw,
                                    double s_base) {
  std::vector<double> len(lengths_mw), slp(slopes_per_mw);
  for (auto& l : len)
    if (!std::isinf(l)) l /= s_base;
  for (auto& s : slp) s *= s_base;
  return PwlCost(std::move(len), std::move(slp));
}

}  // namespace scopf
