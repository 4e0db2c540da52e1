#include "scopf/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include "scopf/evaluation.hpp"

namespace scopf {

double softplus_unit(double u) {
  if (u > 30.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double softplus(double x, double eps) { return eps * softplus_unit(x / eps); }

double softplus_grad(double x, double eps) { return sigmoid(x / eps); }

double softplus_second(double x, double eps) {
  const double s = sigmoid(x / eps);
  return s * (1.0 - s) / eps;
}

SmoothResponse smooth_response_full(double p0, double alpha, double delta,
                                    double p_lo, double p_hi, double eps) {
  const double a = (p_hi - p_lo) / eps;
  const double bu = (p_hi - p0 - alpha * delta) / eps;
  const double spb = softplus_unit(bu);
  const double t = a - spb;
  SmoothResponse r;
  r.value = p_lo + eps * softplus_unit(t);
  const double w = sigmoid(t) * sigmoid(bu);
  r.d_p0 = w;
  r.d_delta = alpha * w;
  return r;
}

SmoothResponse smooth_response_upper(double p0, double alpha, double delta,
                                     double p_hi, double eps) {
  const double bu = (p_hi - p0 - alpha * delta) / eps;
  SmoothResponse r;
  r.value = p_hi - eps * softplus_unit(bu);
  const double w = sigmoid(bu);
  r.d_p0 = w;
  r.d_delta = alpha * w;
  return r;
}

ReactiveResiduals reactive_relaxation_residuals(double q, double vplus, double vminus,
                                                double q_lo, double q_hi, double eps) {
  static const double ln2 = std::log(2.0);
  ReactiveResiduals out;
  const double u1 = (vplus - (q - q_lo)) / eps;
  out.r1 = vplus - eps * softplus_unit(u1) - eps * ln2;
  const double s1 = sigmoid(u1);
  out.d_r1_dvp = 1.0 - s1;
  out.d_r1_dq = s1;
  const double u2 = (vminus - (q_hi - q)) / eps;
  out.r2 = vminus - eps * softplus_unit(u2) - eps * ln2;
  const double s2 = sigmoid(u2);
  out.d_r2_dvm = 1.0 - s2;
  out.d_r2_dq = -s2;
  return out;
}

double hausdorff_gap_estimate(double q_lo, double q_hi, double v_lo, double v_hi,
                              double v0, double eps, int grid_n) {
  const double dv_max = v_hi - v_lo;
  double gap = 0.0;
  for (int iq = 0; iq <= grid_n; ++iq) {
    const double q = q_lo + (q_hi - q_lo) * iq / grid_n;
    for (int ip = 0; ip <= grid_n; ++ip) {
      const double vp = dv_max * ip / grid_n;
      for (int im = 0; im <= grid_n; ++im) {
        const double vm = dv_max * im / grid_n;
        const double v = v0 + vp - vm;
        if (v < v_lo || v > v_hi) continue;
        auto rr = reactive_relaxation_residuals(q, vp, vm, q_lo, q_hi, eps);
        if (rr.r1 > 0.0 || rr.r2 > 0.0) continue;
        gap = std::max(gap, reactive_set_distance(q, v, q_lo, q_hi, v_lo, v_hi, v0));
      }
    }
  }
  return gap;
}

}  // namespace scopf
