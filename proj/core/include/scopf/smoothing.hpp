#pragma once

namespace scopf {

struct SmoothingParams {
  double eps = 1e-6;
};

// Numerically stable ln(1 + exp(u)) and its derivative.
double softplus_unit(double u);
double sigmoid(double u);

// eps * ln(1 + exp(x/eps)): smooth upper bound on max(0, x), gap at most
// eps*ln2 (attained at x = 0).
double softplus(double x, double eps);
double softplus_grad(double x, double eps);
double softplus_second(double x, double eps);

// Smooth stand-ins for clamp(p0 + alpha*delta, p_lo, p_hi) and for
// min(p0 + alpha*delta, p_hi). Both are evaluated through the identity
// ln(1 + e^a / (1 + e^b)) = softplus_unit(a - softplus_unit(b)) so no
// exponential overflows for tiny eps.
struct SmoothResponse {
  double value = 0.0;
  double d_p0 = 0.0;     // partial w.r.t. the base setpoint
  double d_delta = 0.0;  // partial w.r.t. the response scalar
};
SmoothResponse smooth_response_full(double p0, double alpha, double delta,
                                    double p_lo, double p_hi, double eps);
SmoothResponse smooth_response_upper(double p0, double alpha, double delta,
                                     double p_hi, double eps);

// Residuals of the smoothed reactive switching set. Both are <= 0 exactly on
// the relaxed set; vplus/vminus are the voltage deviation split.
struct ReactiveResiduals {
  double r1 = 0.0, r2 = 0.0;
  double d_r1_dq = 0.0, d_r1_dvp = 0.0;
  double d_r2_dq = 0.0, d_r2_dvm = 0.0;
};
ReactiveResiduals reactive_relaxation_residuals(double q, double vplus, double vminus,
                                                double q_lo, double q_hi, double eps);

// One-sided gap sup { dist(x, S) : x in relaxed set } estimated on a fixed
// grid over (q, vplus, vminus); S is the exact switching set anchored at v0.
double hausdorff_gap_estimate(double q_lo, double q_hi, double v_lo, double v_hi,
                              double v0, double eps, int grid_n);

}  // namespace scopf
