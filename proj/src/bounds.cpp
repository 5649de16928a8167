#include "msopt/bounds.hpp"

#include <cmath>
#include <limits>

#include "msopt/error.hpp"

namespace msopt::bounds {

namespace {

const double kRoot2 = std::sqrt(2.0);

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

void check_weights(double l1, double l2) {
  require(l1 >= 0 && l2 >= 0 && std::abs(l1 + l2 - 1.0) <= 1e-12,
          "convex weights must be nonnegative and sum to 1");
}

double qpow(double q, double k) {
  if (k == 0) return 1.0;
  return std::pow(q, k);
}

}  // namespace

void BoundInputs::validate() const {
  require(L_f >= 0, "L_f must be >= 0");
  require(q >= 0 && q < 1, "q must lie in [0, 1)");
  require(S >= 1, "S must be >= 1");
  require(int(K.size()) == S, "K must list one count per scale");
  for (auto k : K) require(k >= 0, "iteration counts must be >= 0");
  require(width > 0, "domain width must be positive");
  require(initial_error >= 0, "initial error must be >= 0");
}

double lipschitz_interp_bound(double L_f, double lambda1, double lambda2,
                              double dist) {
  check_weights(lambda1, lambda2);
  require(L_f >= 0 && dist >= 0, "L_f and distance must be >= 0");
  return 2.0 * L_f * lambda1 * lambda2 * dist;
}

std::function<double(double)> tight_witness(double lambda1, double lambda2,
                                            double lower, double upper,
                                            double L_f) {
  check_weights(lambda1, lambda2);
  require(upper > lower, "need upper > lower");
  double c = lambda1 * lower + lambda2 * upper;
  return [c, L_f](double t) { return L_f * std::abs(t - c); };
}

double exact_interp_bound(double L_f, Index I, double width) {
  require(I >= 2, "I must be >= 2");
  require(L_f >= 0 && width > 0, "need L_f >= 0 and width > 0");
  return L_f * width / (2.0 * std::sqrt(double(I - 1)));
}

double inexact_interp_bound(double L_f, Index I, double width,
                            double delta_norm) {
  require(delta_norm >= 0, "delta norm must be >= 0");
  return kRoot2 * delta_norm + exact_interp_bound(L_f, I, width);
}

double lazy_interp_bound(double L_f, double width, int S, int s, double e_s) {
  require(S >= 1 && s >= 1 && s <= S, "need 1 <= s <= S");
  require(L_f >= 0 && width > 0 && e_s >= 0, "invalid lazy bound inputs");
  return L_f * width / (2.0 * std::sqrt(std::ldexp(1.0, S - s))) + e_s;
}

std::vector<std::int64_t> cumulative_counts(
    const std::vector<std::int64_t>& K) {
  std::vector<std::int64_t> r(K.size());
  std::int64_t acc = 0;
  for (size_t i = 0; i < K.size(); ++i) {
    acc += K[i];
    r[i] = acc;
  }
  return r;
}

double greedy_error_bound(const BoundInputs& in) {
  in.validate();
  auto r = cumulative_counts(in.K);
  const int S = in.S;
  double head = std::sqrt(std::ldexp(1.0, S - 1)) *
                qpow(in.q, double(r[size_t(S - 1)])) * in.initial_error;
  double sum = 0.0;
  for (int s = 1; s <= S - 1; ++s) {
    sum += std::ldexp(1.0, s) * qpow(in.q, double(r[size_t(s - 1)]));
  }
  return head +
         in.L_f * in.width / (2.0 * std::sqrt(std::ldexp(1.0, S + 1))) * sum;
}

double lazy_error_bound_general(const BoundInputs& in) {
  in.validate();
  const int S = in.S;
  auto d = [&](int s) { return qpow(in.q, double(in.K[size_t(s - 1)])); };
  double prod = 1.0;
  for (int s = 1; s <= S - 1; ++s) prod *= 1.0 + d(s);
  double head = in.initial_error * d(S) * prod;
  double sum = 0.0;
  double partial = 1.0;  // product over j < s
  for (int s = 1; s <= S - 1; ++s) {
    sum += d(s) * partial / std::sqrt(std::ldexp(1.0, S - s));
    partial *= 1.0 + d(s);
  }
  return head + 0.5 * in.L_f * in.width * sum;
}

namespace {

// Shared fraction of the constant-K lazy bounds.
double lazy_fraction(double d, int S) {
  double r2S = std::sqrt(std::ldexp(1.0, S));
  double num = r2S * std::pow(d + 1.0, S) - kRoot2 * (d + 1.0);
  double den = r2S * (d + 1.0) * (kRoot2 * d + kRoot2 - 1.0);
  return num / den;
}

}  // namespace

double lazy_error_bound_constK(const BoundInputs& in) {
  in.validate();
  double d = qpow(in.q, double(in.K[0]));
  return in.initial_error * d * std::pow(d + 1.0, in.S - 1) +
         0.5 * in.L_f * in.width * d * lazy_fraction(d, in.S);
}

double lazy_error_bound_constK_direct(const BoundInputs& in) {
  BoundInputs c = in;
  std::fill(c.K.begin(), c.K.end(), in.K.at(0));
  return lazy_error_bound_general(c);
}

double piecewise_distance_bound(double dt, double diff_norm) {
  require(dt > 0 && diff_norm >= 0, "need dt > 0 and a nonnegative norm");
  return std::sqrt((2.0 / 3.0) * dt) * diff_norm;
}

double piecewise_approx_bound(double L_f, double width, double dt) {
  require(L_f >= 0 && width > 0 && dt > 0, "invalid approximation inputs");
  return std::sqrt((2.0 / 15.0) * width * dt * dt * L_f * L_f);
}

ConnectionThresholds connection_thresholds(double L_f, double width,
                                           double epsilon) {
  require(L_f >= 0 && width > 0 && epsilon > 0, "invalid threshold inputs");
  ConnectionThresholds t;
  t.C = std::sqrt(8.0 / 15.0) * std::pow(width, 1.5) * L_f;
  t.D = std::sqrt(3.0 / 40.0) * std::sqrt(width) * L_f;
  t.I_min = t.C / epsilon + 1.0;
  t.discrete_err_max = t.D * epsilon;
  return t;
}

double expected_pgd_bound(double q, std::int64_t K, int S) {
  require(q >= 0 && q < 1, "q must lie in [0, 1)");
  require(K >= 0 && S >= 1, "need K >= 0 and S >= 1");
  return qpow(q, double(K)) * std::sqrt(std::ldexp(1.0, S) + 2.0);
}

std::int64_t pgd_iterations_needed(double epsilon, double q, int S) {
  require(epsilon > 0, "epsilon must be positive");
  require(q > 0 && q < 1, "q must lie in (0, 1)");
  require(S >= 1, "S must be >= 1");
  double k = (std::log(1.0 / epsilon) +
              0.5 * std::log(std::ldexp(1.0, S) + 2.0)) /
             (-std::log(q));
  return std::max<std::int64_t>(0, std::int64_t(std::ceil(k)));
}

std::vector<std::int64_t> expected_greedy_counts(
    const std::vector<std::int64_t>& K) {
  std::vector<std::int64_t> r(K.size(), 0);
  for (size_t i = 1; i < K.size(); ++i) r[i] = r[i - 1] + K[i];
  return r;
}

double expected_greedy_bound(const BoundInputs& in) {
  in.validate();
  const int S = in.S;
  auto r = expected_greedy_counts(in.K);
  double sum = 0.0;
  for (int s = 1; s <= S - 1; ++s) {
    sum += std::ldexp(1.0, s) * qpow(in.q, double(r[size_t(s - 1)]));
  }
  double inner = qpow(in.q, double(r[size_t(S - 1)])) +
                 in.L_f * in.width / std::ldexp(1.0, S + 2) * sum;
  return qpow(in.q, double(in.K[0])) * std::sqrt(std::ldexp(1.0, S + 1)) *
         inner;
}

double expected_lazy_bound(const BoundInputs& in) {
  in.validate();
  double d = qpow(in.q, double(in.K[0]));
  return d * (2.0 * std::pow(d + 1.0, in.S - 1) +
              0.5 * in.L_f * in.width * lazy_fraction(d, in.S));
}

int greedy_better_min_scales(double q, double L_f, double width) {
  require(q > 0 && q < 0.5, "q must lie in (0, 1/2)");
  require(L_f >= 0 && width > 0, "need L_f >= 0 and width > 0");
  double den = kRoot2 * q * q * (1.0 - 2.0 * q) * (1.0 - kRoot2 * q);
  double v = L_f * width / den;
  if (v <= 0) return 4;
  double lg = std::ceil(std::log2(v));
  if (!std::isfinite(lg) || lg > 1e6) {
    throw InvalidInput("scale threshold is unbounded for this q");
  }
  return std::max(4, int(lg));
}

double lazy_better_min_iterations(double q) {
  require(q > 0 && q < 1, "q must lie in (0, 1)");
  double logq = std::log(kRoot2 - 1.0) / std::log(q);
  return 5.0 * (logq - 1.0) / 4.0;
}

int lazy_better_min_scales(double q, std::int64_t K, double L_f,
                           double width) {
  require(q > 0 && q < 1, "q must lie in (0, 1)");
  require(L_f >= 0 && width > 0, "need L_f >= 0 and width > 0");
  if (!(double(K) > lazy_better_min_iterations(q))) {
    throw Inapplicable("K is too small for lazy multiscale to pay off");
  }
  std::int64_t Kp = (4 * K + 4) / 5 - 1;
  double h = 1.0 + qpow(q, double(Kp));
  double g = std::pow(q, -double(K) / 5.0 - 1.0);
  double num = std::log((g / h) *
                        (2.0 + L_f * width / (2.0 * (kRoot2 * h - 1.0))));
  double den = std::log(kRoot2 / h);
  if (!(den > 0)) throw Inapplicable("lazy threshold does not exist");
  double S = std::ceil(num / den);
  return std::max(2, int(S));
}

}  // namespace msopt::bounds
