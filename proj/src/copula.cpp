#include "lrcp/copula.hpp"

#include <algorithm>
#include <cmath>

namespace lrcp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSqrt2 = 1.4142135623730950488;
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

double std_normal_logpdf(double x) {
    return -0.5 * (kLog2Pi + x * x);
}

double std_normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw DataError("std_normal_quantile: u must lie in (0,1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (u < plow) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        double q = u - 0.5;
        double t = q * q;
        x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * q /
            (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Newton step against the erfc-based CDF.
    double err = std_normal_cdf(x) - u;
    x -= err * std::exp(0.5 * x * x) * std::sqrt(2.0 * M_PI);
    return x;
}

double ecdf_delta(int m) {
    return 1.0 / (4.0 * std::pow(static_cast<double>(m), 0.25) *
                  std::sqrt(M_PI * std::log(static_cast<double>(m))));
}

EmpiricalCdf fit_ecdf(const std::vector<double>& values, int m,
                      double jitter_scale, Rng& rng) {
    if (m < 2) throw DataError("fit_ecdf: m must be >= 2");
    if (static_cast<int>(values.size()) < m)
        throw DataError("fit_ecdf: need at least m observations");
    EmpiricalCdf cdf;
    cdf.m = m;
    cdf.jitter_scale = jitter_scale;
    cdf.delta = ecdf_delta(m);
    cdf.sorted_values.assign(values.end() - m, values.end());
    for (double v : cdf.sorted_values)
        if (!std::isfinite(v)) throw DataError("fit_ecdf: non-finite value");
    if (jitter_scale > 0.0) {
        std::uniform_real_distribution<double> jitter(0.0, jitter_scale);
        for (double& v : cdf.sorted_values) v += jitter(rng);
    }
    std::sort(cdf.sorted_values.begin(), cdf.sorted_values.end());
    return cdf;
}

namespace {
// Level of the k-th order statistic (0-based), before truncation.
inline double knot_level(int k, int m) {
    return (static_cast<double>(k) + 0.5) / static_cast<double>(m);
}
}

double ecdf_eval(const EmpiricalCdf& cdf, double v) {
    const auto& s = cdf.sorted_values;
    const int m = cdf.m;
    double u;
    if (v < s.front()) {
        u = 0.0;
    } else if (v >= s.back()) {
        u = 1.0;
        if (v == s.back()) u = knot_level(m - 1, m);
    } else {
        // first knot strictly greater than v
        auto it = std::upper_bound(s.begin(), s.end(), v);
        int k = static_cast<int>(it - s.begin());  // v in [s[k-1], s[k])
        double lo = s[k - 1], hi = s[k];
        double frac = (hi > lo) ? (v - lo) / (hi - lo) : 0.0;
        u = knot_level(k - 1, m) + frac / static_cast<double>(m);
    }
    return std::clamp(u, cdf.delta, 1.0 - cdf.delta);
}

double ecdf_inverse(const EmpiricalCdf& cdf, double u) {
    if (!(u > 0.0 && u < 1.0))
        throw DataError("ecdf_inverse: u must lie in (0,1)");
    const auto& s = cdf.sorted_values;
    const int m = cdf.m;
    if (u <= knot_level(0, m)) return s.front();
    if (u >= knot_level(m - 1, m)) return s.back();
    double pos = u * m - 0.5;  // in (0, m-1)
    int k = static_cast<int>(pos);
    if (k >= m - 1) k = m - 2;
    double frac = pos - k;
    return s[k] + frac * (s[k + 1] - s[k]);
}

double ecdf_density(const EmpiricalCdf& cdf, double v) {
    const auto& s = cdf.sorted_values;
    const int m = cdf.m;
    if (v < s.front() || v > s.back()) return 0.0;
    auto it = std::upper_bound(s.begin(), s.end(), v);
    int k = static_cast<int>(it - s.begin());
    if (k == 0) k = 1;
    if (k > m - 1) k = m - 1;
    double gap = s[k] - s[k - 1];
    if (!(gap > 0.0)) return 0.0;  // tied knots (no jitter applied)
    return 1.0 / (static_cast<double>(m) * gap);
}

double transform_forward(const MarginalTransform& t, double z) {
    return std_normal_quantile(ecdf_eval(t.cdf, z));
}

double transform_inverse(const MarginalTransform& t, double x) {
    return ecdf_inverse(t.cdf, std_normal_cdf(x));
}

double copula_log_correction(const MarginalTransform& t, double z) {
    double density = ecdf_density(t.cdf, z);
    if (!(density > 0.0))
        throw NumericalError("copula_log_correction: z outside ECDF support");
    double x = transform_forward(t, z);
    return -std_normal_logpdf(x) + std::log(density);
}

}  // namespace lrcp
