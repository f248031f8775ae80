#pragma once

// llr(tau) from the Pochhammer form
//   l = log( e^{-w}/(tau-1) * sum_{j>=1} (tau^j - 1) w^{j-1} (2N)_{j-1}
//                               / (j! (tau+1)^{j-1} (N)_{j-1}) ),
// each term built from the previous one by its ratio, in long double.

#include <cmath>

namespace oracle {

inline double llr_pochhammer(double tau, long n, double snr, long max_terms = 200000) {
    const long double t = tau;
    const long double w = 2.0L * static_cast<long double>(snr) * static_cast<long double>(n);
    const long double nd = static_cast<long double>(n);
    // c_j = w^{j-1} (2N)_{j-1} / (j! (tau+1)^{j-1} (N)_{j-1}); c_1 = 1
    long double c = 1.0L;
    long double sum = 0.0L;
    long double tj = t;
    for (long j = 1; j <= max_terms; ++j) {
        const long double term = c * (tj - 1.0L);
        sum += term;
        if (j > 10 && term < 1e-22L * sum && static_cast<long double>(j) > w) break;
        const long double jd = static_cast<long double>(j);
        c *= w * (2.0L * nd + jd - 1.0L) / ((jd + 1.0L) * (t + 1.0L) * (nd + jd - 1.0L));
        tj *= t;
    }
    return static_cast<double>(-w - std::log(t - 1.0L) + std::log(sum));
}

} // namespace oracle
