#ifndef MMEQD_DISTRIBUTIONS_HPP
#define MMEQD_DISTRIBUTIONS_HPP

// Exact densities of the eigenvalue ratio tau = lambda1 / lambda2 of a 2x2
// complex Wishart matrix with N degrees of freedom:
//   f0: central (noise only),
//   f1: non-central with rank-one non-centrality, omega1 = 2 * snr * N.
// Everything is evaluated in log space; nothing is exponentiated until the
// final (bounded) value is formed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mmeqd/errors.hpp"
#include "mmeqd/numerics.hpp"
#include "mmeqd/signal_model.hpp"

namespace mmeqd {

struct DistParams {
    long n = 500;
    double snr = 0.0;  // linear

    double omega1() const { return 2.0 * snr * static_cast<double>(n); }
    double omega2() const { return 0.0; }

    void validate() const {
        if (n < 2) throw domain_error("N must be >= 2");
        if (!(snr >= 0.0) || !std::isfinite(snr)) throw domain_error("snr must be finite and nonnegative");
    }
};

struct SeriesTruncation {
    long terms = 0;  // J_s: the series runs over j = 0..terms
    double achieved_integral_deviation = std::numeric_limits<double>::quiet_NaN();
};

/// Accepted |integral of f1 - 1| when choosing a truncation.
inline constexpr double normalization_tolerance = 1e-5;
inline constexpr long max_truncation_terms = 1'000'000;
/// llr(1) is evaluated at 1 + this offset (both densities vanish at tau = 1).
inline constexpr double llr_boundary_offset = 1e-9;

// ---------------------------------------------------------------------------
// Reference truncation table (rows: N, columns: SNR in dB).

struct TruncationTable {
    static constexpr std::array<long, 7> n_values{50, 100, 500, 1000, 5000, 10000, 50000};
    static constexpr std::array<double, 5> snr_db_values{-20.0, -15.0, -10.0, -5.0, 0.0};
    static constexpr std::array<std::array<long, 5>, 7> terms{{
        {10, 20, 30, 60, 200},
        {20, 30, 50, 200, 300},
        {30, 60, 200, 400, 2000},
        {50, 200, 300, 800, 3000},
        {200, 400, 2000, 4000, 20000},
        {300, 800, 3000, 7000, 30000},
        {2000, 4000, 20000, 40000, 200000},
    }};

    /// Starting J_s for (n, snr): the matching cell, else the nearest cell
    /// with larger N and larger SNR (clamped at the table edges).
    static long seed_terms(long n, double snr) {
        const double db = linear_to_db(snr);
        std::size_t row = n_values.size() - 1;
        for (std::size_t i = 0; i < n_values.size(); ++i) {
            if (n_values[i] >= n) {
                row = i;
                break;
            }
        }
        std::size_t col = snr_db_values.size() - 1;
        for (std::size_t i = 0; i < snr_db_values.size(); ++i) {
            if (snr_db_values[i] >= db - 1e-9) {
                col = i;
                break;
            }
        }
        return terms[row][col];
    }
};

// ---------------------------------------------------------------------------
// H0

inline void check_tau(double tau) {
    if (!(tau >= 1.0) || std::isnan(tau)) throw domain_error("tau must be >= 1, got " + std::to_string(tau));
}

/// log f0(tau) = log(N-1) + 2 log(tau-1) + (N-2) log tau - 2N log(tau+1)
///             + log Gamma(2N) - 2 log Gamma(N)
inline double log_pdf_h0(double tau, long n) {
    check_tau(tau);
    if (n < 2) throw domain_error("N must be >= 2");
    if (tau == 1.0) return neg_inf;
    if (std::isinf(tau)) return neg_inf;
    const double nd = static_cast<double>(n);
    return std::log(nd - 1.0) + 2.0 * std::log(tau - 1.0) + (nd - 2.0) * std::log(tau) -
           2.0 * nd * std::log1p(tau) + log_gamma(2.0 * nd) - 2.0 * log_gamma(nd);
}

inline double pdf_h0(double tau, long n) { return std::exp(log_pdf_h0(tau, n)); }

// ---------------------------------------------------------------------------
// H1

/// f1 for fixed (N, snr, J_s). The tau-independent part of every series
/// coefficient is precomputed, so evaluation costs O(width of the dominant
/// block of terms) rather than O(J_s).
///
///   f1(tau) = e^{-w} (tau-1) tau^{N-2}
///             * sum_{j=1}^{J_s} (tau^j - 1) Gamma(j+2N-1) w^{j-1}
///               / (j! Gamma(j+N-1) Gamma(N-1) (tau+1)^{j+2N-1}),   w = 2 snr N
///
/// The j = 0 term vanishes identically. tau^j - 1 is taken as
/// exp(j log tau) * (-expm1(-j log tau)), so every summand is positive and
/// the sum never cancels.
class H1Density {
public:
    H1Density(DistParams params, SeriesTruncation truncation) : params_(params), truncation_(truncation) {
        params_.validate();
        if (!(params_.snr > 0.0)) {
            throw degenerate_parameter_error("snr must be positive for the H1 density; use the H0 density");
        }
        if (truncation_.terms < 1) throw truncation_error("series truncation must keep at least one term");
        if (truncation_.terms > max_truncation_terms) throw truncation_error("series truncation exceeds 1e6 terms");

        const double nd = static_cast<double>(params_.n);
        const double w = params_.omega1();
        const double log_w = std::log(w);
        const double base = -w - log_gamma(nd - 1.0);
        coeff_.resize(static_cast<std::size_t>(truncation_.terms) + 1, neg_inf);
        for (long j = 1; j <= truncation_.terms; ++j) {
            const double jd = static_cast<double>(j);
            coeff_[static_cast<std::size_t>(j)] = base + log_gamma(jd + 2.0 * nd - 1.0) - log_gamma(jd + 1.0) -
                                                  log_gamma(jd + nd - 1.0) + (jd - 1.0) * log_w;
        }
        log_norm_h0_ = std::log(nd - 1.0) + log_gamma(2.0 * nd) - 2.0 * log_gamma(nd);
    }

    const DistParams& params() const { return params_; }
    const SeriesTruncation& truncation() const { return truncation_; }

    double log_pdf(double tau) const {
        check_tau(tau);
        if (tau == 1.0 || std::isinf(tau)) return neg_inf;
        const double nd = static_cast<double>(params_.n);
        return std::log(tau - 1.0) + (nd - 2.0) * std::log(tau) - (2.0 * nd - 1.0) * std::log1p(tau) +
               log_series(tau);
    }

    double pdf(double tau) const { return std::exp(log_pdf(tau)); }
    double operator()(double tau) const { return pdf(tau); }

    /// log f1(tau) - log f0(tau), with the common factors cancelled before
    /// evaluation.
    double llr(double tau) const {
        check_tau(tau);
        if (tau == 1.0) tau += llr_boundary_offset;
        return log_series(tau) - std::log(tau - 1.0) + std::log1p(tau) - log_norm_h0_;
    }

private:
    // log of sum_{j>=1} exp(coeff_j + j log(tau/(tau+1)) + log(1 - tau^{-j}))
    double log_series(double tau) const {
        const double log_ratio = -std::log1p(1.0 / tau);
        const double log_tau = std::log(tau);
        const auto exponent = [&](long j) {
            const double jd = static_cast<double>(j);
            return coeff_[static_cast<std::size_t>(j)] + jd * log_ratio + std::log(-std::expm1(-jd * log_tau));
        };
        // The exponent is concave in j: locate the peak by bisection on the
        // forward difference, then keep every term within e^-60 of it.
        long lo = 1;
        long hi = truncation_.terms;
        while (lo < hi) {
            const long mid = lo + (hi - lo) / 2;
            if (exponent(mid + 1) > exponent(mid)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        const long peak = lo;
        const double top = exponent(peak);
        const double floor = top - window_;

        long first = 1;
        for (long a = 1, b = peak; a < b;) {
            const long mid = a + (b - a) / 2;
            if (exponent(mid) >= floor) {
                b = mid;
            } else {
                a = mid + 1;
            }
            first = a;
        }
        long last = peak;
        for (long a = peak, b = truncation_.terms; a < b;) {
            const long mid = a + (b - a + 1) / 2;
            if (exponent(mid) >= floor) {
                a = mid;
            } else {
                b = mid - 1;
            }
            last = a;
        }

        double sum = 0.0;
        for (long j = first; j <= last; ++j) sum += std::exp(exponent(j) - top);
        return top + std::log(sum);
    }

    static constexpr double window_ = 60.0;

    DistParams params_;
    SeriesTruncation truncation_;
    std::vector<double> coeff_;
    double log_norm_h0_ = 0.0;
};

/// One-off evaluation; builds the coefficient table on every call.
inline double pdf_h1(double tau, const DistParams& params, const SeriesTruncation& truncation) {
    return H1Density(params, truncation).pdf(tau);
}

inline double llr(double tau, const DistParams& params, const SeriesTruncation& truncation) {
    return H1Density(params, truncation).llr(tau);
}

/// Smallest accepted J_s reached by doubling from the table seed until the
/// quadrature of f1 is within 1e-5 of one.
inline SeriesTruncation choose_truncation(const DistParams& params, const QuadratureSpec& spec = {}) {
    params.validate();
    if (!(params.snr > 0.0)) throw degenerate_parameter_error("snr must be positive to choose a truncation");
    for (long terms = TruncationTable::seed_terms(params.n, params.snr); terms <= max_truncation_terms;
         terms *= 2) {
        const H1Density density(params, {terms, 0.0});
        const double deviation = std::fabs(integrate(density, spec) - 1.0);
        if (deviation < normalization_tolerance) return {terms, deviation};
    }
    throw truncation_error("normalization criterion not reached with J_s <= 1e6 for N=" + std::to_string(params.n) +
                           ", snr_db=" + std::to_string(linear_to_db(params.snr)));
}

/// Deviation |integral f1 - 1| for an explicitly given J_s.
inline double normalization_deviation(const DistParams& params, long terms, const QuadratureSpec& spec = {}) {
    return std::fabs(integrate(H1Density(params, {terms, 0.0}), spec) - 1.0);
}

// ---------------------------------------------------------------------------
// CDFs

namespace detail {

/// 1 - sum_{j=0}^{b-1} C(a+j, j) q^j (1-q)^{a+1},  q = c / (c+1).
/// Terms are generated outward from the mode by their ratio so the
/// accumulated log error stays small even for a, b ~ 1e5.
inline long double negbin_upper_tail(long a, long b, long double c) {
    if (b <= 0) return 1.0L;
    const long double ad = static_cast<long double>(a);
    const long double log_q = std::log(c) - std::log1p(c);
    const long double log_p = -std::log1p(c);
    const auto log_ratio = [&](long j) {  // log(t_{j+1} / t_j)
        return std::log((ad + static_cast<long double>(j) + 1.0L) / (static_cast<long double>(j) + 1.0L)) + log_q;
    };
    long mode = static_cast<long>(std::ceil((ad + 1.0L) * c - c - 1.0L));
    mode = std::clamp(mode, 0L, b - 1);
    const long double md = static_cast<long double>(mode);
    const long double log_mode = std::lgamma(ad + md + 1.0L) - std::lgamma(md + 1.0L) - std::lgamma(ad + 1.0L) +
                                 md * log_q + (ad + 1.0L) * log_p;

    constexpr long double cutoff = -60.0L;
    std::vector<long double> below;
    long double lt = 0.0L;
    for (long j = mode - 1; j >= 0; --j) {
        lt -= log_ratio(j);
        if (lt < cutoff) break;
        below.push_back(lt);
    }
    long double sum = 0.0L;
    for (auto it = below.rbegin(); it != below.rend(); ++it) sum += std::exp(*it);
    sum += 1.0L;
    lt = 0.0L;
    for (long j = mode + 1; j < b; ++j) {
        lt += log_ratio(j - 1);
        if (lt < cutoff) break;
        sum += std::exp(lt);
    }
    return -std::expm1(log_mode + std::log(sum));
}

/// Delta1(a, b, c) / (Gamma(N) Gamma(N-1)).
inline long double delta1_scaled(long a, long b, long double c, long double log_scale) {
    const long double weight = std::exp(std::lgamma(static_cast<long double>(b)) +
                                        std::lgamma(static_cast<long double>(a) + 1.0L) - log_scale);
    return weight * negbin_upper_tail(a, b, c);
}

} // namespace detail

/// F0 via the closed form K_uc (p(x) - p(1)), where
///   p(x) = Delta1(N, N-1, x) - 2 Delta1(N-1, N, x) + Delta1(N-2, N+1, x)
///   Delta1(a,b,c) = (b-1)! (a! - sum_{j<b} (a+j)! c^j / (j! (c+1)^{a+j+1})).
/// K_uc is fixed by requiring F0(tau_max) = 1 on the adaptive support of f0.
class H0Cdf {
public:
    explicit H0Cdf(long n, const QuadratureSpec& spec = {}) : n_(n) {
        if (n < 2) throw domain_error("N must be >= 2");
        log_scale_ = std::lgamma(static_cast<long double>(n)) + std::lgamma(static_cast<long double>(n) - 1.0L);
        upper_ = find_support_upper([n](double t) { return pdf_h0(t, n); }, spec);
        p_at_one_ = p_scaled(1.0L);
        k_scaled_ = 1.0L / (p_scaled(upper_) - p_at_one_);
    }

    long n() const { return n_; }
    double upper() const { return upper_; }

    /// K_uc * Gamma(N) Gamma(N-1); analytically equal to 1.
    double normalization_ratio() const { return static_cast<double>(k_scaled_); }

    double operator()(double x) const {
        check_tau(x);
        if (x == 1.0) return 0.0;
        if (std::isinf(x)) return 1.0;
        const long double v = k_scaled_ * (p_scaled(x) - p_at_one_);
        return std::clamp(static_cast<double>(v), 0.0, 1.0);
    }

    /// 1 - F0(x) computed without the final subtraction from one.
    double survival(double x) const {
        check_tau(x);
        if (x == 1.0) return 1.0;
        if (std::isinf(x)) return 0.0;
        const long double v = k_scaled_ * (p_scaled(upper_) - p_scaled(x));
        return std::clamp(static_cast<double>(v), 0.0, 1.0);
    }

private:
    long double p_scaled(long double x) const {
        const long n = n_;
        return detail::delta1_scaled(n, n - 1, x, log_scale_) - 2.0L * detail::delta1_scaled(n - 1, n, x, log_scale_) +
               detail::delta1_scaled(n - 2, n + 1, x, log_scale_);
    }

    long n_;
    long double log_scale_ = 0.0L;
    double upper_ = 2.0;
    long double p_at_one_ = 0.0L;
    long double k_scaled_ = 1.0L;
};

inline double cdf_h0(double x, long n) { return H0Cdf(n)(x); }

/// Clamp a quadrature probability into [0, 1]; reports the clamped excess.
inline double clamp_probability(double v, double* excess = nullptr) {
    const double c = std::clamp(v, 0.0, 1.0);
    if (excess) *excess = std::fabs(v - c);
    return c;
}

/// F1 by trapezoidal quadrature of f1 over [1, x], tabulated once on the
/// adaptive support so repeated queries cost one density evaluation each.
class H1Cdf {
public:
    H1Cdf(H1Density density, const QuadratureSpec& spec = {})
        : density_(std::move(density)), table_(density_, spec) {}

    const H1Density& density() const { return density_; }
    const TabulatedIntegral& table() const { return table_; }
    double upper() const { return table_.upper(); }

    double operator()(double x, double* clamp_excess = nullptr) const {
        check_tau(x);
        if (x >= table_.upper()) return clamp_probability(table_.total(), clamp_excess);
        return clamp_probability(table_.integral_to(x, density_.pdf(x)), clamp_excess);
    }

private:
    H1Density density_;
    TabulatedIntegral table_;
};

inline double cdf_h1(double x, const DistParams& params, const SeriesTruncation& truncation) {
    return H1Cdf(H1Density(params, truncation))(x);
}

} // namespace mmeqd

#endif // MMEQD_DISTRIBUTIONS_HPP
