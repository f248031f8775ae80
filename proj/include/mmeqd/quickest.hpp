#ifndef MMEQD_QUICKEST_HPP
#define MMEQD_QUICKEST_HPP

// Quickest detection on the block-indexed statistic stream: CUSUM for a
// known SNR, GLR over a finite SNR grid, and the Wald-type bounds on the
// CUSUM mean detection delay and mean time to false alarm. All times are in
// blocks; to_sample_timescale converts to samples.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmeqd/distributions.hpp"

namespace mmeqd {

inline constexpr double infinite_threshold = std::numeric_limits<double>::infinity();

inline void check_threshold(double h) {
    if (!(h > 0.0)) throw domain_error("threshold must be positive");
}

// ---------------------------------------------------------------------------
// CUSUM

struct CusumState {
    double g = 0.0;
    long k = 0;
    std::optional<long> alarmed_at;
};

/// g' = max(0, g + l); alarm latched at the first k with g' > h. An alarmed
/// state is returned unchanged.
inline CusumState cusum_step(CusumState state, double llr_value, double h) {
    check_threshold(h);
    if (state.alarmed_at) return state;
    state.k += 1;
    state.g = std::max(0.0, state.g + llr_value);
    if (state.g > h) state.alarmed_at = state.k;
    return state;
}

inline CusumState cusum_step(CusumState state, const TestStatistic& stat, const H1Density& density, double h) {
    return cusum_step(state, density.llr(stat.tau), h);
}

// ---------------------------------------------------------------------------
// GLR

/// dB-spaced candidate grid start:stop:step (inclusive of stop when it
/// falls on the lattice).
struct DbGrid {
    double start_db = -20.0;
    double stop_db = -5.0;
    double step_db = 0.1;

    void validate() const {
        if (!std::isfinite(start_db) || !std::isfinite(stop_db) || !(step_db > 0.0) || stop_db < start_db) {
            throw config_error("dB grid needs start <= stop and a positive step");
        }
    }

    std::size_t size() const {
        validate();
        return static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9)) + 1;
    }

    std::vector<double> values_db() const {
        std::vector<double> out;
        const std::size_t count = size();
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(std::round((start_db + static_cast<double>(i) * step_db) * 1e9) / 1e9);
        }
        return out;
    }

    static DbGrid single(double db) { return {db, db, 1.0}; }

    std::string to_string() const {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%g:%g:%g", start_db, stop_db, step_db);
        return buf;
    }
};

/// Per-candidate running sums. sums[i] is the CUSUM of the llr under
/// candidate i; last_reset[i] is the change-point estimate m for that
/// candidate (the last block at which its sum returned to zero).
struct GlrState {
    std::vector<double> sums;
    std::vector<long> last_reset;
    long k = 0;
    double g = 0.0;
    std::size_t best = 0;
    long m_star = 0;
    std::optional<long> alarmed_at;

    explicit GlrState(std::size_t candidates = 0) : sums(candidates, 0.0), last_reset(candidates, 0) {}
};

/// One block of the GLR recursion. Because the max over change points and
/// the max over a finite SNR grid commute, g_G(k) = max_i CUSUM_i(k).
/// llrs[i] is the llr of the new block under candidate i (grid ascending).
/// Ties go to the smaller SNR, then to the later change point.
inline GlrState glr_step(GlrState state, std::span<const double> llrs, double h) {
    check_threshold(h);
    if (llrs.size() != state.sums.size() || llrs.empty()) {
        throw config_error("glr_step: one llr per candidate is required");
    }
    if (state.alarmed_at) return state;
    state.k += 1;
    for (std::size_t i = 0; i < llrs.size(); ++i) {
        const double s = state.sums[i] + llrs[i];
        if (s > 0.0) {
            state.sums[i] = s;
        } else {
            state.sums[i] = 0.0;
            state.last_reset[i] = state.k;
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < state.sums.size(); ++i) {
        if (state.sums[i] > state.sums[best]) best = i;
    }
    state.best = best;
    state.g = state.sums[best];
    state.m_star = state.last_reset[best];
    if (state.g > h) state.alarmed_at = state.k;
    return state;
}

/// llr evaluators for every candidate of a GLR grid.
class LlrBank {
public:
    /// All candidates share one truncation, chosen at the largest SNR of the
    /// grid (the most demanding cell) unless terms_override is given.
    LlrBank(long n, const DbGrid& grid, const QuadratureSpec& spec = {},
            std::optional<long> terms_override = std::nullopt)
        : grid_(grid), snr_db_(grid.values_db()) {
        const DistParams top{n, db_to_linear(snr_db_.back())};
        truncation_ = terms_override ? SeriesTruncation{*terms_override, std::numeric_limits<double>::quiet_NaN()}
                                     : choose_truncation(top, spec);
        densities_.reserve(snr_db_.size());
        for (double db : snr_db_) densities_.emplace_back(DistParams{n, db_to_linear(db)}, truncation_);
    }

    std::size_t size() const { return densities_.size(); }
    const DbGrid& grid() const { return grid_; }
    const std::vector<double>& snr_db() const { return snr_db_; }
    const SeriesTruncation& truncation() const { return truncation_; }
    const H1Density& density(std::size_t i) const { return densities_[i]; }

    void evaluate(double tau, std::vector<double>& out) const {
        out.resize(densities_.size());
        for (std::size_t i = 0; i < densities_.size(); ++i) out[i] = densities_[i].llr(tau);
    }

private:
    DbGrid grid_;
    std::vector<double> snr_db_;
    SeriesTruncation truncation_;
    std::vector<H1Density> densities_;
};

inline GlrState glr_step(GlrState state, const TestStatistic& stat, const LlrBank& bank, double h) {
    std::vector<double> llrs;
    bank.evaluate(stat.tau, llrs);
    return glr_step(std::move(state), llrs, h);
}

// ---------------------------------------------------------------------------
// Bounds

struct BoundSettings {
    QuadratureSpec quadrature{};
    int delta_points = 200;
    /// The delta grid is log-spaced on [delta_min_ratio * delta_max, delta_max].
    double delta_min_ratio = 1e-4;
    /// Conditioning events with probability at or below this are treated as
    /// empty (conditional expectation 0).
    double vanishing_probability = 1e-12;
};

struct QdBounds {
    double h = 0.0;
    double tau_d_upper = 0.0;
    double tau_fa_lower = 0.0;
    double tau_fa_simple = 0.0;
    double phi = -1.0;
    double gamma_f0 = 0.0;
    double gamma_f1 = 0.0;
    double e_l_f0 = 0.0;
    double e_l_f1 = 0.0;
};

/// llr and density tabulated on the quadrature nodes of one hypothesis.
class LlrTable {
public:
    LlrTable(const H1Density& density, Hypothesis under, const QuadratureSpec& spec) {
        const long n = density.params().n;
        const auto f = [&](double t) { return under == Hypothesis::h0 ? pdf_h0(t, n) : density.pdf(t); };
        const TabulatedIntegral tab(f, spec);
        nodes_.assign(tab.nodes().begin(), tab.nodes().end());
        density_.assign(tab.values().begin(), tab.values().end());
        llr_.reserve(nodes_.size());
        for (double t : nodes_) llr_.push_back(density.llr(t));
    }

    /// Trapezoid of g(l(tau), tau) f(tau) over the nodes.
    template <class G>
    double integrate(G&& g) const {
        double s = 0.0;
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            const double w = nodes_[i] - nodes_[i - 1];
            s += 0.5 * w * (g(llr_[i]) * density_[i] + g(llr_[i - 1]) * density_[i - 1]);
        }
        return s;
    }

    /// P(l >= delta) with the crossing inside a bin located by linear
    /// interpolation of l.
    double tail_probability(double delta) const {
        double s = 0.0;
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            const double w = nodes_[i] - nodes_[i - 1];
            const bool a = llr_[i - 1] >= delta;
            const bool b = llr_[i] >= delta;
            if (a && b) {
                s += 0.5 * w * (density_[i] + density_[i - 1]);
            } else if (a != b) {
                const double theta = (delta - llr_[i - 1]) / (llr_[i] - llr_[i - 1]);
                const double f_cross = density_[i - 1] + theta * (density_[i] - density_[i - 1]);
                if (b) {
                    s += 0.5 * (1.0 - theta) * w * (f_cross + density_[i]);
                } else {
                    s += 0.5 * theta * w * (density_[i - 1] + f_cross);
                }
            }
        }
        return s;
    }

    double max_llr() const { return *std::max_element(llr_.begin(), llr_.end()); }

private:
    std::vector<double> nodes_;
    std::vector<double> density_;
    std::vector<double> llr_;
};

/// Numerical constants of the CUSUM bounds for one (N, SNR, J_s).
class BoundCalculator {
public:
    BoundCalculator(const H1Density& density, BoundSettings settings = {})
        : settings_(settings),
          table0_(density, Hypothesis::h0, settings.quadrature),
          table1_(density, Hypothesis::h1, settings.quadrature) {
        if (settings_.delta_points < 2) throw config_error("delta grid needs at least two points");
        e_l_f0_ = table0_.integrate([](double l) { return l; });
        e_l_f1_ = table1_.integrate([](double l) { return l; });
        gamma_f0_ = gamma_on(table0_, settings_.delta_points);
        gamma_f1_ = gamma_on(table1_, settings_.delta_points);
    }

    const BoundSettings& settings() const { return settings_; }

    double expectation(Hypothesis under) const { return under == Hypothesis::h0 ? e_l_f0_ : e_l_f1_; }
    double gamma(Hypothesis under) const { return under == Hypothesis::h0 ? gamma_f0_ : gamma_f1_; }

    /// gamma recomputed on a delta grid with `points` points.
    double gamma_with_points(Hypothesis under, int points) const {
        return gamma_on(under == Hypothesis::h0 ? table0_ : table1_, points);
    }

    /// (h + gamma(f1)) / E_f1[l]
    double tau_d_upper(double h) const {
        check_threshold(h);
        if (!(e_l_f1_ > 0.0)) throw bound_undefined_error("E_f1[l] is not positive");
        return (h + gamma_f1_) / e_l_f1_;
    }

    /// (1 - e^h + h + gamma(f0)) / E_f0[l], i.e. the general bound with the
    /// moment-condition root phi = -1 substituted.
    double tau_fa_lower(double h) const {
        check_threshold(h);
        if (!(e_l_f0_ < 0.0)) throw bound_undefined_error("E_f0[l] is not negative");
        return (1.0 - std::exp(h) + h + gamma_f0_) / e_l_f0_;
    }

    QdBounds bounds(double h) const;

private:
    double gamma_on(const LlrTable& table, int points) const {
        const double delta_max = table.max_llr();
        if (!(delta_max > 0.0)) return 0.0;
        const double lo = std::log(settings_.delta_min_ratio * delta_max);
        const double hi = std::log(delta_max);
        double best = 0.0;
        for (int i = 0; i < points; ++i) {
            const double delta = std::exp(lo + (hi - lo) * static_cast<double>(i) / (points - 1));
            const double p = table.tail_probability(delta);
            if (p <= settings_.vanishing_probability) continue;
            const double excess = table.integrate([delta](double l) { return std::max(0.0, l - delta); });
            best = std::max(best, excess / p);
        }
        return best;
    }

    BoundSettings settings_;
    LlrTable table0_;
    LlrTable table1_;
    double e_l_f0_ = 0.0;
    double e_l_f1_ = 0.0;
    double gamma_f0_ = 0.0;
    double gamma_f1_ = 0.0;
};

inline double bound_tfa_simple(double h) {
    if (!(h >= 0.0)) throw domain_error("threshold must be nonnegative");
    return std::exp(h);
}

inline QdBounds BoundCalculator::bounds(double h) const {
    QdBounds b;
    b.h = h;
    b.tau_d_upper = tau_d_upper(h);
    b.tau_fa_lower = tau_fa_lower(h);
    b.tau_fa_simple = bound_tfa_simple(h);
    b.gamma_f0 = gamma_f0_;
    b.gamma_f1 = gamma_f1_;
    b.e_l_f0 = e_l_f0_;
    b.e_l_f1 = e_l_f1_;
    return b;
}

inline double expectation_llr(Hypothesis under, const DistParams& params, const SeriesTruncation& truncation,
                              const QuadratureSpec& spec = {}) {
    const H1Density density(params, truncation);
    return LlrTable(density, under, spec).integrate([](double l) { return l; });
}

inline double gamma_f(Hypothesis under, const DistParams& params, const SeriesTruncation& truncation,
                      const BoundSettings& settings = {}) {
    return BoundCalculator(H1Density(params, truncation), settings).gamma(under);
}

inline double bound_td_upper(double h, const DistParams& params, const SeriesTruncation& truncation) {
    return BoundCalculator(H1Density(params, truncation)).tau_d_upper(h);
}

inline double bound_tfa_lower(double h, const DistParams& params, const SeriesTruncation& truncation) {
    return BoundCalculator(H1Density(params, truncation)).tau_fa_lower(h);
}

inline double to_sample_timescale(double blocks, long n) { return blocks * static_cast<double>(n); }

} // namespace mmeqd

#endif // MMEQD_QUICKEST_HPP
