#ifndef MMEQD_BLOCK_DETECTOR_HPP
#define MMEQD_BLOCK_DETECTOR_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "mmeqd/distributions.hpp"

namespace mmeqd {

struct RocPoint {
    double h = 1.0;
    double p_fa = 1.0;
    double p_d = 1.0;
};

/// Log-spaced false-alarm grid on [pfa_min, 1], ascending, endpoint 1 included.
inline std::vector<double> log_pfa_grid(int points = 20, double pfa_min = 1e-4) {
    if (points < 2) throw config_error("pfa grid needs at least two points");
    if (!(pfa_min > 0.0 && pfa_min < 1.0)) throw config_error("pfa grid minimum must lie in (0, 1)");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(points));
    const double lo = std::log10(pfa_min);
    for (int i = 0; i < points; ++i) {
        grid.push_back(i + 1 == points ? 1.0 : std::pow(10.0, lo * (1.0 - static_cast<double>(i) / (points - 1))));
    }
    return grid;
}

/// MME block detector for fixed N. The H1 side is optional: threshold
/// design only needs f0.
class BlockDetector {
public:
    static constexpr double design_tolerance = 1e-8;

    explicit BlockDetector(long n, const QuadratureSpec& spec = {}) : spec_(spec), cdf0_(n, spec) {}

    BlockDetector(const DistParams& params, const SeriesTruncation& truncation, const QuadratureSpec& spec = {})
        : spec_(spec), cdf0_(params.n, spec), cdf1_(H1Cdf(H1Density(params, truncation), spec)) {}

    long n() const { return cdf0_.n(); }
    const H0Cdf& h0_cdf() const { return cdf0_; }
    bool has_h1() const { return cdf1_.has_value(); }

    double pfa(double h) const {
        check_tau(h);
        return cdf0_.survival(h);
    }

    /// Clamp excess beyond 1e-6 is reported through clamp_excess.
    double pd(double h, double* clamp_excess = nullptr) const {
        check_tau(h);
        if (!cdf1_) throw config_error("detection probability needs an SNR");
        if (h == 1.0) return 1.0;
        double excess = 0.0;
        const double f1 = (*cdf1_)(h, &excess);
        if (clamp_excess) *clamp_excess = excess;
        return clamp_probability(1.0 - f1);
    }

    /// Threshold h with pfa(h) = target, by bisection on [1, tau_max].
    double design_threshold(double target_pfa) const {
        if (!(target_pfa > 0.0) || target_pfa > 1.0 || std::isnan(target_pfa)) {
            throw design_error("target false-alarm probability must lie in (0, 1]");
        }
        if (target_pfa == 1.0) return 1.0;
        const double h = bisect([&](double x) { return cdf0_.survival(x) - target_pfa; }, 1.0, cdf0_.upper(), 1e-15);
        if (std::fabs(pfa(h) - target_pfa) >= design_tolerance) {
            throw design_error("target false-alarm probability not achievable to 1e-8 at N=" + std::to_string(n()));
        }
        return h;
    }

    RocPoint point_at_threshold(double h) const { return {h, pfa(h), pd(h)}; }

    /// ROC sampled at the thresholds achieving each target P_fa. Targets
    /// must be ascending; the returned points are in the same order.
    std::vector<RocPoint> roc_from_pfa(const std::vector<double>& pfa_grid) const {
        check_sorted(pfa_grid);
        std::vector<RocPoint> out;
        out.reserve(pfa_grid.size());
        for (double q : pfa_grid) {
            const double h = design_threshold(q);
            out.push_back({h, q == 1.0 ? 1.0 : pfa(h), pd(h)});
        }
        return out;
    }

    std::vector<RocPoint> roc_from_thresholds(const std::vector<double>& h_grid) const {
        check_sorted(h_grid);
        std::vector<RocPoint> out;
        out.reserve(h_grid.size());
        for (double h : h_grid) out.push_back(point_at_threshold(h));
        return out;
    }

private:
    static void check_sorted(const std::vector<double>& grid) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] >= grid[i - 1])) throw config_error("grid must be sorted ascending");
        }
    }

    QuadratureSpec spec_;
    H0Cdf cdf0_;
    std::optional<H1Cdf> cdf1_;
};

inline double pfa(double h, long n) { return BlockDetector(n).pfa(h); }

inline double pd(double h, const DistParams& params, const SeriesTruncation& truncation) {
    return BlockDetector(params, truncation).pd(h);
}

inline double design_threshold(long n, double target_pfa) { return BlockDetector(n).design_threshold(target_pfa); }

inline std::vector<RocPoint> roc(const DistParams& params, const SeriesTruncation& truncation,
                                 const std::vector<double>& pfa_grid = log_pfa_grid()) {
    return BlockDetector(params, truncation).roc_from_pfa(pfa_grid);
}

} // namespace mmeqd

#endif // MMEQD_BLOCK_DETECTOR_HPP
