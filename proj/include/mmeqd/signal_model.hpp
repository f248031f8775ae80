#ifndef MMEQD_SIGNAL_MODEL_HPP
#define MMEQD_SIGNAL_MODEL_HPP

// PSK + AWGN sample blocks for two receivers, the scaled sample covariance
// R = Y Y^H of each block, its ordered eigenvalues and the eigenvalue ratio.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mmeqd/errors.hpp"
#include "mmeqd/rng.hpp"

namespace mmeqd {

enum class Hypothesis { h0, h1 };

inline const char* to_string(Hypothesis h) { return h == Hypothesis::h0 ? "H0" : "H1"; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct ModelConfig {
    int receivers = 2;
    long samples_per_block = 500;
    double snr = 0.0;  // linear
    int psk_order = 4;  // 1 = constant signal

    void validate() const {
        if (receivers != 2) throw config_error("receivers must be 2");
        if (samples_per_block < 2) throw config_error("samples_per_block must be >= 2");
        if (!(snr >= 0.0) || !std::isfinite(snr)) throw config_error("snr must be a finite nonnegative value");
        if (psk_order != 1 && psk_order != 2 && psk_order != 4 && psk_order != 8 && psk_order != 16) {
            throw config_error("psk_order must be one of 1, 2, 4, 8, 16");
        }
    }
};

/// The 2 x N matrix Y(k). Entries are stored row-major.
struct SampleBlock {
    long columns = 0;
    std::vector<std::complex<double>> entries;
    Hypothesis hypothesis = Hypothesis::h0;
    long block_index = 1;

    std::complex<double>& at(int row, long col) { return entries[static_cast<std::size_t>(row * columns + col)]; }
    const std::complex<double>& at(int row, long col) const {
        return entries[static_cast<std::size_t>(row * columns + col)];
    }
};

struct EigPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

struct TestStatistic {
    double tau = 1.0;
    long block_index = 0;
};

/// Draws Y(k). Under H1 every column is sqrt(snr) * s_j * [1, 1]^T plus
/// noise, with s_j uniform over the M-PSK alphabet (phase offset 0).
inline SampleBlock generate_block(const ModelConfig& config, Hypothesis hypothesis, CounterRng& rng,
                                  long block_index = 1) {
    config.validate();
    const long n = config.samples_per_block;
    SampleBlock block;
    block.columns = n;
    block.hypothesis = hypothesis;
    block.block_index = block_index;
    block.entries.resize(static_cast<std::size_t>(2 * n));

    const double amplitude = std::sqrt(config.snr);
    const bool with_signal = hypothesis == Hypothesis::h1 && amplitude > 0.0;
    const auto order = static_cast<std::uint32_t>(config.psk_order);
    for (long j = 0; j < n; ++j) {
        std::complex<double> x{0.0, 0.0};
        if (with_signal) {
            const std::uint32_t m = order == 1 ? 0 : rng.below(order);
            x = std::polar(amplitude, 2.0 * std::numbers::pi * m / order);
        }
        block.at(0, j) = x + rng.complex_normal();
        block.at(1, j) = x + rng.complex_normal();
    }
    return block;
}

/// Entries of the Hermitian 2x2 matrix R = Y Y^H: [[a, b], [conj(b), d]].
struct Covariance2 {
    double a = 0.0;
    double d = 0.0;
    std::complex<double> b{0.0, 0.0};

    double trace() const { return a + d; }
    double det() const { return a * d - std::norm(b); }
};

inline Covariance2 scaled_covariance(const SampleBlock& block) {
    if (block.columns < 1 || block.entries.size() != static_cast<std::size_t>(2 * block.columns)) {
        throw data_error("sample block must have 2 rows");
    }
    Covariance2 r;
    for (long j = 0; j < block.columns; ++j) {
        const auto y0 = block.at(0, j);
        const auto y1 = block.at(1, j);
        if (!std::isfinite(y0.real()) || !std::isfinite(y0.imag()) || !std::isfinite(y1.real()) ||
            !std::isfinite(y1.imag())) {
            throw data_error("sample block contains non-finite entries");
        }
        r.a += std::norm(y0);
        r.d += std::norm(y1);
        r.b += y0 * std::conj(y1);
    }
    return r;
}

/// Closed-form ordered eigenvalues of a Hermitian 2x2 matrix. The smaller
/// one is recovered as det / lambda1, which avoids the cancellation in
/// (tr - sqrt(tr^2 - 4 det)) / 2 when the eigenvalues are far apart.
inline EigPair hermitian2_eigs(const Covariance2& r) {
    const double half_gap = std::hypot(0.5 * (r.a - r.d), std::abs(r.b));
    const double mean = 0.5 * (r.a + r.d);
    const double l1 = mean + half_gap;
    if (l1 <= 0.0) return {0.0, 0.0};
    const double l2 = std::max(0.0, r.det() / l1);
    return {l1, std::min(l1, l2)};
}

inline EigPair covariance_eigs(const SampleBlock& block) {
    if (block.columns < 2) throw data_error("sample block needs at least 2 columns");
    return hermitian2_eigs(scaled_covariance(block));
}

/// Relative guard on lambda2 below which the ratio is rejected.
inline constexpr double degenerate_ratio_guard = 1e-12;

inline TestStatistic test_statistic(const EigPair& eigs, long block_index = 0) {
    if (!(eigs.lambda2 > degenerate_ratio_guard * eigs.lambda1) || !(eigs.lambda1 > 0.0)) {
        throw degenerate_covariance_error("smallest eigenvalue is zero relative to the largest");
    }
    return {eigs.lambda1 / eigs.lambda2, block_index};
}

/// Blocks 1..k_c-1 are drawn under H0 and blocks >= k_c under H1. Block k
/// uses its own counter stream keyed by (stream key, k, hypothesis), so any
/// block can be regenerated independently of the ones before it.
class StatisticStream {
public:
    /// change_block == nullopt means no change (every block under H0).
    StatisticStream(ModelConfig config, std::optional<long> change_block, std::uint64_t stream_key)
        : config_(config), change_block_(change_block), key_(stream_key) {
        config_.validate();
        if (change_block_ && *change_block_ < 1) throw config_error("change block must be >= 1");
    }

    Hypothesis hypothesis_at(long k) const {
        return (change_block_ && k >= *change_block_) ? Hypothesis::h1 : Hypothesis::h0;
    }

    SampleBlock block_at(long k) const {
        const Hypothesis hyp = hypothesis_at(k);
        CounterRng rng(derive_key({key_, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(hyp)}));
        return generate_block(config_, hyp, rng, k);
    }

    TestStatistic statistic_at(long k) const { return test_statistic(covariance_eigs(block_at(k)), k); }

    TestStatistic next() { return statistic_at(++k_); }

    long blocks_consumed() const { return k_; }
    const ModelConfig& config() const { return config_; }

private:
    ModelConfig config_;
    std::optional<long> change_block_;
    std::uint64_t key_;
    long k_ = 0;
};

/// Debug dump: block,row,col,re,im. Not a stable format.
inline void write_block_csv(std::ostream& os, const SampleBlock& block) {
    os << "block,row,col,re,im\n";
    os.precision(12);
    for (int r = 0; r < 2; ++r) {
        for (long c = 0; c < block.columns; ++c) {
            const auto v = block.at(r, c);
            os << block.block_index << ',' << r << ',' << c << ',' << v.real() << ',' << v.imag() << '\n';
        }
    }
}

} // namespace mmeqd

#endif // MMEQD_SIGNAL_MODEL_HPP
