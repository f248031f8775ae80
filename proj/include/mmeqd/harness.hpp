#ifndef MMEQD_HARNESS_HPP
#define MMEQD_HARNESS_HPP

// Seeded Monte-Carlo experiments on top of the signal model and the
// sequential detectors. Trial i under stream class b reads the statistic
// stream keyed by (experiment_id, b, i): b = 0 pure H0, b = 1 pure H1,
// b = 2 stream with a change. Results never depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mmeqd/distributions.hpp"
#include "mmeqd/quickest.hpp"
#include "mmeqd/signal_model.hpp"

namespace mmeqd {

enum class Algorithm { cusum, glr };

inline const char* to_string(Algorithm a) { return a == Algorithm::cusum ? "cusum" : "glr"; }

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "cusum" || s == "CUSUM") return Algorithm::cusum;
    if (s == "glr" || s == "GLR") return Algorithm::glr;
    throw config_error("unknown algorithm '" + s + "' (expected cusum or glr)");
}

inline constexpr const char* seed_scheme = "splitmix64-counter key=(experiment_id, stream_class, seed, block, hypothesis)";

enum class StreamClass : std::uint64_t { pure_h0 = 0, pure_h1 = 1, change = 2 };

inline StreamClass stream_class_for(std::optional<long> change_block) {
    if (!change_block) return StreamClass::pure_h0;
    return *change_block == 1 ? StreamClass::pure_h1 : StreamClass::change;
}

inline std::uint64_t trial_key(std::uint64_t experiment_id, StreamClass cls, std::uint64_t seed) {
    return derive_key({experiment_id, static_cast<std::uint64_t>(cls), seed});
}

inline StatisticStream make_stream(const ModelConfig& config, std::optional<long> change_block,
                                   std::uint64_t experiment_id, std::uint64_t seed) {
    return StatisticStream(config, change_block, trial_key(experiment_id, stream_class_for(change_block), seed));
}

// ---------------------------------------------------------------------------
// Detector plumbing

/// The llr side of a detector: a single density (CUSUM) or a bank (GLR).
/// Immutable once built and shared by all trials.
class LlrModel {
public:
    static LlrModel cusum(long n, double snr_db, std::optional<long> terms = std::nullopt,
                          const QuadratureSpec& spec = {}) {
        LlrModel m;
        m.algorithm_ = Algorithm::cusum;
        const DistParams params{n, db_to_linear(snr_db)};
        const SeriesTruncation trunc =
            terms ? SeriesTruncation{*terms, std::numeric_limits<double>::quiet_NaN()} : choose_truncation(params, spec);
        m.density_.emplace(params, trunc);
        m.snr_db_ = {snr_db};
        return m;
    }

    static LlrModel glr(long n, const DbGrid& grid, std::optional<long> terms = std::nullopt,
                        const QuadratureSpec& spec = {}) {
        LlrModel m;
        m.algorithm_ = Algorithm::glr;
        m.bank_.emplace(n, grid, spec, terms);
        m.snr_db_ = m.bank_->snr_db();
        return m;
    }

    Algorithm algorithm() const { return algorithm_; }
    std::size_t candidates() const { return snr_db_.size(); }
    const std::vector<double>& snr_db() const { return snr_db_; }
    const SeriesTruncation& truncation() const {
        return algorithm_ == Algorithm::cusum ? density_->truncation() : bank_->truncation();
    }
    const H1Density& cusum_density() const { return *density_; }

    void evaluate(double tau, std::vector<double>& out) const {
        if (algorithm_ == Algorithm::cusum) {
            out.assign(1, density_->llr(tau));
        } else {
            bank_->evaluate(tau, out);
        }
    }

private:
    Algorithm algorithm_ = Algorithm::cusum;
    std::optional<H1Density> density_;
    std::optional<LlrBank> bank_;
    std::vector<double> snr_db_;
};

struct StepInfo {
    long k = 0;
    double tau = 1.0;
    double g = 0.0;
    bool alarmed = false;
    std::optional<double> alpha_hat_db;
    std::optional<long> m_star;
};

/// One running detector (CUSUM or GLR) bound to a shared LlrModel.
class SequentialDetector {
public:
    SequentialDetector(const LlrModel& model, double h) : model_(&model), h_(h), glr_(model.candidates()) {
        check_threshold(h);
    }

    StepInfo step(double tau) {
        model_->evaluate(tau, llrs_);
        StepInfo info;
        info.tau = tau;
        if (model_->algorithm() == Algorithm::cusum) {
            cusum_ = cusum_step(cusum_, llrs_.front(), h_);
            info.k = cusum_.k;
            info.g = cusum_.g;
            info.alarmed = cusum_.alarmed_at.has_value();
        } else {
            glr_ = glr_step(std::move(glr_), llrs_, h_);
            info.k = glr_.k;
            info.g = glr_.g;
            info.alarmed = glr_.alarmed_at.has_value();
            info.alpha_hat_db = model_->snr_db()[glr_.best];
            info.m_star = glr_.m_star;
        }
        return info;
    }

    std::optional<long> alarmed_at() const {
        return model_->algorithm() == Algorithm::cusum ? cusum_.alarmed_at : glr_.alarmed_at;
    }

    double g() const { return model_->algorithm() == Algorithm::cusum ? cusum_.g : glr_.g; }

private:
    const LlrModel* model_;
    double h_;
    CusumState cusum_;
    GlrState glr_;
    std::vector<double> llrs_;
};

// ---------------------------------------------------------------------------
// Parallel map over seeds

/// fn(i) for i in [0, count) on up to `threads` workers. fn must write only
/// to its own slot; the first exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Trials

struct Scenario {
    ModelConfig config{};
    Algorithm algorithm = Algorithm::cusum;
    double h = 10.0;
    std::optional<long> change_block;  // nullopt: no change (pure H0)
    long max_blocks = 10'000;
    std::optional<DbGrid> glr_grid;
    std::uint64_t seed = 1;
    std::uint64_t experiment_id = 0;

    void validate() const {
        config.validate();
        check_threshold(h);
        if (max_blocks < 1) throw config_error("max_blocks must be >= 1");
        if (change_block && *change_block < 1) throw config_error("change block must be >= 1");
        if (algorithm == Algorithm::glr && glr_grid) glr_grid->validate();
    }
};

struct TrialRecord {
    std::uint64_t seed = 0;
    std::optional<long> change_block;
    std::optional<long> alarm_block;
    bool is_false_alarm = false;
    std::optional<long> detection_delay_blocks;
    long blocks_observed = 0;

    bool censored() const { return !alarm_block.has_value(); }
};

inline TrialRecord make_record(std::uint64_t seed, std::optional<long> change_block, std::optional<long> alarm,
                               long observed) {
    TrialRecord r;
    r.seed = seed;
    r.change_block = change_block;
    r.alarm_block = alarm;
    r.blocks_observed = observed;
    if (alarm) {
        r.is_false_alarm = !change_block || *alarm < *change_block;
        if (!r.is_false_alarm) r.detection_delay_blocks = *alarm - *change_block + 1;
    }
    return r;
}

inline TrialRecord run_trial(const Scenario& scenario, const LlrModel& model) {
    scenario.validate();
    if (model.algorithm() != scenario.algorithm) throw config_error("llr model does not match the scenario algorithm");
    StatisticStream stream = make_stream(scenario.config, scenario.change_block, scenario.experiment_id, scenario.seed);
    SequentialDetector detector(model, scenario.h);
    for (long k = 1; k <= scenario.max_blocks; ++k) {
        if (detector.step(stream.next().tau).alarmed) break;
    }
    return make_record(scenario.seed, scenario.change_block, detector.alarmed_at(), stream.blocks_consumed());
}

/// Builds the model the scenario needs; for repeated trials build it once.
inline LlrModel model_for(const Scenario& scenario, std::optional<long> terms = std::nullopt) {
    if (scenario.algorithm == Algorithm::cusum) {
        return LlrModel::cusum(scenario.config.samples_per_block, linear_to_db(scenario.config.snr), terms);
    }
    return LlrModel::glr(scenario.config.samples_per_block, scenario.glr_grid.value_or(DbGrid{}), terms);
}

inline TrialRecord run_trial(const Scenario& scenario) { return run_trial(scenario, model_for(scenario)); }

/// Runs the detector once with no threshold and reports, for each threshold
/// in `thresholds`, the first block at which g exceeded it (nullopt when not
/// reached within max_blocks). Equals run_trial at each threshold, because
/// the unalarmed recursion does not depend on h.
inline std::vector<std::optional<long>> first_crossings(const LlrModel& model, StatisticStream& stream,
                                                        const std::vector<double>& thresholds, long max_blocks) {
    for (double h : thresholds) check_threshold(h);
    std::vector<std::optional<long>> out(thresholds.size());
    if (thresholds.empty()) return out;
    const double h_max = *std::max_element(thresholds.begin(), thresholds.end());
    const double h_min = *std::min_element(thresholds.begin(), thresholds.end());
    SequentialDetector detector(model, infinite_threshold);
    std::size_t open = thresholds.size();
    for (long k = 1; k <= max_blocks && open > 0; ++k) {
        const StepInfo info = detector.step(stream.next().tau);
        if (info.g <= h_min) continue;
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            if (!out[i] && info.g > thresholds[i]) {
                out[i] = k;
                --open;
            }
        }
        if (info.g > h_max) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Estimates

enum class TauKind { detection, false_alarm };

struct TauEstimate {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    long censored = 0;
    long uncensored = 0;
    bool reportable = false;  // at least min_uncensored_for_report uncensored trials
};

inline constexpr long min_uncensored_for_report = 30;

inline TauEstimate estimate_tau(const std::vector<double>& uncensored_values, long censored) {
    if (uncensored_values.empty()) throw estimation_error("every trial is censored; no mean can be formed");
    TauEstimate e;
    e.censored = censored;
    e.uncensored = static_cast<long>(uncensored_values.size());
    double sum = 0.0;
    for (double v : uncensored_values) sum += v;
    e.mean = sum / static_cast<double>(e.uncensored);
    double ss = 0.0;
    for (double v : uncensored_values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = e.uncensored > 1 ? std::sqrt(ss / static_cast<double>(e.uncensored - 1) / e.uncensored) : 0.0;
    e.reportable = e.uncensored >= min_uncensored_for_report;
    return e;
}

/// Detection: mean delay over trials that detected after the change.
/// False alarm: mean alarm block over trials that alarmed before the change.
/// Censored trials are counted, never imputed.
inline TauEstimate estimate_tau(const std::vector<TrialRecord>& records, TauKind kind) {
    std::vector<double> values;
    long censored = 0;
    for (const auto& r : records) {
        if (kind == TauKind::detection) {
            if (r.detection_delay_blocks) {
                values.push_back(static_cast<double>(*r.detection_delay_blocks));
            } else {
                ++censored;
            }
        } else {
            if (r.alarm_block && r.is_false_alarm) {
                values.push_back(static_cast<double>(*r.alarm_block));
            } else {
                ++censored;
            }
        }
    }
    return estimate_tau(values, censored);
}

/// Mean CUSUM detection delay (change at block 1) for several thresholds
/// from one unthresholded run per seed.
inline std::vector<TauEstimate> estimate_td_curve(const LlrModel& model, const ModelConfig& config,
                                                  const std::vector<double>& thresholds, long seeds, long max_blocks,
                                                  std::uint64_t experiment_id = 0, unsigned threads = 0) {
    std::vector<std::vector<std::optional<long>>> runs(static_cast<std::size_t>(seeds));
    parallel_for(runs.size(), threads, [&](std::size_t i) {
        StatisticStream stream = make_stream(config, 1L, experiment_id, i + 1);
        runs[i] = first_crossings(model, stream, thresholds, max_blocks);
    });
    std::vector<TauEstimate> out;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        std::vector<double> values;
        long censored = 0;
        for (const auto& run : runs) {
            if (run[t]) {
                values.push_back(static_cast<double>(*run[t]));
            } else {
                ++censored;
            }
        }
        out.push_back(estimate_tau(values, censored));
    }
    return out;
}

/// Mean time to false alarm of the CUSUM by the renewal identity
///   tau_fa(h) = E_0[L_h] / P_0(cycle ends above h),
/// where a cycle runs the llr random walk from 0 until it drops to <= 0 or
/// exceeds h, and L_h is its length. E_0[L_h] is a plain average over H0
/// cycles. The alarm probability is estimated under H1 cycles weighted by
/// the path likelihood ratio exp(-S_T): the exponential tilt of f0 by the
/// llr with exponent one is f1, so H1 data gives an unbiased estimate with
/// bounded weights (S_T > h). Standard errors use the delta method.
struct RenewalEstimate {
    double h = 0.0;
    double mean_cycle_length = 0.0;
    double alarm_probability = 0.0;
    double tau_fa = 0.0;
    double std_error = 0.0;
    long h0_cycles = 0;
    long h1_cycles = 0;
    long h1_crossings = 0;
};

struct RenewalSettings {
    long seeds = 1000;
    long h0_cycles_per_seed = 20;
    long h1_cycles_per_seed = 1;
    long max_cycle_blocks = 1'000'000;
    std::uint64_t experiment_id = 0;
    unsigned threads = 0;
};

namespace detail {

struct CycleTally {
    std::vector<double> length_sum;
    std::vector<double> length_sq_sum;
    std::vector<double> weight_sum;
    std::vector<double> weight_sq_sum;
    std::vector<long> crossings;
    long cycles = 0;
};

} // namespace detail

inline std::vector<RenewalEstimate> estimate_tfa_renewal(const H1Density& density, const ModelConfig& config,
                                                         std::vector<double> thresholds,
                                                         const RenewalSettings& settings = {}) {
    if (thresholds.empty()) throw config_error("at least one threshold is required");
    for (double h : thresholds) check_threshold(h);
    if (settings.seeds < 1 || settings.h0_cycles_per_seed < 1 || settings.h1_cycles_per_seed < 1) {
        throw config_error("renewal estimator needs at least one seed and one cycle per seed");
    }
    const std::size_t nh = thresholds.size();
    const double h_max = *std::max_element(thresholds.begin(), thresholds.end());
    const auto seeds = static_cast<std::size_t>(settings.seeds);

    auto fresh = [nh] {
        detail::CycleTally t;
        t.length_sum.assign(nh, 0.0);
        t.length_sq_sum.assign(nh, 0.0);
        t.weight_sum.assign(nh, 0.0);
        t.weight_sq_sum.assign(nh, 0.0);
        t.crossings.assign(nh, 0);
        return t;
    };
    std::vector<detail::CycleTally> h0(seeds, fresh());
    std::vector<detail::CycleTally> h1(seeds, fresh());

    // One walk serves every threshold: record the first passage of each h.
    auto run_cycle = [&](StatisticStream& stream, std::vector<long>& pass_block, std::vector<double>& pass_sum) {
        std::fill(pass_block.begin(), pass_block.end(), 0L);
        double s = 0.0;
        for (long k = 1; k <= settings.max_cycle_blocks; ++k) {
            s += density.llr(stream.next().tau);
            if (s <= 0.0) return k;
            for (std::size_t i = 0; i < nh; ++i) {
                if (pass_block[i] == 0 && s > thresholds[i]) {
                    pass_block[i] = k;
                    pass_sum[i] = s;
                }
            }
            if (s > h_max) return k;
        }
        throw estimation_error("renewal cycle exceeded max_cycle_blocks");
    };

    parallel_for(seeds, settings.threads, [&](std::size_t i) {
        std::vector<long> pass(nh);
        std::vector<double> sums(nh);
        StatisticStream s0 = make_stream(config, std::nullopt, settings.experiment_id, i + 1);
        for (long c = 0; c < settings.h0_cycles_per_seed; ++c) {
            const long end = run_cycle(s0, pass, sums);
            for (std::size_t t = 0; t < nh; ++t) {
                const double len = static_cast<double>(pass[t] ? pass[t] : end);
                h0[i].length_sum[t] += len;
                h0[i].length_sq_sum[t] += len * len;
            }
            ++h0[i].cycles;
        }
        StatisticStream s1 = make_stream(config, 1L, settings.experiment_id, i + 1);
        for (long c = 0; c < settings.h1_cycles_per_seed; ++c) {
            run_cycle(s1, pass, sums);
            for (std::size_t t = 0; t < nh; ++t) {
                if (!pass[t]) continue;
                const double w = std::exp(-sums[t]);
                h1[i].weight_sum[t] += w;
                h1[i].weight_sq_sum[t] += w * w;
                h1[i].crossings[t] += 1;
            }
            ++h1[i].cycles;
        }
    });

    std::vector<RenewalEstimate> out(nh);
    for (std::size_t t = 0; t < nh; ++t) {
        double l_sum = 0.0, l_sq = 0.0, w_sum = 0.0, w_sq = 0.0;
        long n0 = 0, n1 = 0, crossings = 0;
        for (std::size_t i = 0; i < seeds; ++i) {
            l_sum += h0[i].length_sum[t];
            l_sq += h0[i].length_sq_sum[t];
            n0 += h0[i].cycles;
            w_sum += h1[i].weight_sum[t];
            w_sq += h1[i].weight_sq_sum[t];
            n1 += h1[i].cycles;
            crossings += h1[i].crossings[t];
        }
        RenewalEstimate& e = out[t];
        e.h = thresholds[t];
        e.h0_cycles = n0;
        e.h1_cycles = n1;
        e.h1_crossings = crossings;
        if (crossings == 0) throw estimation_error("no H1 cycle crossed h=" + std::to_string(thresholds[t]));
        const double d0 = static_cast<double>(n0);
        const double d1 = static_cast<double>(n1);
        e.mean_cycle_length = l_sum / d0;
        e.alarm_probability = w_sum / d1;
        e.tau_fa = e.mean_cycle_length / e.alarm_probability;
        const double var_l = std::max(0.0, (l_sq - d0 * e.mean_cycle_length * e.mean_cycle_length) / (d0 - 1.0)) / d0;
        const double var_p =
            std::max(0.0, (w_sq - d1 * e.alarm_probability * e.alarm_probability) / std::max(1.0, d1 - 1.0)) / d1;
        const double p2 = e.alarm_probability * e.alarm_probability;
        e.std_error = std::sqrt(var_l / p2 + e.mean_cycle_length * e.mean_cycle_length * var_p / (p2 * p2));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run-time performance (pure-H0 and pure-H1 instance pairs)

struct CurvePoint {
    long horizon_samples = 0;
    double snr_db = 0.0;
    double p_fa = 0.0;
    double p_d = 0.0;
    long n_seeds = 0;
    double h = 0.0;
};

struct CurveSettings {
    long seeds = 200;
    std::uint64_t experiment_id = 0;
    unsigned threads = 0;
    std::optional<long> terms;
    DbGrid glr_grid{-25.0, -5.0, 0.1};
    QuadratureSpec quadrature{};
};

namespace detail {

inline std::vector<std::optional<long>> alarm_blocks(const LlrModel& model, const ModelConfig& config,
                                                     std::optional<long> change_block, double h, long max_blocks,
                                                     const CurveSettings& settings) {
    std::vector<std::optional<long>> out(static_cast<std::size_t>(settings.seeds));
    parallel_for(out.size(), settings.threads, [&](std::size_t i) {
        Scenario sc;
        sc.config = config;
        sc.algorithm = model.algorithm();
        sc.h = h;
        sc.change_block = change_block;
        sc.max_blocks = max_blocks;
        sc.seed = i + 1;
        sc.experiment_id = settings.experiment_id;
        out[i] = run_trial(sc, model).alarm_block;
    });
    return out;
}

inline double fraction_by(const std::vector<std::optional<long>>& alarms, long blocks) {
    if (alarms.empty()) return 0.0;
    long count = 0;
    for (const auto& a : alarms) count += (a && *a <= blocks) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(alarms.size());
}

} // namespace detail

/// p_fa / p_d versus run-time for each SNR. Horizons are sample counts and
/// must be multiples of N. For the GLR the pure-H0 runs do not depend on the
/// SNR and are computed once.
inline std::vector<CurvePoint> performance_curves(Algorithm algorithm, long n, const std::vector<double>& snr_db,
                                                  double h, std::vector<long> horizons,
                                                  const CurveSettings& settings = {}) {
    check_threshold(h);
    if (settings.seeds < 1) throw config_error("seeds must be >= 1");
    if (snr_db.empty()) throw config_error("at least one SNR is required");
    if (horizons.empty()) throw config_error("at least one horizon is required");
    for (long hz : horizons) {
        if (hz < 0 || hz % n != 0) throw config_error("horizons must be nonnegative multiples of N");
    }
    std::sort(horizons.begin(), horizons.end());
    const long max_blocks = std::max(1L, horizons.back() / n);

    ModelConfig base;
    base.samples_per_block = n;

    std::optional<LlrModel> glr_model;
    std::vector<std::optional<long>> glr_h0;
    if (algorithm == Algorithm::glr) {
        glr_model = LlrModel::glr(n, settings.glr_grid, settings.terms, settings.quadrature);
        glr_h0 = detail::alarm_blocks(*glr_model, base, std::nullopt, h, max_blocks, settings);
    }

    std::vector<CurvePoint> out;
    std::vector<double> sorted_snr = snr_db;
    std::sort(sorted_snr.begin(), sorted_snr.end());
    for (double db : sorted_snr) {
        ModelConfig config = base;
        config.snr = db_to_linear(db);
        std::vector<std::optional<long>> h0_alarms;
        std::vector<std::optional<long>> h1_alarms;
        if (algorithm == Algorithm::glr) {
            h0_alarms = glr_h0;
            h1_alarms = detail::alarm_blocks(*glr_model, config, 1L, h, max_blocks, settings);
        } else {
            const LlrModel model = LlrModel::cusum(n, db, settings.terms, settings.quadrature);
            h0_alarms = detail::alarm_blocks(model, config, std::nullopt, h, max_blocks, settings);
            h1_alarms = detail::alarm_blocks(model, config, 1L, h, max_blocks, settings);
        }
        for (long hz : horizons) {
            const long blocks = hz / n;
            out.push_back({hz, db, detail::fraction_by(h0_alarms, blocks), detail::fraction_by(h1_alarms, blocks),
                           settings.seeds, h});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Traces

struct TraceRow {
    long k = 0;
    double tau = 1.0;
    double g = 0.0;
    bool alarmed = false;
    std::optional<double> alpha_hat_db;
    std::optional<long> m_star;
};

struct TracePair {
    std::vector<TraceRow> cusum;
    std::vector<TraceRow> glr;
};

inline TraceRow to_trace_row(const StepInfo& s) { return {s.k, s.tau, s.g, s.alarmed, s.alpha_hat_db, s.m_star}; }

/// CUSUM (at the true SNR) and GLR over the same statistic stream. Each
/// trace stops at its own alarm (inclusive) or at max_blocks.
inline TracePair trace_pair(const LlrModel& cusum_model, const LlrModel& glr_model, const ModelConfig& config,
                            std::optional<long> change_block, double h, long max_blocks, std::uint64_t seed,
                            std::uint64_t experiment_id = 0) {
    if (cusum_model.algorithm() != Algorithm::cusum || glr_model.algorithm() != Algorithm::glr) {
        throw config_error("trace_pair needs a CUSUM model and a GLR model");
    }
    if (max_blocks < 1) throw config_error("max_blocks must be >= 1");
    StatisticStream stream = make_stream(config, change_block, experiment_id, seed);
    SequentialDetector cusum(cusum_model, h);
    SequentialDetector glr(glr_model, h);
    TracePair out;
    bool cusum_done = false;
    bool glr_done = false;
    for (long k = 1; k <= max_blocks && !(cusum_done && glr_done); ++k) {
        const double tau = stream.next().tau;
        if (!cusum_done) {
            out.cusum.push_back(to_trace_row(cusum.step(tau)));
            cusum_done = out.cusum.back().alarmed;
        }
        if (!glr_done) {
            out.glr.push_back(to_trace_row(glr.step(tau)));
            glr_done = out.glr.back().alarmed;
        }
    }
    return out;
}

/// Single-detector trace.
inline std::vector<TraceRow> trace(const LlrModel& model, const ModelConfig& config, std::optional<long> change_block,
                                   double h, long max_blocks, std::uint64_t seed, std::uint64_t experiment_id = 0) {
    if (max_blocks < 1) throw config_error("max_blocks must be >= 1");
    StatisticStream stream = make_stream(config, change_block, experiment_id, seed);
    SequentialDetector detector(model, h);
    std::vector<TraceRow> out;
    for (long k = 1; k <= max_blocks; ++k) {
        out.push_back(to_trace_row(detector.step(stream.next().tau)));
        if (out.back().alarmed) break;
    }
    return out;
}

} // namespace mmeqd

#endif // MMEQD_HARNESS_HPP
