#ifndef MMEQD_CLI_HPP
#define MMEQD_CLI_HPP

// Command-line front end. Needs CLI11.hpp and json.hpp on the include path.
// run_cli() is the whole program minus process plumbing so it can be driven
// in-process by tests.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mmeqd/block_detector.hpp"
#include "mmeqd/distributions.hpp"
#include "mmeqd/harness.hpp"
#include "mmeqd/quickest.hpp"
#include "mmeqd/version.hpp"

namespace mmeqd::cli {

// ---------------------------------------------------------------------------
// Formatting

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

template <class T>
std::string fmt_opt(const std::optional<T>& v) {
    return v ? fmt(*v) : std::string{};
}

/// Ordered key/value record rendered both as the '#' header line of every
/// CSV and as the JSON sidecar.
class Metadata {
public:
    template <class T>
    Metadata& add(const std::string& key, const T& value) {
        if constexpr (std::is_same_v<T, std::string> || std::is_convertible_v<T, const char*>) {
            items_.emplace_back(key, std::string(value));
            json_[key] = std::string(value);
        } else if constexpr (std::is_same_v<T, bool>) {
            items_.emplace_back(key, value ? "true" : "false");
            json_[key] = value;
        } else if constexpr (std::is_integral_v<T>) {
            items_.emplace_back(key, std::to_string(value));
            json_[key] = value;
        } else {
            items_.emplace_back(key, fmt(static_cast<double>(value)));
            if (std::isfinite(static_cast<double>(value))) {
                json_[key] = static_cast<double>(value);
            } else {
                json_[key] = fmt(static_cast<double>(value));
            }
        }
        return *this;
    }

    Metadata& add_json(const std::string& key, nlohmann::ordered_json value) {
        json_[key] = std::move(value);
        return *this;
    }

    std::string header_line() const {
        std::string line = "#";
        for (const auto& [k, v] : items_) {
            line += ' ';
            line += k;
            line += '=';
            if (v.find_first_of(" ,") != std::string::npos) {
                line += '"' + v + '"';
            } else {
                line += v;
            }
        }
        return line;
    }

    const nlohmann::ordered_json& json() const { return json_; }

private:
    std::vector<std::pair<std::string, std::string>> items_;
    nlohmann::ordered_json json_ = nlohmann::ordered_json::object();
};

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<std::string> cells) {
        if (cells.size() != columns_.size()) throw config_error("internal: row width does not match the header");
        rows_.push_back(std::move(cells));
    }

    std::size_t rows() const { return rows_.size(); }

    void write(std::ostream& os, const Metadata& meta) const {
        os << meta.header_line() << '\n';
        write_row(os, columns_);
        for (const auto& r : rows_) write_row(os, r);
    }

private:
    static void write_row(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// Argument parsing helpers

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw config_error(what + ": '" + s + "' is not a number");
    }
    if (used != s.size()) throw config_error(what + ": '" + s + "' is not a number");
    return v;
}

struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::size_t count() const { return static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1; }

    std::vector<double> values() const {
        std::vector<double> out;
        const std::size_t n = count();
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
        }
        return out;
    }

    std::string to_string() const { return fmt(start) + ":" + fmt(stop) + ":" + fmt(step); }
};

inline Range parse_range(const std::string& s, const std::string& what) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw config_error(what + ": expected START:STOP:STEP, got '" + s + "'");
    Range r{parse_double(parts[0], what), parse_double(parts[1], what), parse_double(parts[2], what)};
    if (!std::isfinite(r.start) || !std::isfinite(r.stop) || !(r.step > 0.0) || r.stop < r.start) {
        throw config_error(what + ": need START <= STOP and STEP > 0");
    }
    return r;
}

/// "a,b,c" or "START:STOP:STEP".
inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
    if (s.find(':') != std::string::npos) return parse_range(s, what).values();
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ',');) {
        if (!p.empty()) out.push_back(parse_double(p, what));
    }
    if (out.empty()) throw config_error(what + ": empty list");
    return out;
}

inline DbGrid parse_db_grid(const std::string& s) {
    const Range r = parse_range(s, "--grid-db");
    DbGrid g{r.start, r.stop, r.step};
    g.validate();
    return g;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline const std::set<std::string>& boolean_flags() {
    static const std::set<std::string> flags{"full-scale"};
    return flags;
}

/// Removes --config PATH from args and appends every key = value pair of
/// the file whose flag is not already given explicitly.
inline std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw config_error("--config needs a file path");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (!path) return args;

    std::ifstream in(*path);
    if (!in) throw io_error("cannot read config file '" + *path + "'");
    const auto given = [&args](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        std::replace(key.begin(), key.end(), '_', '-');
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw config_error("config line " + std::to_string(line_no) + ": empty key");
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (boolean_flags().count(key)) {
            if (value == "true" || value == "1" || value == "yes") args.push_back(flag);
            continue;
        }
        args.push_back(flag + "=" + value);
    }
    return args;
}

// ---------------------------------------------------------------------------
// Flags

struct Flags {
    long n = 500;
    std::string snr_db;
    std::uint64_t seed = 1;
    std::string out;
    std::string meta;
    long seeds = 200;
    bool full_scale = false;
    std::string threshold;
    std::string grid_db;
    std::string horizon;
    long max_blocks = 10'000;
    long table1_override = 0;
    unsigned threads = 0;

    std::string tau_grid = "1:3:0.001";
    int pfa_points = 20;
    double pfa_min = 1e-4;
    double pfa = 0.0147;
    std::string algorithm = "cusum";
    long change_block = 0;
    int delta_points = 200;
    double bin_width = 1e-3;
    double tail_mass_tol = 1e-8;
    std::string dump_blocks;
};

inline std::optional<long> terms_override(const Flags& f) {
    if (f.table1_override == 0) return std::nullopt;
    if (f.table1_override < 1) throw config_error("--table1-override must be a positive term count");
    return f.table1_override;
}

inline QuadratureSpec quadrature(const Flags& f) {
    QuadratureSpec q;
    q.bin_width = f.bin_width;
    q.tail_mass_tol = f.tail_mass_tol;
    q.validate();
    return q;
}

inline void check_common(const Flags& f) {
    if (f.n < 2) throw config_error("--n must be >= 2");
    if (f.seeds < 1) throw config_error("--seeds must be >= 1");
    if (f.max_blocks < 1) throw config_error("--max-blocks must be >= 1");
}

inline void describe_common(Metadata& m, const std::string& command, const Flags& f) {
    m.add("version", std::string(version)).add("command", command).add("n", f.n);
}

inline void describe_quadrature(Metadata& m, const QuadratureSpec& q) {
    m.add("bin_width", q.bin_width).add("tail_mass_tol", q.tail_mass_tol);
}

inline void describe_seeds(Metadata& m, const Flags& f, long seeds) {
    m.add("experiment_seed", f.seed).add("seeds", seeds).add("generator", std::string(CounterRng::algorithm));
    m.add("seed_scheme", std::string(seed_scheme));
}

inline SeriesTruncation truncation_for(const DistParams& p, const Flags& f, const QuadratureSpec& q) {
    if (const auto t = terms_override(f)) return {*t, normalization_deviation(p, *t, q)};
    return choose_truncation(p, q);
}

inline long effective_seeds(const Flags& f, bool seeds_given) {
    if (f.full_scale && !seeds_given) return 1000;
    return f.seeds;
}

// ---------------------------------------------------------------------------
// Commands. Each returns the table and fills the metadata.

inline Table cmd_pdf(const Flags& f, Metadata& m) {
    check_common(f);
    const QuadratureSpec q = quadrature(f);
    const Range grid = parse_range(f.tau_grid, "--tau-grid");
    if (grid.start < 1.0) throw config_error("--tau-grid must start at tau >= 1");
    std::optional<H1Density> f1;
    describe_common(m, "pdf", f);
    m.add("tau_grid", grid.to_string());
    if (!f.snr_db.empty()) {
        const double db = parse_double(f.snr_db, "--snr-db");
        const DistParams p{f.n, db_to_linear(db)};
        const SeriesTruncation t = truncation_for(p, f, q);
        f1.emplace(p, t);
        m.add("snr_db", db).add("series_terms", t.terms).add("f1_normalization_deviation", t.achieved_integral_deviation);
    }
    describe_quadrature(m, q);

    Table table(f1 ? std::vector<std::string>{"tau", "f0", "f1"} : std::vector<std::string>{"tau", "f0"});
    for (double tau : grid.values()) {
        std::vector<std::string> row{fmt(tau), fmt(pdf_h0(tau, f.n))};
        if (f1) row.push_back(fmt(f1->pdf(tau)));
        table.add(std::move(row));
    }
    return table;
}

inline Table cmd_roc(const Flags& f, Metadata& m) {
    check_common(f);
    const QuadratureSpec q = quadrature(f);
    std::vector<double> snrs = parse_list(f.snr_db.empty() ? "-20,-15,-10,-5" : f.snr_db, "--snr-db");
    std::sort(snrs.begin(), snrs.end());
    const std::vector<double> grid = log_pfa_grid(f.pfa_points, f.pfa_min);
    describe_common(m, "roc", f);
    m.add("pfa_points", static_cast<long>(f.pfa_points)).add("pfa_min", f.pfa_min);
    describe_quadrature(m, q);

    Table table({"h", "pfa", "pd", "snr_db", "n"});
    nlohmann::ordered_json terms = nlohmann::ordered_json::object();
    for (double db : snrs) {
        const DistParams p{f.n, db_to_linear(db)};
        const SeriesTruncation t = truncation_for(p, f, q);
        terms[fmt(db)] = t.terms;
        const BlockDetector det(p, t, q);
        for (const RocPoint& pt : det.roc_from_pfa(grid)) {
            table.add({fmt(pt.h), fmt(pt.p_fa), fmt(pt.p_d), fmt(db), fmt(f.n)});
        }
    }
    m.add("snr_db", f.snr_db.empty() ? std::string("-20,-15,-10,-5") : f.snr_db);
    m.add_json("series_terms", terms);
    return table;
}

inline Table cmd_bounds(const Flags& f, Metadata& m) {
    check_common(f);
    const QuadratureSpec q = quadrature(f);
    const double db = parse_double(f.snr_db.empty() ? "-15" : f.snr_db, "--snr-db");
    const std::vector<double> hs = parse_list(f.threshold.empty() ? "5:60:5" : f.threshold, "--threshold");
    const DistParams p{f.n, db_to_linear(db)};
    const SeriesTruncation t = truncation_for(p, f, q);
    BoundSettings bs;
    bs.quadrature = q;
    bs.delta_points = f.delta_points;
    const BoundCalculator calc(H1Density(p, t), bs);

    describe_common(m, "bounds", f);
    m.add("snr_db", db).add("series_terms", t.terms).add("phi", -1.0);
    m.add("e_l_f0", calc.expectation(Hypothesis::h0)).add("e_l_f1", calc.expectation(Hypothesis::h1));
    m.add("gamma_f0", calc.gamma(Hypothesis::h0)).add("gamma_f1", calc.gamma(Hypothesis::h1));
    m.add("delta_points", static_cast<long>(bs.delta_points)).add("delta_min_ratio", bs.delta_min_ratio);
    m.add("vanishing_probability", bs.vanishing_probability);
    describe_quadrature(m, q);
    m.add("timescale", std::string("blocks"));

    Table table({"h", "td_upper_blocks", "tfa_lower_blocks", "tfa_simple_blocks", "n", "snr_db"});
    for (double h : hs) {
        const QdBounds b = calc.bounds(h);
        table.add({fmt(h), fmt(b.tau_d_upper), fmt(b.tau_fa_lower), fmt(b.tau_fa_simple), fmt(f.n), fmt(db)});
    }
    return table;
}

inline Table cmd_design(const Flags& f, Metadata& m) {
    check_common(f);
    const QuadratureSpec q = quadrature(f);
    describe_common(m, "design", f);
    m.add("target_pfa", f.pfa);
    describe_quadrature(m, q);
    Table table({"n", "target_pfa", "h", "achieved_pfa", "snr_db", "pd"});
    if (f.snr_db.empty()) {
        const BlockDetector det(f.n, q);
        const double h = det.design_threshold(f.pfa);
        table.add({fmt(f.n), fmt(f.pfa), fmt(h), fmt(det.pfa(h)), "", ""});
        return table;
    }
    std::vector<double> snrs = parse_list(f.snr_db, "--snr-db");
    std::sort(snrs.begin(), snrs.end());
    const BlockDetector h0_only(f.n, q);
    const double h = h0_only.design_threshold(f.pfa);
    nlohmann::ordered_json terms = nlohmann::ordered_json::object();
    for (double db : snrs) {
        const DistParams p{f.n, db_to_linear(db)};
        const SeriesTruncation t = truncation_for(p, f, q);
        terms[fmt(db)] = t.terms;
        const BlockDetector det(p, t, q);
        table.add({fmt(f.n), fmt(f.pfa), fmt(h), fmt(det.pfa(h)), fmt(db), fmt(det.pd(h))});
    }
    m.add_json("series_terms", terms);
    return table;
}

inline DbGrid grid_or(const Flags& f, const DbGrid& fallback) {
    return f.grid_db.empty() ? fallback : parse_db_grid(f.grid_db);
}

inline LlrModel build_model(Algorithm a, const Flags& f, double snr_db, const DbGrid& grid, const QuadratureSpec& q) {
    return a == Algorithm::cusum ? LlrModel::cusum(f.n, snr_db, terms_override(f), q)
                                 : LlrModel::glr(f.n, grid, terms_override(f), q);
}

inline void describe_detector(Metadata& m, const LlrModel& model, const DbGrid& grid) {
    m.add("algorithm", std::string(to_string(model.algorithm())));
    m.add("series_terms", model.truncation().terms);
    if (model.algorithm() == Algorithm::glr) {
        m.add("grid_db", grid.to_string()).add("grid_points", static_cast<long>(grid.size()));
        m.add("tie_break", std::string("smaller snr then larger m"));
    }
}

inline Table cmd_simulate(const Flags& f, bool seeds_given, Metadata& m) {
    check_common(f);
    const QuadratureSpec q = quadrature(f);
    const Algorithm a = parse_algorithm(f.algorithm);
    const double db = parse_double(f.snr_db.empty() ? "-15" : f.snr_db, "--snr-db");
    const double h = parse_double(f.threshold.empty() ? "10" : f.threshold, "--threshold");
    check_threshold(h);
    const long seeds = effective_seeds(f, seeds_given);
    const DbGrid grid = grid_or(f, DbGrid{-20.0, -5.0, 0.1});
    const LlrModel model = build_model(a, f, db, grid, q);
    ModelConfig config;
    config.samples_per_block = f.n;
    config.snr = db_to_linear(db);

    describe_common(m, "simulate", f);
    m.add("snr_db", db).add("h", h).add("max_blocks", f.max_blocks).add("psk_order", static_cast<long>(config.psk_order));
    describe_detector(m, model, grid);
    describe_seeds(m, f, seeds);

    std::vector<std::optional<long>> changes;
    if (f.change_block > 0) {
        changes.push_back(f.change_block);
        m.add("change_block", f.change_block);
    } else {
        changes = {std::nullopt, 1L};
        m.add("protocol", std::string("pure-H0 and pure-H1 instance per seed"));
    }

    Table table({"algorithm", "n", "snr_db", "h", "seed", "hypothesis", "alarm_block", "censored"});
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    std::vector<std::vector<TrialRecord>> all(changes.size(), std::vector<TrialRecord>(static_cast<std::size_t>(seeds)));
    for (std::size_t c = 0; c < changes.size(); ++c) {
        parallel_for(static_cast<std::size_t>(seeds), f.threads, [&](std::size_t i) {
            Scenario sc;
            sc.config = config;
            sc.algorithm = a;
            sc.h = h;
            sc.change_block = changes[c];
            sc.max_blocks = f.max_blocks;
            sc.glr_grid = grid;
            sc.seed = i + 1;
            sc.experiment_id = f.seed;
            all[c][i] = run_trial(sc, model);
        });
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(seeds); ++i) {
        for (std::size_t c = 0; c < changes.size(); ++c) {
            const TrialRecord& r = all[c][i];
            const std::string hyp = !changes[c] ? "H0" : (*changes[c] == 1 ? "H1" : "change@" + fmt(*changes[c]));
            table.add({to_string(a), fmt(f.n), fmt(db), fmt(h), fmt(r.seed), hyp, fmt_opt(r.alarm_block),
                       r.censored() ? "1" : "0"});
        }
    }
    for (std::size_t c = 0; c < changes.size(); ++c) {
        const TauKind kind = changes[c] ? TauKind::detection : TauKind::false_alarm;
        const char* name = kind == TauKind::detection ? "tau_d_blocks" : "tau_fa_blocks";
        try {
            const TauEstimate e = estimate_tau(all[c], kind);
            summary[name] = {{"mean", e.mean},
                             {"std_error", e.std_error},
                             {"uncensored", e.uncensored},
                             {"censored", e.censored},
                             {"reportable", e.reportable}};
        } catch (const estimation_error&) {
            summary[name] = nullptr;
        }
    }
    m.add_json("estimates", summary);
    return table;
}

inline std::vector<long> parse_horizons(const Flags& f, long default_blocks) {
    std::vector<long> out;
    if (f.horizon.empty()) {
        for (long k = 1; k <= default_blocks; ++k) out.push_back(k * f.n);
        return out;
    }
    for (double v : parse_list(f.horizon, "--horizon")) {
        if (!(v >= 0.0) || v != std::floor(v)) throw config_error("--horizon values must be nonnegative integers");
        out.push_back(static_cast<long>(v));
    }
    return out;
}

inline Table cmd_curves(const Flags& f, bool seeds_given, bool algorithm_given, bool n_given, bool max_blocks_given,
                        Metadata& m) {
    Flags g = f;
    if (!n_given) g.n = 10'000;
    if (!algorithm_given) g.algorithm = "glr";
    if (!max_blocks_given) g.max_blocks = 20;
    check_common(g);
    const Algorithm a = parse_algorithm(g.algorithm);
    std::vector<double> snrs = parse_list(g.snr_db.empty() ? "-20,-15,-10,-5" : g.snr_db, "--snr-db");
    const double h = parse_double(g.threshold.empty() ? "4.5" : g.threshold, "--threshold");
    check_threshold(h);
    CurveSettings cs;
    cs.seeds = effective_seeds(g, seeds_given);
    cs.experiment_id = g.seed;
    cs.threads = g.threads;
    cs.terms = terms_override(g);
    cs.quadrature = quadrature(g);
    cs.glr_grid = grid_or(g, DbGrid{-25.0, -5.0, 0.1});
    const std::vector<long> horizons = parse_horizons(g, g.max_blocks);

    describe_common(m, "curves", g);
    m.add("algorithm", std::string(to_string(a))).add("h", h);
    m.add("snr_db", g.snr_db.empty() ? std::string("-20,-15,-10,-5") : g.snr_db);
    if (a == Algorithm::glr) m.add("grid_db", cs.glr_grid.to_string());
    m.add("protocol", std::string("pure-H0 and pure-H1 instance per seed"));
    describe_seeds(m, g, cs.seeds);

    Table table({"horizon_samples", "snr_db", "p_fa", "p_d", "n_seeds", "h"});
    for (const CurvePoint& c : performance_curves(a, g.n, snrs, h, horizons, cs)) {
        table.add({fmt(c.horizon_samples), fmt(c.snr_db), fmt(c.p_fa), fmt(c.p_d), fmt(c.n_seeds), fmt(c.h)});
    }
    return table;
}

inline Table cmd_trace(const Flags& f, bool algorithm_given, bool max_blocks_given, Metadata& m) {
    Flags g = f;
    if (!algorithm_given) g.algorithm = "glr";
    if (!max_blocks_given) g.max_blocks = 200;
    check_common(g);
    const QuadratureSpec q = quadrature(g);
    const Algorithm a = parse_algorithm(g.algorithm);
    const double db = parse_double(g.snr_db.empty() ? "-15" : g.snr_db, "--snr-db");
    const double h = g.threshold.empty() ? infinite_threshold : parse_double(g.threshold, "--threshold");
    check_threshold(h);
    const DbGrid grid = grid_or(g, DbGrid{-20.0, -5.0, 0.1});
    const LlrModel model = build_model(a, g, db, grid, q);
    ModelConfig config;
    config.samples_per_block = g.n;
    config.snr = db_to_linear(db);
    const std::optional<long> change = g.change_block > 0 ? std::optional<long>(g.change_block) : std::optional<long>(1L);

    describe_common(m, "trace", g);
    m.add("snr_db", db).add("h", h).add("change_block", *change).add("max_blocks", g.max_blocks);
    describe_detector(m, model, grid);
    describe_seeds(m, g, 1L);

    Table table({"k", "tau", "g", "alarmed", "alpha_hat_db", "m_star"});
    const auto rows = trace(model, config, change, h, g.max_blocks, 1, g.seed);
    for (const TraceRow& r : rows) {
        table.add({fmt(r.k), fmt(r.tau), fmt(r.g), r.alarmed ? "1" : "0", fmt_opt(r.alpha_hat_db), fmt_opt(r.m_star)});
    }
    if (!g.dump_blocks.empty()) {
        std::ofstream dump(g.dump_blocks);
        if (!dump) throw io_error("cannot write '" + g.dump_blocks + "'");
        const StatisticStream stream = make_stream(config, change, g.seed, 1);
        dump << "block,row,col,re,im\n";
        for (const TraceRow& r : rows) {
            std::ostringstream one;
            write_block_csv(one, stream.block_at(r.k));
            const std::string s = one.str();
            dump << s.substr(s.find('\n') + 1);
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Entry point

inline void write_output(const Table& table, const Metadata& meta, const Flags& f, std::ostream& out) {
    if (f.out.empty() || f.out == "-") {
        table.write(out, meta);
    } else {
        std::ofstream file(f.out, std::ios::binary);
        if (!file) throw io_error("cannot write '" + f.out + "'");
        table.write(file, meta);
        if (!file) throw io_error("write to '" + f.out + "' failed");
    }
    std::string meta_path = f.meta;
    if (meta_path.empty() && !f.out.empty() && f.out != "-") meta_path = f.out + ".meta.json";
    if (!meta_path.empty()) {
        std::ofstream side(meta_path, std::ios::binary);
        if (!side) throw io_error("cannot write '" + meta_path + "'");
        side << meta.json().dump(2) << '\n';
    }
}

inline std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return trim(s);
}

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    Flags f;
    CLI::App app{"Eigenvalue-ratio spectrum sensing: densities, block detector, CUSUM/GLR quickest detection"};
    app.name("mmeqd");
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(version));

    struct Handles {
        CLI::Option* seeds = nullptr;
        CLI::Option* algorithm = nullptr;
        CLI::Option* n = nullptr;
        CLI::Option* max_blocks = nullptr;
    };
    std::map<std::string, Handles> handles;

    const auto common = [&](CLI::App* sub, bool with_snr = true) {
        Handles hd;
        hd.n = sub->add_option("--n", f.n, "Samples per block N");
        if (with_snr) sub->add_option("--snr-db", f.snr_db, "SNR in dB (list: a,b,c or START:STOP:STEP)");
        sub->add_option("--out", f.out, "Output CSV path (default stdout)");
        sub->add_option("--meta", f.meta, "Metadata JSON path (default <out>.meta.json)");
        sub->add_option("--table1-override", f.table1_override, "Series truncation J_s");
        sub->add_option("--bin-width", f.bin_width, "Quadrature bin width");
        sub->add_option("--tail-mass-tol", f.tail_mass_tol, "Quadrature tail mass tolerance");
        handles[sub->get_name()] = hd;
    };
    const auto monte_carlo = [&](CLI::App* sub) {
        auto& hd = handles[sub->get_name()];
        sub->add_option("--seed", f.seed, "Experiment seed");
        hd.seeds = sub->add_option("--seeds", f.seeds, "Number of Monte-Carlo seeds");
        sub->add_flag("--full-scale", f.full_scale, "Use 1000 seeds unless --seeds is given");
        sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    };
    const auto sequential = [&](CLI::App* sub) {
        auto& hd = handles[sub->get_name()];
        hd.algorithm = sub->add_option("--algorithm", f.algorithm, "cusum or glr");
        sub->add_option("--threshold", f.threshold, "Threshold h");
        sub->add_option("--grid-db", f.grid_db, "GLR candidate grid START:STOP:STEP in dB");
        hd.max_blocks = sub->add_option("--max-blocks", f.max_blocks, "Block budget per run");
    };

    CLI::App* pdf = app.add_subcommand("pdf", "Densities f0 and f1 on a tau grid");
    common(pdf);
    pdf->add_option("--tau-grid", f.tau_grid, "START:STOP:STEP");

    CLI::App* roc = app.add_subcommand("roc", "ROC of the block detector");
    common(roc);
    roc->add_option("--pfa-points", f.pfa_points, "Points on the log-spaced P_fa grid");
    roc->add_option("--pfa-min", f.pfa_min, "Smallest P_fa on the grid");

    CLI::App* bounds = app.add_subcommand("bounds", "CUSUM delay and false-alarm bounds (blocks)");
    common(bounds);
    bounds->add_option("--threshold", f.threshold, "Thresholds (list or START:STOP:STEP)");
    bounds->add_option("--delta-points", f.delta_points, "Points of the delta grid");

    CLI::App* design = app.add_subcommand("design", "Threshold for a target P_fa (and P_d at given SNRs)");
    common(design);
    design->add_option("--pfa", f.pfa, "Target false-alarm probability");

    CLI::App* simulate = app.add_subcommand("simulate", "Per-seed CUSUM/GLR trials");
    common(simulate);
    monte_carlo(simulate);
    sequential(simulate);
    simulate->add_option("--change-block", f.change_block, "Change block k_c (default: pure-H0 and pure-H1 runs)");

    CLI::App* curves = app.add_subcommand("curves", "P_fa and P_d versus run-time");
    common(curves);
    monte_carlo(curves);
    sequential(curves);
    curves->add_option("--horizon", f.horizon, "Horizons in samples (list or START:STOP:STEP)");

    CLI::App* trace_cmd = app.add_subcommand("trace", "Per-block detector trace for one seed");
    common(trace_cmd);
    sequential(trace_cmd);
    trace_cmd->add_option("--seed", f.seed, "Experiment seed");
    trace_cmd->add_option("--change-block", f.change_block, "Change block k_c (default 1)");
    trace_cmd->add_option("--dump-blocks", f.dump_blocks, "Write the traced sample blocks to this CSV");

    try {
        std::vector<std::string> argv = apply_config(std::move(args));
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << '\n';
        return 2;
    } catch (const error& e) {
        err << "error: " << e.category() << ": " << one_line(e.what()) << '\n';
        return 1;
    }

    try {
        Metadata meta;
        std::optional<Table> table;
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        const Handles& hd = handles[name];
        const auto given = [](CLI::Option* o) { return o != nullptr && o->count() > 0; };
        if (name == "pdf") {
            table = cmd_pdf(f, meta);
        } else if (name == "roc") {
            table = cmd_roc(f, meta);
        } else if (name == "bounds") {
            table = cmd_bounds(f, meta);
        } else if (name == "design") {
            table = cmd_design(f, meta);
        } else if (name == "simulate") {
            table = cmd_simulate(f, given(hd.seeds), meta);
        } else if (name == "curves") {
            table = cmd_curves(f, given(hd.seeds), given(hd.algorithm), given(hd.n), given(hd.max_blocks), meta);
        } else {
            table = cmd_trace(f, given(hd.algorithm), given(hd.max_blocks), meta);
        }
        write_output(*table, meta, f, out);
    } catch (const error& e) {
        err << "error: " << e.category() << ": " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}

} // namespace mmeqd::cli

#endif // MMEQD_CLI_HPP
