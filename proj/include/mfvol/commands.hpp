#pragma once

// Batch commands behind the CLI: design, vol, compare, quantile, benchmark.
// Each writes plain CSV/JSON into the output directory and a run manifest
// last.

#include <filesystem>
#include <future>
#include <string>
#include <vector>

#include "backtest.hpp"
#include "config.hpp"
#include "filter_design.hpp"
#include "market_data.hpp"
#include "metrics.hpp"
#include "report.hpp"
#include "scoring.hpp"
#include "state_space.hpp"
#include "synthetic.hpp"

namespace mfvol {

namespace fs = std::filesystem;

struct Inputs {
    MarketPanel panel;
    FactorPanel factors;
    std::vector<std::string> files;  // digested into the manifest
};

/// Loads the CSV inputs named in [universe], or generates the [synthetic]
/// panel when no price file is configured.
inline Inputs load_inputs(const RunConfig& config) {
    Inputs in;
    if (config.uses_synthetic()) {
        SynthData data = synth_panel(config.synth_spec());
        in.panel = std::move(data.panel);
        in.factors = std::move(data.factors);
        return in;
    }
    in.panel = load_panel({config.universe.prices, config.universe.universe, config.universe.benchmark});
    in.files = {config.universe.prices};
    if (!config.universe.universe.empty()) in.files.push_back(config.universe.universe);
    if (!config.universe.benchmark.empty()) in.files.push_back(config.universe.benchmark);
    if (!config.universe.factors.empty()) {
        in.factors = load_factors(config.universe.factors, config.factor_catalog());
        in.files.push_back(config.universe.factors);
    }
    for (auto& [name, info] : in.factors.factors()) {
        if (auto it = config.factors.directions.find(name); it != config.factors.directions.end()) info.direction = it->second;
    }
    return in;
}

inline fs::path prepare_out(const RunConfig& config) {
    const fs::path out(config.report.out_dir);
    fs::create_directories(out);
    return out;
}

// ---------------------------------------------------------------------------
// design

/// Lag-weight curves (maxflat, ewma, pwma) over the design horizon, each
/// normalized to sum one.
struct DecayTable {
    std::vector<double> maxflat, ewma, pwma;
    LagWeights maxflat_weights;
};

inline DecayTable decay_table(const RunConfig& config) {
    const VolParams p = config.vol_params();
    if (config.design.horizon < 1) throw Error(Errc::config, "cli_app", "design.horizon must be >= 1");
    const auto horizon = static_cast<std::size_t>(config.design.horizon);
    const StateSpaceModel ss = to_controller_canonical(discretize(p.filter));
    DecayTable t;
    t.maxflat_weights = validate_weights(impulse_weights(ss, horizon), p.weight_mode);
    t.maxflat = t.maxflat_weights.h;
    if (!(p.ewma_lambda > 0.0 && p.ewma_lambda < 1.0)) throw Error(Errc::parameter, "vol_estimators", "EWMA lambda must lie in (0, 1)");
    double total = 0.0;
    for (std::size_t k = 1; k <= horizon; ++k) {
        t.ewma.push_back((1.0 - p.ewma_lambda) * std::pow(p.ewma_lambda, static_cast<double>(k - 1)));
        total += t.ewma.back();
    }
    for (double& v : t.ewma) v /= total;
    t.pwma = pwma_weights(p.pwma_alpha, horizon);
    return t;
}

inline std::vector<std::string> cmd_design(const RunConfig& config) {
    const fs::path out = prepare_out(config);
    const VolParams p = config.vol_params();
    const DiscreteFilter filter = discretize(p.filter);
    const StateSpaceModel ss = to_controller_canonical(filter);
    const DecayTable table = decay_table(config);

    {
        csv::Writer w((out / "decay.csv").string(), {"lag", "maxflat", "ewma", "pwma"});
        for (std::size_t k = 0; k < table.maxflat.size(); ++k) {
            w.row({std::to_string(k + 1), report::num(table.maxflat[k]), report::num(table.ewma[k]), report::num(table.pwma[k])});
        }
    }
    {
        if (config.design.freq_points < 2) throw Error(Errc::config, "cli_app", "design.freq_points must be >= 2");
        const auto points = static_cast<std::size_t>(config.design.freq_points);
        const double warped = prewarp(p.filter.cutoff);
        csv::Writer w((out / "frequency_response.csv").string(), {"freq", "discrete_magnitude", "prototype_magnitude"});
        for (std::size_t i = 0; i < points; ++i) {
            const double f = 0.5 * static_cast<double>(i) / static_cast<double>(points - 1);
            const double analog = i + 1 == points ? 0.0 : magnitude_response(p.filter.order, std::tan(std::numbers::pi * f) / warped);
            w.row({report::num(f), report::num(discrete_magnitude(filter, f)), report::num(analog)});
        }
    }
    {
        Json j;
        j["order"] = p.filter.order;
        j["cutoff"] = p.filter.cutoff;
        j["b"] = filter.b;
        j["a"] = filter.a;
        Json A = Json::array();
        for (Eigen::Index r = 0; r < ss.A.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < ss.A.cols(); ++c) row.push_back(ss.A(r, c));
            A.push_back(row);
        }
        j["A"] = A;
        j["B"] = std::vector<double>(ss.B.data(), ss.B.data() + ss.B.size());
        j["C"] = std::vector<double>(ss.C.data(), ss.C.data() + ss.C.size());
        j["d"] = ss.d;
        j["weight_mode"] = config.filter.weight_mode;
        j["horizon"] = table.maxflat.size();
        j["raw_weight_sum"] = table.maxflat_weights.raw_sum;
        if (table.maxflat_weights.clipped) {
            j["first_clipped_lag"] = table.maxflat_weights.clipped->lag;
        } else {
            j["first_clipped_lag"] = nullptr;
        }
        report::write_json(out / "filter.json", j);
    }
    std::vector<std::string> outputs{"decay.csv", "frequency_response.csv", "filter.json"};
    report::write_manifest(out, "design", config, {}, outputs);
    return outputs;
}

// ---------------------------------------------------------------------------
// vol

inline std::vector<std::string> cmd_vol(const RunConfig& config) {
    const VolMethod method = parse_vol_method(config.vol.method);
    if (method == VolMethod::none) throw Error(Errc::config, "cli_app", "vol.method 'none' has no volatility series to export");
    const Inputs in = load_inputs(config);
    const fs::path out = prepare_out(config);
    const VolEstimator est(method, config.vol_params());
    const VolPanel vols = compute_vol_panel(in.panel, est);
    {
        csv::Writer w((out / "vol_panel.csv").string(), {"date", "ticker", "method", "sigma"});
        for (const auto& [ticker, v] : vols) {
            for (std::size_t t = v.valid_from; t < v.size(); ++t) {
                w.row({v.dates[t].iso(), ticker, to_string(method), report::num(v.sigma[t])});
            }
        }
    }
    std::vector<std::string> outputs{"vol_panel.csv"};
    report::write_manifest(out, "vol", config, in.files, outputs);
    return outputs;
}

// ---------------------------------------------------------------------------
// backtest-driven commands

struct MethodRun {
    VolMethod method;
    ScoreStream scores;
    BacktestResult result;
    MetricsReport metrics;
};

inline ScoreStream score_stream_for(const Inputs& in, const RunConfig& config, VolMethod method) {
    ScoreOptions opts{config.composite_options(), display_name(method)};
    if (method == VolMethod::none) return build_score_stream(in.panel, in.factors, nullptr, opts);
    const VolEstimator est(method, config.vol_params());
    const VolPanel vols = compute_vol_panel(in.panel, est);
    return build_score_stream(in.panel, in.factors, &vols, opts);
}

/// Requires a benchmark level on every backtest date.
inline void require_benchmark(const BacktestResult& r) {
    for (std::size_t i = 0; i < r.dates.size(); ++i) {
        if (!std::isfinite(r.benchmark_nav[i])) {
            throw Error(Errc::misalignment, "cli_app", "benchmark has no level on or before " + r.dates[i].iso());
        }
    }
}

inline MetricsReport metrics_for(const BacktestResult& r, Periodicity periodicity) {
    require_benchmark(r);
    return compute_metrics(r.dates, r.nav, r.benchmark_nav, periodicity);
}

inline void write_run(const fs::path& dir, const MethodRun& run) {
    fs::create_directories(dir);
    report::write_json(dir / "metrics.json", report::metrics_json(run.metrics));
    report::write_equity_curve(dir / "equity_curve.csv", run.result);
    report::write_trades(dir / "trades.csv", run.result);
    report::write_holdings(dir / "holdings.csv", run.result);
}

/// First rebalance date covered by every stream.
inline std::optional<Date> common_start(const std::vector<const ScoreStream*>& streams) {
    std::optional<Date> start;
    for (const auto* s : streams) {
        if (s->empty()) throw Error(Errc::empty_score, "cli_app", "a method produced no scores over the panel");
        if (!start || s->begin()->first > *start) start = s->begin()->first;
    }
    return start;
}

inline BacktestOptions options_from(const RunConfig& config, std::optional<Date> first_scores) {
    BacktestOptions o = config.backtest_options();
    if (first_scores && (!o.start || *o.start < *first_scores)) o.start = first_scores;
    return o;
}

inline std::vector<std::string> cmd_compare(const RunConfig& config) {
    const Inputs in = load_inputs(config);
    const PortfolioSpec spec = config.portfolio();
    const Periodicity periodicity = config.periodicity();

    std::vector<MethodRun> runs;
    {
        std::vector<std::future<ScoreStream>> pending;
        for (VolMethod m : kAllVolMethods) {
            pending.push_back(std::async(std::launch::async, [&in, &config, m] { return score_stream_for(in, config, m); }));
        }
        for (std::size_t i = 0; i < pending.size(); ++i) runs.push_back({kAllVolMethods[i], pending[i].get(), {}, {}});
    }
    std::vector<const ScoreStream*> streams;
    for (const auto& r : runs) streams.push_back(&r.scores);
    const BacktestOptions opts = options_from(config, common_start(streams));
    {
        std::vector<std::future<void>> pending;
        for (auto& r : runs) {
            pending.push_back(std::async(std::launch::async, [&r, &in, &spec, &opts, periodicity] {
                r.result = run_backtest(in.panel, r.scores, spec, opts);
                r.metrics = metrics_for(r.result, periodicity);
            }));
        }
        for (auto& p : pending) p.get();
    }

    const fs::path out = prepare_out(config);
    std::vector<std::string> outputs;
    {
        csv::Writer w((out / "compare.csv").string(),
                      {"method", "total_return", "sharpe", "alpha", "alpha_pct", "beta", "max_drawdown", "n_periods"});
        for (const auto& r : runs) {
            w.row({display_name(r.method), report::num(r.metrics.total_return), report::num(r.metrics.sharpe),
                   report::num(r.metrics.alpha), report::num(100.0 * r.metrics.alpha), report::num(r.metrics.beta),
                   report::num(r.metrics.max_drawdown), std::to_string(r.metrics.n_periods)});
        }
        outputs.push_back("compare.csv");
    }
    {
        std::vector<std::string> header{"date"};
        for (const auto& r : runs) header.push_back(display_name(r.method));
        header.push_back("benchmark");
        csv::Writer w((out / "compare_equity.csv").string(), header);
        const auto& dates = runs.front().result.dates;
        for (std::size_t i = 0; i < dates.size(); ++i) {
            std::vector<std::string> row{dates[i].iso()};
            for (const auto& r : runs) row.push_back(report::num(r.result.nav[i]));
            row.push_back(report::num(runs.front().result.benchmark_nav[i]));
            w.row(row);
        }
        outputs.push_back("compare_equity.csv");
    }
    for (const auto& r : runs) {
        write_run(out / to_string(r.method), r);
        for (const char* f : {"metrics.json", "equity_curve.csv", "trades.csv", "holdings.csv"}) {
            outputs.push_back(to_string(r.method) + "/" + f);
        }
    }
    report::write_manifest(out, "compare", config, in.files, outputs);
    return outputs;
}

inline std::vector<std::string> cmd_quantile(const RunConfig& config) {
    const Inputs in = load_inputs(config);
    const VolMethod method = parse_vol_method(config.vol.method);
    const std::vector<std::size_t> cuts = config.quantile_cuts();
    if (cuts.size() < 2 || cuts.front() != 0) throw Error(Errc::config, "cli_app", "quantile.cuts must start at 0 with at least two cuts");
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (cuts[i] <= cuts[i - 1]) throw Error(Errc::config, "cli_app", "quantile.cuts must be strictly increasing");
    }
    const ScoreStream scores = score_stream_for(in, config, method);
    const BacktestOptions opts = options_from(config, common_start({&scores}));

    std::vector<BacktestResult> buckets(cuts.size() - 1);
    {
        std::vector<std::future<void>> pending;
        for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
            pending.push_back(std::async(std::launch::async, [&, b] {
                PortfolioSpec spec = config.portfolio();
                spec.bucket = std::make_pair(cuts[b], cuts[b + 1]);
                buckets[b] = run_backtest(in.panel, scores, spec, opts);
            }));
        }
        for (auto& p : pending) p.get();
    }
    require_benchmark(buckets.front());

    const fs::path out = prepare_out(config);
    auto label = [&](std::size_t b) { return "bucket_" + std::to_string(cuts[b]) + "_" + std::to_string(cuts[b + 1]); };
    {
        std::vector<std::string> header{"date"};
        for (std::size_t b = 0; b < buckets.size(); ++b) header.push_back(label(b));
        header.push_back("benchmark");
        csv::Writer w((out / "quantile_equity.csv").string(), header);
        for (std::size_t i = 0; i < buckets.front().dates.size(); ++i) {
            std::vector<std::string> row{buckets.front().dates[i].iso()};
            for (const auto& r : buckets) row.push_back(report::num(r.nav[i]));
            row.push_back(report::num(buckets.front().benchmark_nav[i]));
            w.row(row);
        }
    }
    {
        csv::Writer w((out / "quantile_metrics.csv").string(), {"bucket", "total_return", "sharpe", "max_drawdown"});
        for (std::size_t b = 0; b < buckets.size(); ++b) {
            double sr = std::numeric_limits<double>::quiet_NaN();
            try {
                sr = sharpe(buckets[b].nav, Periodicity::daily);
            } catch (const Error& e) {
                if (e.code() != Errc::undefined_metric) throw;
            }
            w.row({label(b), report::num(total_return(buckets[b].nav)), report::num(sr), report::num(max_drawdown(buckets[b].nav))});
        }
    }
    std::vector<std::string> outputs{"quantile_equity.csv", "quantile_metrics.csv"};
    report::write_manifest(out, "quantile", config, in.files, outputs);
    return outputs;
}

inline std::vector<std::string> cmd_benchmark(const RunConfig& config) {
    const Inputs in = load_inputs(config);
    const VolMethod method = parse_vol_method(config.vol.method);
    MethodRun run{method, score_stream_for(in, config, method), {}, {}};
    const BacktestOptions opts = options_from(config, common_start({&run.scores}));
    run.result = run_backtest(in.panel, run.scores, config.portfolio(), opts);
    const Periodicity periodicity = config.periodicity();
    run.metrics = metrics_for(run.result, periodicity);
    const MetricsReport index = compute_metrics(run.result.dates, run.result.benchmark_nav, run.result.benchmark_nav, periodicity);

    const fs::path out = prepare_out(config);
    write_run(out, run);
    report::write_json(out / "benchmark_metrics.json", report::metrics_json(index));
    std::vector<std::string> outputs{"metrics.json", "equity_curve.csv", "trades.csv", "holdings.csv", "benchmark_metrics.json"};
    report::write_manifest(out, "benchmark", config, in.files, outputs);
    return outputs;
}

}  // namespace mfvol
