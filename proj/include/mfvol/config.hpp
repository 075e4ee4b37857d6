#pragma once

// Run configuration: a sectioned TOML file (or the "config" object of a run
// manifest), every field defaulted, unknown keys rejected.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "backtest.hpp"
#include "errors.hpp"
#include "factor_pipeline.hpp"
#include "market_data.hpp"
#include "metrics.hpp"
#include "scoring.hpp"
#include "synthetic.hpp"

namespace mfvol {

using Json = nlohmann::ordered_json;

struct RunConfig {
    struct Filter {
        int order = 2;
        double cutoff = 1.0 / 500.0;
        std::string weight_mode = "clip";
        std::int64_t truncation = 0;  // 0: automatic
        std::int64_t truncation_cap = 750;
    } filter;

    struct Vol {
        std::string method = "maxflat";
        double ewma_lambda = 0.94;
        double pwma_alpha = 1.2;
        std::int64_t pwma_length = 750;
        std::int64_t burn_in = 250;
        std::string demean = "full";  // full | expanding
    } vol;

    struct Factors {
        bool winsorize = true;
        double winsor_mad = 3.0;
        std::map<std::string, int> directions;  // overrides of the default catalog
    } factors;

    struct Universe {
        std::string prices;
        std::string universe;
        std::string benchmark;
        std::string factors;
        double liquidity_threshold = 10'000'000.0;
        std::int64_t listing_age_days = 91;
        std::int64_t turnover_window = 20;
    } universe;

    struct Synthetic {
        std::uint64_t seed = 7;
        std::int64_t n_tickers = 300;
        std::int64_t n_dates = 1300;
        std::string start = "2015-01-05";
        double ic = 0.2;
        std::int64_t n_factors = 3;
        double market_vol = 0.010;
        double base_vol = 0.015;
        double regime_ratio = 4.0;
        double regime_stay = 0.98;
        double drift = 0.0002;
        double beta_lo = 0.8;
        double beta_hi = 1.2;
        std::int64_t leaders = 0;
        double leader_beta = 0.4;
        double leader_tilt = 3.0;
        double suspend_prob = 0.0;
    } synthetic;

    struct Backtest {
        std::int64_t top_n = 50;
        std::string weighting = "equal";
        double buy_commission_bps = 5.0;
        double sell_commission_bps = 1.5;
        double slippage = 0.01;
        std::int64_t lot_size = 100;
        double capital = 10'000'000.0;
        std::string start;
        std::string end;
    } backtest;

    struct Quantile {
        std::vector<std::int64_t> cuts{0, 50, 100, 200};
    } quantile;

    struct Design {
        std::int64_t horizon = 750;
        std::int64_t freq_points = 501;
    } design;

    struct Report {
        std::string out_dir = "out";
        std::string periodicity = "daily";
    } report;

    bool uses_synthetic() const { return universe.prices.empty(); }

    // Derived views ---------------------------------------------------------

    VolParams vol_params() const {
        VolParams p;
        p.filter = {filter.order, filter.cutoff};
        if (filter.weight_mode == "clip") {
            p.weight_mode = WeightMode::clip;
        } else if (filter.weight_mode == "strict") {
            p.weight_mode = WeightMode::strict;
        } else {
            throw Error(Errc::config, "cli_app", "filter.weight_mode must be 'strict' or 'clip'");
        }
        if (filter.truncation < 0 || filter.truncation_cap < 1) throw Error(Errc::config, "cli_app", "invalid truncation");
        p.truncation = static_cast<std::size_t>(filter.truncation);
        p.truncation_cap = static_cast<std::size_t>(filter.truncation_cap);
        p.ewma_lambda = vol.ewma_lambda;
        p.pwma_alpha = vol.pwma_alpha;
        if (vol.pwma_length < 1 || vol.burn_in < 0) throw Error(Errc::config, "cli_app", "invalid vol lengths");
        p.pwma_length = static_cast<std::size_t>(vol.pwma_length);
        p.burn_in = static_cast<std::size_t>(vol.burn_in);
        if (vol.demean == "full") {
            p.demean = DemeanMode::full_sample;
        } else if (vol.demean == "expanding") {
            p.demean = DemeanMode::expanding;
        } else {
            throw Error(Errc::config, "cli_app", "vol.demean must be 'full' or 'expanding'");
        }
        return p;
    }

    PortfolioSpec portfolio() const {
        PortfolioSpec s;
        if (backtest.top_n < 1) throw Error(Errc::config, "cli_app", "backtest.top_n must be >= 1");
        s.top_n = static_cast<std::size_t>(backtest.top_n);
        if (backtest.weighting == "equal") {
            s.weighting = Weighting::equal;
        } else if (backtest.weighting == "rank_proportional") {
            s.weighting = Weighting::rank_proportional;
        } else {
            throw Error(Errc::config, "cli_app", "backtest.weighting must be 'equal' or 'rank_proportional'");
        }
        if (backtest.buy_commission_bps < 0 || backtest.sell_commission_bps < 0 || backtest.slippage < 0) {
            throw Error(Errc::config, "cli_app", "cost parameters must be nonnegative");
        }
        s.costs = {backtest.buy_commission_bps, backtest.sell_commission_bps, backtest.slippage};
        if (backtest.lot_size < 1) throw Error(Errc::config, "cli_app", "backtest.lot_size must be >= 1");
        s.lot_size = backtest.lot_size;
        if (!(backtest.capital > 0)) throw Error(Errc::config, "cli_app", "backtest.capital must be positive");
        s.initial_capital = backtest.capital;
        return s;
    }

    BacktestOptions backtest_options() const {
        BacktestOptions o;
        if (!backtest.start.empty()) o.start = Date::parse(backtest.start);
        if (!backtest.end.empty()) o.end = Date::parse(backtest.end);
        o.rules = eligibility_rules();
        return o;
    }

    EligibilityRules eligibility_rules() const {
        EligibilityRules r;
        r.min_turnover = universe.liquidity_threshold;
        r.listing_age_days = static_cast<int>(universe.listing_age_days);
        r.turnover_window = static_cast<int>(universe.turnover_window);
        if (r.turnover_window < 1) throw Error(Errc::config, "cli_app", "universe.turnover_window must be >= 1");
        return r;
    }

    SynthSpec synth_spec() const {
        SynthSpec s;
        s.seed = synthetic.seed;
        s.n_tickers = static_cast<int>(synthetic.n_tickers);
        s.n_dates = static_cast<int>(synthetic.n_dates);
        s.start = Date::parse(synthetic.start);
        s.ic = synthetic.ic;
        s.n_factors = static_cast<int>(synthetic.n_factors);
        s.market_vol = synthetic.market_vol;
        s.base_vol = synthetic.base_vol;
        s.regime_ratio = synthetic.regime_ratio;
        s.regime_stay = synthetic.regime_stay;
        s.drift = synthetic.drift;
        s.beta_lo = synthetic.beta_lo;
        s.beta_hi = synthetic.beta_hi;
        s.leaders = static_cast<int>(synthetic.leaders);
        s.leader_beta = synthetic.leader_beta;
        s.leader_tilt = synthetic.leader_tilt;
        s.suspend_prob = synthetic.suspend_prob;
        return s;
    }

    std::map<std::string, FactorInfo> factor_catalog() const {
        auto catalog = default_factor_catalog();
        for (const auto& [name, dir] : factors.directions) {
            if (dir != 1 && dir != -1) throw Error(Errc::config, "cli_app", "factor direction for " + name + " must be +1 or -1");
            catalog[name].direction = dir;
        }
        return catalog;
    }

    CompositeOptions composite_options() const { return {factors.winsorize, factors.winsor_mad}; }

    Periodicity periodicity() const {
        if (report.periodicity == "daily") return Periodicity::daily;
        if (report.periodicity == "monthly") return Periodicity::monthly;
        throw Error(Errc::config, "cli_app", "report.periodicity must be 'daily' or 'monthly'");
    }

    std::vector<std::size_t> quantile_cuts() const {
        std::vector<std::size_t> out;
        for (auto c : quantile.cuts) {
            if (c < 0) throw Error(Errc::config, "cli_app", "quantile cuts must be nonnegative");
            out.push_back(static_cast<std::size_t>(c));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// JSON mapping (the canonical form; TOML is converted into it)

namespace detail {

/// Reads a section strictly: each listed key may be present with a value of
/// the field's type, and any other key is an error.
class SectionReader {
public:
    SectionReader(const Json& root, const std::string& name) : name_(name) {
        if (!root.contains(name)) return;
        section_ = &root.at(name);
        if (!section_->is_object()) throw Error(Errc::config, "cli_app", "[" + name + "] must be a table");
    }

    template <typename T>
    SectionReader& field(const std::string& key, T& value) {
        seen_.push_back(key);
        if (!section_ || !section_->contains(key)) return *this;
        const Json& v = section_->at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::runtime_error("number expected");
                value = v.get<double>();
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::runtime_error("boolean expected");
                value = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::runtime_error("string expected");
                value = v.get<std::string>();
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::runtime_error("integer expected");
                value = v.get<T>();
            } else {
                value = v.get<T>();
            }
        } catch (const std::exception& e) {
            throw Error(Errc::config, "cli_app", name_ + "." + key + ": " + e.what());
        }
        return *this;
    }

    void finish() const {
        if (!section_) return;
        for (const auto& [key, _] : section_->items()) {
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
                throw Error(Errc::config, "cli_app", "unknown key '" + name_ + "." + key + "'");
            }
        }
    }

private:
    std::string name_;
    const Json* section_ = nullptr;
    std::vector<std::string> seen_;
};

inline Json toml_to_json(const toml::node& node) {
    if (auto t = node.as_table()) {
        Json out = Json::object();
        for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
        return out;
    }
    if (auto a = node.as_array()) {
        Json out = Json::array();
        for (const auto& v : *a) out.push_back(toml_to_json(v));
        return out;
    }
    if (auto v = node.value<std::int64_t>(); v && node.is_integer()) return *v;
    if (auto v = node.value<double>(); v && node.is_floating_point()) return *v;
    if (auto v = node.value<bool>(); v && node.is_boolean()) return *v;
    if (auto v = node.value<std::string>(); v && node.is_string()) return *v;
    if (node.is_date()) {
        const auto d = *node.as_date();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d->year, static_cast<unsigned>(d->month), static_cast<unsigned>(d->day));
        return std::string(buf);
    }
    throw Error(Errc::config, "cli_app", "unsupported TOML value type");
}

}  // namespace detail

inline RunConfig config_from_json(const Json& root) {
    if (!root.is_object()) throw Error(Errc::config, "cli_app", "configuration root must be a table");
    static const std::vector<std::string> sections{"filter",  "vol",      "factors", "universe", "synthetic",
                                                   "backtest", "quantile", "design",  "report"};
    for (const auto& [key, _] : root.items()) {
        if (std::find(sections.begin(), sections.end(), key) == sections.end()) {
            throw Error(Errc::config, "cli_app", "unknown section '" + key + "'");
        }
    }
    RunConfig c;
    detail::SectionReader(root, "filter")
        .field("order", c.filter.order)
        .field("cutoff", c.filter.cutoff)
        .field("weight_mode", c.filter.weight_mode)
        .field("truncation", c.filter.truncation)
        .field("truncation_cap", c.filter.truncation_cap)
        .finish();
    detail::SectionReader(root, "vol")
        .field("method", c.vol.method)
        .field("ewma_lambda", c.vol.ewma_lambda)
        .field("pwma_alpha", c.vol.pwma_alpha)
        .field("pwma_length", c.vol.pwma_length)
        .field("burn_in", c.vol.burn_in)
        .field("demean", c.vol.demean)
        .finish();
    detail::SectionReader(root, "factors")
        .field("winsorize", c.factors.winsorize)
        .field("winsor_mad", c.factors.winsor_mad)
        .field("directions", c.factors.directions)
        .finish();
    detail::SectionReader(root, "universe")
        .field("prices", c.universe.prices)
        .field("universe", c.universe.universe)
        .field("benchmark", c.universe.benchmark)
        .field("factors", c.universe.factors)
        .field("liquidity_threshold", c.universe.liquidity_threshold)
        .field("listing_age_days", c.universe.listing_age_days)
        .field("turnover_window", c.universe.turnover_window)
        .finish();
    detail::SectionReader(root, "synthetic")
        .field("seed", c.synthetic.seed)
        .field("n_tickers", c.synthetic.n_tickers)
        .field("n_dates", c.synthetic.n_dates)
        .field("start", c.synthetic.start)
        .field("ic", c.synthetic.ic)
        .field("n_factors", c.synthetic.n_factors)
        .field("market_vol", c.synthetic.market_vol)
        .field("base_vol", c.synthetic.base_vol)
        .field("regime_ratio", c.synthetic.regime_ratio)
        .field("regime_stay", c.synthetic.regime_stay)
        .field("drift", c.synthetic.drift)
        .field("beta_lo", c.synthetic.beta_lo)
        .field("beta_hi", c.synthetic.beta_hi)
        .field("leaders", c.synthetic.leaders)
        .field("leader_beta", c.synthetic.leader_beta)
        .field("leader_tilt", c.synthetic.leader_tilt)
        .field("suspend_prob", c.synthetic.suspend_prob)
        .finish();
    detail::SectionReader(root, "backtest")
        .field("top_n", c.backtest.top_n)
        .field("weighting", c.backtest.weighting)
        .field("buy_commission_bps", c.backtest.buy_commission_bps)
        .field("sell_commission_bps", c.backtest.sell_commission_bps)
        .field("slippage", c.backtest.slippage)
        .field("lot_size", c.backtest.lot_size)
        .field("capital", c.backtest.capital)
        .field("start", c.backtest.start)
        .field("end", c.backtest.end)
        .finish();
    detail::SectionReader(root, "quantile").field("cuts", c.quantile.cuts).finish();
    detail::SectionReader(root, "design").field("horizon", c.design.horizon).field("freq_points", c.design.freq_points).finish();
    detail::SectionReader(root, "report").field("out_dir", c.report.out_dir).field("periodicity", c.report.periodicity).finish();
    return c;
}

inline Json config_to_json(const RunConfig& c) {
    Json j;
    j["filter"] = {{"order", c.filter.order},
                   {"cutoff", c.filter.cutoff},
                   {"weight_mode", c.filter.weight_mode},
                   {"truncation", c.filter.truncation},
                   {"truncation_cap", c.filter.truncation_cap}};
    j["vol"] = {{"method", c.vol.method},           {"ewma_lambda", c.vol.ewma_lambda}, {"pwma_alpha", c.vol.pwma_alpha},
                {"pwma_length", c.vol.pwma_length}, {"burn_in", c.vol.burn_in},         {"demean", c.vol.demean}};
    j["factors"] = {{"winsorize", c.factors.winsorize}, {"winsor_mad", c.factors.winsor_mad}, {"directions", c.factors.directions}};
    j["universe"] = {{"prices", c.universe.prices},
                     {"universe", c.universe.universe},
                     {"benchmark", c.universe.benchmark},
                     {"factors", c.universe.factors},
                     {"liquidity_threshold", c.universe.liquidity_threshold},
                     {"listing_age_days", c.universe.listing_age_days},
                     {"turnover_window", c.universe.turnover_window}};
    j["synthetic"] = {{"seed", c.synthetic.seed},
                      {"n_tickers", c.synthetic.n_tickers},
                      {"n_dates", c.synthetic.n_dates},
                      {"start", c.synthetic.start},
                      {"ic", c.synthetic.ic},
                      {"n_factors", c.synthetic.n_factors},
                      {"market_vol", c.synthetic.market_vol},
                      {"base_vol", c.synthetic.base_vol},
                      {"regime_ratio", c.synthetic.regime_ratio},
                      {"regime_stay", c.synthetic.regime_stay},
                      {"drift", c.synthetic.drift},
                      {"beta_lo", c.synthetic.beta_lo},
                      {"beta_hi", c.synthetic.beta_hi},
                      {"leaders", c.synthetic.leaders},
                      {"leader_beta", c.synthetic.leader_beta},
                      {"leader_tilt", c.synthetic.leader_tilt},
                      {"suspend_prob", c.synthetic.suspend_prob}};
    j["backtest"] = {{"top_n", c.backtest.top_n},
                     {"weighting", c.backtest.weighting},
                     {"buy_commission_bps", c.backtest.buy_commission_bps},
                     {"sell_commission_bps", c.backtest.sell_commission_bps},
                     {"slippage", c.backtest.slippage},
                     {"lot_size", c.backtest.lot_size},
                     {"capital", c.backtest.capital},
                     {"start", c.backtest.start},
                     {"end", c.backtest.end}};
    j["quantile"] = {{"cuts", c.quantile.cuts}};
    j["design"] = {{"horizon", c.design.horizon}, {"freq_points", c.design.freq_points}};
    j["report"] = {{"out_dir", c.report.out_dir}, {"periodicity", c.report.periodicity}};
    return j;
}

inline RunConfig parse_toml_config(const std::string& text, const std::string& source = "config") {
    try {
        const toml::table table = toml::parse(text, source);
        return config_from_json(detail::toml_to_json(table));
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source << ": " << e.description() << " at line " << e.source().begin.line;
        throw Error(Errc::config, "cli_app", msg.str());
    }
}

/// Loads a TOML config, or the `config` object of a JSON run manifest.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::config, "cli_app", "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        Json manifest;
        try {
            manifest = Json::parse(buf.str());
        } catch (const std::exception& e) {
            throw Error(Errc::config, "cli_app", path + ": " + e.what());
        }
        if (!manifest.contains("config")) throw Error(Errc::config, "cli_app", path + ": manifest has no 'config' object");
        return config_from_json(manifest.at("config"));
    }
    return parse_toml_config(buf.str(), path);
}

}  // namespace mfvol
