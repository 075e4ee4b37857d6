#pragma once

// Output writers: equity curves, trade and holdings logs, metrics JSON, and
// the run manifest with input digests.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "backtest.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "metrics.hpp"

namespace mfvol::report {

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "report", "cannot read '" + path + "' for digest");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", md[i]);
        hex += byte;
    }
    return hex;
}

/// Formats a value for CSV, writing "nan" for undefined numbers.
inline std::string num(double v) { return std::isfinite(v) ? csv::format(v) : "nan"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io, "report", "cannot write '" + path.string() + "'");
    out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline Json metrics_json(const MetricsReport& m) {
    return Json{{"total_return", m.total_return}, {"sharpe", m.sharpe},           {"alpha", m.alpha},
                {"beta", m.beta},                 {"max_drawdown", m.max_drawdown}, {"n_periods", m.n_periods},
                {"periodicity", to_string(m.periodicity)}};
}

inline void write_equity_curve(const std::filesystem::path& path, const BacktestResult& r) {
    csv::Writer w(path.string(), {"date", "nav", "benchmark_nav"});
    for (std::size_t i = 0; i < r.dates.size(); ++i) w.row({r.dates[i].iso(), num(r.nav[i]), num(r.benchmark_nav[i])});
}

inline void write_trades(const std::filesystem::path& path, const BacktestResult& r) {
    csv::Writer w(path.string(), {"date", "ticker", "shares", "price", "commission", "slippage"});
    for (const auto& t : r.trades) {
        w.row({t.date.iso(), t.ticker, std::to_string(t.shares), num(t.price), num(t.commission), num(t.slippage)});
    }
}

inline void write_holdings(const std::filesystem::path& path, const BacktestResult& r) {
    csv::Writer w(path.string(), {"date", "ticker", "shares", "cash_after", "turnover"});
    for (const auto& s : r.snapshots) {
        if (s.holdings.empty()) w.row({s.date.iso(), "", "0", num(s.cash), num(s.turnover)});
        for (const auto& [t, q] : s.holdings) w.row({s.date.iso(), t, std::to_string(q), num(s.cash), num(s.turnover)});
    }
}

/// Records the command, the full resolved configuration and the SHA-256 of
/// every input file. Written after all other outputs.
inline void write_manifest(const std::filesystem::path& out_dir, const std::string& command, const RunConfig& config,
                           const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    Json j;
    j["command"] = command;
    j["config"] = config_to_json(config);
    Json in = Json::array();
    for (const auto& p : inputs) in.push_back({{"path", p}, {"sha256", sha256_file(p)}});
    j["inputs"] = in;
    j["outputs"] = outputs;
    write_json(out_dir / "run_manifest.json", j);
}

}  // namespace mfvol::report
