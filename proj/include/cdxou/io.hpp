#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdxou/calibration.hpp"
#include "cdxou/ou_process.hpp"

namespace cdxou::io {

// Flat key=value parameter file. Blank lines and '#' comments allowed.
inline std::map<std::string, double> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open parameter file: " + path);
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string s;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) s += c;
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            kv[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    return kv;
}

inline ModelParams read_params(const std::string& path) {
    const auto kv = read_key_values(path);
    auto get = [&](const std::string& k) {
        const auto it = kv.find(k);
        if (it == kv.end()) throw std::invalid_argument(path + ": missing key '" + k + "'");
        return it->second;
    };
    ModelParams p;
    p.theta_r = get("theta_r");
    p.rate = {get("c_r"), get("gamma_r")};
    p.rho = get("rho");
    p.theta_lambda = get("theta_lambda");
    p.intensity = {{get("c_lambda"), get("gamma_lambda")}, {get("c_tau"), get("gamma_tau")}};
    p.r0 = get("r0");
    p.lambda0 = get("lambda0");
    p.validate();
    return p;
}

inline void write_params(const ModelParams& p, std::ostream& os) {
    os << "theta_r=" << p.theta_r << "\nc_r=" << p.rate.c << "\ngamma_r=" << p.rate.gamma
       << "\nrho=" << p.rho << "\ntheta_lambda=" << p.theta_lambda
       << "\nc_lambda=" << p.intensity.inner.c << "\ngamma_lambda=" << p.intensity.inner.gamma
       << "\nc_tau=" << p.intensity.subordinator.c
       << "\ngamma_tau=" << p.intensity.subordinator.gamma << "\nr0=" << p.r0
       << "\nlambda0=" << p.lambda0 << "\n";
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        std::string t;
        for (char c : cell)
            if (!std::isspace(static_cast<unsigned char>(c))) t += c;
        out.push_back(t);
    }
    return out;
}

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                                const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument(path + ": missing column '" + name + "'");
}

}  // namespace detail

// Headered CSV: term_years,strike_bps,side,bid,ask,mid  (side: payer|receiver).
// An optional leading `date` column tags multi-day series.
struct DatedQuote {
    std::string date;  // empty when the file has no date column
    Quote quote;
};

inline std::vector<DatedQuote> read_quotes_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open quote file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty quote file");
    const auto header = detail::split_csv_line(line);
    const bool dated = std::find(header.begin(), header.end(), "date") != header.end();
    const std::size_t c_date = dated ? detail::column_index(header, "date", path) : 0;
    const std::size_t c_term = detail::column_index(header, "term_years", path);
    const std::size_t c_strike = detail::column_index(header, "strike_bps", path);
    const std::size_t c_side = detail::column_index(header, "side", path);
    const std::size_t c_bid = detail::column_index(header, "bid", path);
    const std::size_t c_ask = detail::column_index(header, "ask", path);
    const std::size_t c_mid = detail::column_index(header, "mid", path);
    std::vector<DatedQuote> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() < header.size())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": short row");
        try {
            DatedQuote dq;
            if (dated) dq.date = cells[c_date];
            dq.quote.maturity = std::stod(cells[c_term]);
            dq.quote.strike_bps = std::stod(cells[c_strike]);
            if (cells[c_side] == "payer")
                dq.quote.side = QuoteSide::payer;
            else if (cells[c_side] == "receiver")
                dq.quote.side = QuoteSide::receiver;
            else
                throw std::invalid_argument("side must be payer|receiver");
            dq.quote.bid = std::stod(cells[c_bid]);
            dq.quote.ask = std::stod(cells[c_ask]);
            dq.quote.mid = std::stod(cells[c_mid]);
            out.push_back(dq);
        } catch (const std::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw std::invalid_argument(path + ": no quotes");
    return out;
}

// Headered CSV: tenor_years,yield.
inline std::vector<CurvePoint> read_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open curve file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty curve file");
    const auto header = detail::split_csv_line(line);
    const std::size_t c_tenor = detail::column_index(header, "tenor_years", path);
    const std::size_t c_yield = detail::column_index(header, "yield", path);
    std::vector<CurvePoint> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        try {
            out.push_back({std::stod(cells.at(c_tenor)), std::stod(cells.at(c_yield))});
        } catch (const std::exception&) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad row");
        }
    }
    if (out.size() < 2) throw std::invalid_argument(path + ": need >= 2 curve points");
    return out;
}

// FNV-1a of the canonical config string, for the run manifest.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace cdxou::io
