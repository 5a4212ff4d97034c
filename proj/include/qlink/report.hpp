#ifndef QLINK_REPORT_HPP
#define QLINK_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qlink/config.hpp"
#include "qlink/version.hpp"

namespace qlink {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Round-trippable decimal form; glibc prints infinities and NaNs as
// "inf"/"nan", which is also what the config loader accepts back.
inline std::string format_metric(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

struct ResultRow {
    Protocol protocol = Protocol::OneClick;
    ProtocolConfig config; // resolved parameters the row was simulated with
    ChannelMetrics metrics;
};

inline std::string csv_header() {
    return "protocol,eta,n_add,p_e,attempt_rate_hz,t1_s,t2phi_s,gate_epsilon,"
           "trials,heralds,accepted,fidelity_mean,fidelity_sem,ebit_rate_hz,seed";
}

inline std::string csv_row(const ResultRow& row) {
    std::ostringstream out;
    out << protocol_name(row.protocol) << ',' << format_metric(row.config.attempt.eta) << ','
        << format_metric(row.config.attempt.n_add) << ','
        << format_metric(row.config.attempt.p_e) << ','
        << format_metric(row.config.attempt_rate_hz) << ','
        << format_metric(row.config.memory.t1_s) << ','
        << format_metric(row.config.memory.t2phi_s) << ','
        << format_metric(row.config.gate.epsilon) << ',' << row.metrics.trials << ','
        << row.metrics.heralds << ',' << row.metrics.accepted << ','
        << format_metric(row.metrics.fidelity_mean) << ','
        << format_metric(row.metrics.fidelity_sem) << ','
        << format_metric(row.metrics.ebit_rate_hz) << ',' << row.config.master_seed;
    return out.str();
}

inline std::string csv_document(const std::vector<ResultRow>& rows) {
    std::string doc = csv_header();
    doc.push_back('\n');
    for (const auto& row : rows) {
        doc += csv_row(row);
        doc.push_back('\n');
    }
    return doc;
}

namespace detail {

inline nlohmann::json metric_to_json(double value) {
    if (std::isfinite(value))
        return value;
    return format_metric(value); // "inf" / "-inf" / "nan"
}

} // namespace detail

inline nlohmann::json row_json(const ResultRow& row) {
    nlohmann::json j;
    j["protocol"] = protocol_name(row.protocol);
    j["eta"] = detail::metric_to_json(row.config.attempt.eta);
    j["n_add"] = detail::metric_to_json(row.config.attempt.n_add);
    j["p_e"] = detail::metric_to_json(row.config.attempt.p_e);
    j["attempt_rate_hz"] = detail::metric_to_json(row.config.attempt_rate_hz);
    j["t1_s"] = detail::metric_to_json(row.config.memory.t1_s);
    j["t2phi_s"] = detail::metric_to_json(row.config.memory.t2phi_s);
    j["gate_epsilon"] = detail::metric_to_json(row.config.gate.epsilon);
    j["trials"] = row.metrics.trials;
    j["heralds"] = row.metrics.heralds;
    j["accepted"] = row.metrics.accepted;
    j["fidelity_mean"] = detail::metric_to_json(row.metrics.fidelity_mean);
    j["fidelity_sem"] = detail::metric_to_json(row.metrics.fidelity_sem);
    j["ebit_rate_hz"] = detail::metric_to_json(row.metrics.ebit_rate_hz);
    j["seed"] = row.config.master_seed;
    return j;
}

inline std::string json_document(const std::vector<ResultRow>& rows) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows)
        j["rows"].push_back(row_json(row));
    return j.dump(2) + "\n";
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string fnv1a64_hex(std::string_view data) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

inline std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

struct OutputDigest {
    std::string path; // as written, relative or absolute
    std::string fnv1a64;
    std::size_t bytes = 0;
};

inline nlohmann::json build_manifest(const JobConfig& job, const std::string& command,
                                     const std::vector<OutputDigest>& outputs,
                                     const std::string& created_utc = iso8601_utc_now()) {
    nlohmann::json j;
    j["tool"] = "qlink";
    j["version"] = kVersionString;
    j["command"] = command;
    j["created_utc"] = created_utc;
    j["seed"] = job.run.master_seed;
    j["config"] = emit_config_json(job);
    j["outputs"] = nlohmann::json::array();
    for (const auto& out : outputs) {
        nlohmann::json o;
        o["path"] = out.path;
        o["fnv1a64"] = out.fnv1a64;
        o["bytes"] = out.bytes;
        j["outputs"].push_back(std::move(o));
    }
    return j;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("read failed for \"" + path + "\"");
    return buf.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write \"" + path + "\"");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
        throw IoError("write failed for \"" + path + "\"");
}

} // namespace qlink

#endif
