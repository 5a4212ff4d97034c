#ifndef QLINK_CONFIG_HPP
#define QLINK_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qlink/sweeps.hpp"

namespace qlink {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fully parsed job description. `run.attempt.eta` holds the configured
// transducer efficiency; the optical path loss multiplier is applied in
// resolved(), so emit/load round-trips never lose the configured values.
struct JobConfig {
    std::string preset_name; // empty when the config named no preset
    ProtocolConfig run;
    double path_efficiency = 1.0;

    bool has_sweep = false;
    std::vector<SweepAxis> sweep_axes;
    double sweep_eta_over_nadd = 0.0;
    PePolicy sweep_pe_policy = PePolicy::Fixed;
    int sweep_pe_grid = 19;
    std::vector<Protocol> sweep_protocols;

    ProtocolConfig resolved() const {
        ProtocolConfig cfg = run;
        cfg.attempt.eta = run.attempt.eta * path_efficiency;
        cfg.validate();
        return cfg;
    }

    SweepSpec sweep_spec() const {
        if (!has_sweep)
            throw ConfigError("config has no \"sweep\" section");
        SweepSpec spec;
        spec.base = resolved();
        spec.protocols = sweep_protocols;
        spec.axes = sweep_axes;
        for (auto& axis : spec.axes)
            if (axis.param == "eta")
                for (double& v : axis.values)
                    v *= path_efficiency;
        spec.eta_over_nadd = sweep_eta_over_nadd;
        spec.pe_policy = sweep_pe_policy;
        spec.pe_grid = sweep_pe_grid;
        return spec;
    }
};

inline const char* pe_policy_name(PePolicy policy) {
    switch (policy) {
    case PePolicy::Fixed: return "fixed";
    case PePolicy::MaxFidelity: return "max_fidelity";
    case PePolicy::MaxRate: return "max_rate";
    }
    throw std::invalid_argument("unknown drive policy");
}

inline PePolicy pe_policy_from_name(std::string_view name) {
    if (name == "fixed") return PePolicy::Fixed;
    if (name == "max_fidelity") return PePolicy::MaxFidelity;
    if (name == "max_rate") return PePolicy::MaxRate;
    throw ConfigError("unknown pe_policy \"" + std::string(name) +
                      "\" (expected fixed, max_fidelity, or max_rate)");
}

namespace detail {

inline Protocol parse_protocol_name(const std::string& name) {
    if (auto protocol = protocol_from_name(name))
        return *protocol;
    throw ConfigError("unknown protocol \"" + name +
                      "\" (expected one_click, two_click, epl, or chi)");
}

inline double parse_double(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number())
        throw ConfigError("config key \"" + key + "\" must be a number");
    return v.get<double>();
}

// Times accept the string "inf" since JSON has no infinity literal.
inline double parse_time(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf")
            return std::numeric_limits<double>::infinity();
        throw ConfigError("config key \"" + key +
                          "\" must be a number of seconds or the string \"inf\"");
    }
    if (!v.is_number())
        throw ConfigError("config key \"" + key +
                          "\" must be a number of seconds or the string \"inf\"");
    return v.get<double>();
}

inline std::uint64_t parse_uint(const nlohmann::json& v, const std::string& key) {
    if (v.is_number_unsigned())
        return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError("config key \"" + key + "\" must be a nonnegative integer");
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<std::string_view> known,
                                const char* scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(std::string("unknown ") + scope + " key \"" + key + "\"");
    }
}

inline SweepAxis parse_sweep_axis(const nlohmann::json& v) {
    if (!v.is_object())
        throw ConfigError("each sweep axis must be an object with \"param\" and \"values\"");
    reject_unknown_keys(v, {"param", "values"}, "sweep axis");
    if (!v.contains("param") || !v["param"].is_string())
        throw ConfigError("sweep axis needs a string \"param\"");
    if (!v.contains("values") || !v["values"].is_array() || v["values"].empty())
        throw ConfigError("sweep axis needs a nonempty \"values\" array");

    SweepAxis axis;
    axis.param = v["param"].get<std::string>();
    for (const auto& entry : v["values"])
        axis.values.push_back(parse_time(entry, "values"));

    ProtocolConfig scratch; // surfaces unknown parameter names now, not mid-sweep
    set_config_param(scratch, axis.param, axis.values.front());
    return axis;
}

} // namespace detail

inline JobConfig load_config_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw ConfigError("config root must be a JSON object");
    detail::reject_unknown_keys(j,
                                {"protocol", "preset", "eta", "n_add", "p_e",
                                 "attempt_rate_hz", "t1_s", "t2phi_s", "env_excitation",
                                 "gate_epsilon", "max_wait_attempts", "max_trial_attempts",
                                 "trials", "seed", "path_efficiency", "sweep"},
                                "config");

    JobConfig job;
    if (j.contains("preset")) {
        if (!j["preset"].is_string())
            throw ConfigError("config key \"preset\" must be a string");
        job.preset_name = j["preset"].get<std::string>();
        const ScenarioPreset* preset = find_preset(job.preset_name);
        if (preset == nullptr)
            throw ConfigError("unknown preset \"" + job.preset_name +
                              "\" (list the available names with the presets command)");
        apply_preset(job.run, *preset);
    }

    if (j.contains("protocol")) {
        if (!j["protocol"].is_string())
            throw ConfigError("config key \"protocol\" must be a string");
        job.run.protocol = detail::parse_protocol_name(j["protocol"].get<std::string>());
    }
    if (j.contains("eta"))
        job.run.attempt.eta = detail::parse_double(j["eta"], "eta");
    if (j.contains("n_add"))
        job.run.attempt.n_add = detail::parse_double(j["n_add"], "n_add");
    if (j.contains("p_e"))
        job.run.attempt.p_e = detail::parse_double(j["p_e"], "p_e");
    if (j.contains("attempt_rate_hz"))
        job.run.attempt_rate_hz = detail::parse_double(j["attempt_rate_hz"], "attempt_rate_hz");
    if (j.contains("t1_s"))
        job.run.memory.t1_s = detail::parse_time(j["t1_s"], "t1_s");
    if (j.contains("t2phi_s"))
        job.run.memory.t2phi_s = detail::parse_time(j["t2phi_s"], "t2phi_s");
    if (j.contains("env_excitation"))
        job.run.memory.env_excitation = detail::parse_double(j["env_excitation"], "env_excitation");
    if (j.contains("gate_epsilon"))
        job.run.gate.epsilon = detail::parse_double(j["gate_epsilon"], "gate_epsilon");
    if (j.contains("max_wait_attempts"))
        job.run.max_wait_attempts = detail::parse_uint(j["max_wait_attempts"], "max_wait_attempts");
    if (j.contains("max_trial_attempts"))
        job.run.max_trial_attempts = detail::parse_uint(j["max_trial_attempts"], "max_trial_attempts");
    if (j.contains("trials"))
        job.run.trials = detail::parse_uint(j["trials"], "trials");
    if (j.contains("seed"))
        job.run.master_seed = detail::parse_uint(j["seed"], "seed");
    if (j.contains("path_efficiency")) {
        job.path_efficiency = detail::parse_double(j["path_efficiency"], "path_efficiency");
        if (!(job.path_efficiency > 0.0 && job.path_efficiency <= 1.0))
            throw ConfigError("path_efficiency must lie in (0, 1]");
    }

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        if (!s.is_object())
            throw ConfigError("config key \"sweep\" must be an object");
        detail::reject_unknown_keys(
            s, {"axes", "eta_over_nadd", "pe_policy", "pe_grid", "protocols"}, "sweep");
        job.has_sweep = true;
        if (s.contains("axes")) {
            if (!s["axes"].is_array())
                throw ConfigError("sweep key \"axes\" must be an array");
            for (const auto& axis : s["axes"])
                job.sweep_axes.push_back(detail::parse_sweep_axis(axis));
        }
        if (s.contains("eta_over_nadd")) {
            job.sweep_eta_over_nadd = detail::parse_double(s["eta_over_nadd"], "eta_over_nadd");
            if (job.sweep_eta_over_nadd < 0.0)
                throw ConfigError("sweep eta_over_nadd must be nonnegative");
        }
        if (s.contains("pe_policy")) {
            if (!s["pe_policy"].is_string())
                throw ConfigError("sweep key \"pe_policy\" must be a string");
            job.sweep_pe_policy = pe_policy_from_name(s["pe_policy"].get<std::string>());
        }
        if (s.contains("pe_grid")) {
            const std::uint64_t grid = detail::parse_uint(s["pe_grid"], "pe_grid");
            if (grid < 1 || grid > 10000)
                throw ConfigError("sweep pe_grid must lie in [1, 10000]");
            job.sweep_pe_grid = static_cast<int>(grid);
        }
        if (s.contains("protocols")) {
            if (!s["protocols"].is_array())
                throw ConfigError("sweep key \"protocols\" must be an array of protocol names");
            for (const auto& name : s["protocols"]) {
                if (!name.is_string())
                    throw ConfigError("sweep key \"protocols\" must be an array of protocol names");
                job.sweep_protocols.push_back(
                    detail::parse_protocol_name(name.get<std::string>()));
            }
        }
    }

    job.run.validate(); // core range checks; messages name the legal ranges
    return job;
}

inline JobConfig load_config_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return load_config_json(j);
}

namespace detail {

inline nlohmann::json time_to_json(double seconds) {
    if (std::isinf(seconds))
        return "inf";
    return seconds;
}

} // namespace detail

inline nlohmann::json emit_config_json(const JobConfig& job) {
    nlohmann::json j = nlohmann::json::object();
    if (!job.preset_name.empty())
        j["preset"] = job.preset_name;
    j["protocol"] = protocol_name(job.run.protocol);
    j["eta"] = job.run.attempt.eta;
    j["n_add"] = job.run.attempt.n_add;
    j["p_e"] = job.run.attempt.p_e;
    j["attempt_rate_hz"] = job.run.attempt_rate_hz;
    j["t1_s"] = detail::time_to_json(job.run.memory.t1_s);
    j["t2phi_s"] = detail::time_to_json(job.run.memory.t2phi_s);
    j["env_excitation"] = job.run.memory.env_excitation;
    j["gate_epsilon"] = job.run.gate.epsilon;
    j["max_wait_attempts"] = job.run.max_wait_attempts;
    j["max_trial_attempts"] = job.run.max_trial_attempts;
    j["trials"] = job.run.trials;
    j["seed"] = job.run.master_seed;
    j["path_efficiency"] = job.path_efficiency;

    if (job.has_sweep) {
        nlohmann::json s = nlohmann::json::object();
        s["axes"] = nlohmann::json::array();
        for (const auto& axis : job.sweep_axes) {
            nlohmann::json a;
            a["param"] = axis.param;
            a["values"] = nlohmann::json::array();
            for (double v : axis.values)
                a["values"].push_back(detail::time_to_json(v));
            s["axes"].push_back(std::move(a));
        }
        s["eta_over_nadd"] = job.sweep_eta_over_nadd;
        s["pe_policy"] = pe_policy_name(job.sweep_pe_policy);
        s["pe_grid"] = job.sweep_pe_grid;
        s["protocols"] = nlohmann::json::array();
        for (Protocol p : job.sweep_protocols)
            s["protocols"].push_back(protocol_name(p));
        j["sweep"] = std::move(s);
    }
    return j;
}

} // namespace qlink

#endif
