#include "relaybuf/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace relaybuf {

using nlohmann::json;

SignallingMode mode_of(PolicyKind p) {
    switch (p) {
        case PolicyKind::Nibep:
        case PolicyKind::Niofp:
            return SignallingMode::NonIncremental;
        default:
            return SignallingMode::Incremental;
    }
}

bool uses_buffer(PolicyKind p) {
    switch (p) {
        case PolicyKind::Ibep:
        case PolicyKind::Iofp:
        case PolicyKind::Nibep:
        case PolicyKind::Niofp:
            return true;
        default:
            return false;
    }
}

std::string to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::Ibep: return "ibep";
        case PolicyKind::Iofp: return "iofp";
        case PolicyKind::Nibep: return "nibep";
        case PolicyKind::Niofp: return "niofp";
        case PolicyKind::Hu: return "hu";
        case PolicyKind::Dt: return "dt";
    }
    return "?";
}

PolicyKind policy_from_string(const std::string& name) {
    for (PolicyKind p : kAllPolicies)
        if (to_string(p) == name) return p;
    throw ConfigError("unknown scheme: " + name);
}

double db_to_linear(double x_db) {
    if (!std::isfinite(x_db)) throw ConfigError("db_to_linear: non-finite input");
    return std::pow(10.0, x_db / 10.0);
}

double gamma_threshold(double r0) {
    if (!(r0 > 0.0)) throw ConfigError("gamma_threshold: rate must be > 0");
    return std::exp2(2.0 * r0) - 1.0;
}

namespace {

void validate(const SystemParams& p) {
    const Geometry& g = p.geometry;
    if (!(g.d_sr > 0.0 && g.d_rd > 0.0 && g.d_sd > 0.0))
        throw ConfigError("all distances must be strictly positive");
    if (!(p.alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(p.noise_power > 0.0)) throw ConfigError("noise_power must be > 0");
    if (!(p.source_power > 0.0)) throw ConfigError("source_power must be > 0");
    if (!(p.rate_bpcu > 0.0)) throw ConfigError("rate must be > 0");
    if (!(p.harvest_mean > 0.0)) throw ConfigError("harvest_mean must be > 0");
    if (!(p.buffer.value > 0.0)) throw ConfigError("buffer m/phi must be > 0");
}

}  // namespace

DerivedConstants derive_constants(const SystemParams& p) {
    validate(p);
    DerivedConstants c;
    c.mode = p.mode;
    c.alpha = p.alpha;
    c.geometry = p.geometry;
    c.noise_power = p.noise_power;
    c.source_power = p.source_power;
    c.rate_bpcu = p.rate_bpcu;
    c.snr = p.source_power / p.noise_power;
    c.gamma_th = gamma_threshold(p.rate_bpcu);

    c.w2 = p.noise_power * std::pow(p.geometry.d_sd, p.alpha) / p.source_power;
    c.w3 = p.noise_power * std::pow(p.geometry.d_rd, p.alpha) / 2.0;
    c.w4 = p.noise_power * std::pow(p.geometry.d_sr, p.alpha) / p.source_power;

    c.ack_prob_ = c.incremental() ? std::exp(-c.w2 * c.gamma_th) : 0.0;
    c.lambda1 = 1.0 / p.harvest_mean;
    c.lambda_eff = c.lambda1 * (1.0 - c.ack_prob_);

    if (p.buffer.kind == BufferSpec::Kind::Draw) {
        c.m_draw = p.buffer.value;
        c.phi = c.m_draw * c.lambda_eff;
    } else {
        c.phi = p.buffer.value;
        c.m_draw = c.phi / c.lambda_eff;
    }
    c.w1 = c.w3 / c.m_draw;

    c.mean_sd_ = std::pow(p.geometry.d_sd, -p.alpha);
    c.mean_sr_ = std::pow(p.geometry.d_sr, -p.alpha);
    c.mean_rd_ = std::pow(p.geometry.d_rd, -p.alpha);
    return c;
}

SystemParams with_mode(SystemParams params, SignallingMode mode) {
    params.mode = mode;
    return params;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double require_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw ConfigError("missing key '" + std::string(key) + "' in " + where);
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError("key '" + std::string(key) + "' must be a number");
    return v.get<double>();
}

std::pair<double, double> coordinate_pair(const json& obj, const char* key) {
    if (!obj.contains(key))
        throw ConfigError("geometry missing coordinate '" + std::string(key) + "'");
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("coordinate '" + std::string(key) +
                          "' must be a pair of numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

double distance(std::pair<double, double> a, std::pair<double, double> b) {
    return std::hypot(a.first - b.first, a.second - b.second);
}

}  // namespace

SystemParams parse_config_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(doc,
                        {"geometry", "alpha", "noise_power_db", "source_snr_db",
                         "rate_bpcu", "harvest_mean_db", "buffer", "mode"},
                        "config");

    SystemParams p;
    if (!doc.contains("geometry") || !doc.at("geometry").is_object())
        throw ConfigError("config requires a 'geometry' object");
    const json& geo = doc.at("geometry");
    const bool has_coords =
        geo.contains("src") || geo.contains("relay") || geo.contains("dst");
    const bool has_dists =
        geo.contains("d_sr") || geo.contains("d_rd") || geo.contains("d_sd");
    if (has_coords == has_dists)
        throw ConfigError(
            "geometry must give exactly one of {src,relay,dst} or {d_sr,d_rd,d_sd}");
    if (has_coords) {
        reject_unknown_keys(geo, {"src", "relay", "dst"}, "geometry");
        const auto src = coordinate_pair(geo, "src");
        const auto relay = coordinate_pair(geo, "relay");
        const auto dst = coordinate_pair(geo, "dst");
        p.geometry.d_sr = distance(src, relay);
        p.geometry.d_rd = distance(relay, dst);
        p.geometry.d_sd = distance(src, dst);
    } else {
        reject_unknown_keys(geo, {"d_sr", "d_rd", "d_sd"}, "geometry");
        p.geometry.d_sr = require_number(geo, "d_sr", "geometry");
        p.geometry.d_rd = require_number(geo, "d_rd", "geometry");
        p.geometry.d_sd = require_number(geo, "d_sd", "geometry");
    }

    p.alpha = require_number(doc, "alpha", "config");
    p.noise_power = db_to_linear(require_number(doc, "noise_power_db", "config"));
    p.source_power =
        p.noise_power * db_to_linear(require_number(doc, "source_snr_db", "config"));
    p.rate_bpcu = require_number(doc, "rate_bpcu", "config");
    p.harvest_mean = db_to_linear(require_number(doc, "harvest_mean_db", "config"));

    if (!doc.contains("buffer") || !doc.at("buffer").is_object())
        throw ConfigError("config requires a 'buffer' object");
    const json& buf = doc.at("buffer");
    reject_unknown_keys(buf, {"m", "phi"}, "buffer");
    if (buf.contains("m") == buf.contains("phi"))
        throw ConfigError("buffer must give exactly one of 'm' or 'phi'");
    if (buf.contains("m")) {
        p.buffer = {BufferSpec::Kind::Draw, require_number(buf, "m", "buffer")};
    } else {
        p.buffer = {BufferSpec::Kind::StabilityFactor,
                    require_number(buf, "phi", "buffer")};
    }

    if (!doc.contains("mode") || !doc.at("mode").is_string())
        throw ConfigError("config requires 'mode'");
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode == "incremental")
        p.mode = SignallingMode::Incremental;
    else if (mode == "non_incremental")
        p.mode = SignallingMode::NonIncremental;
    else
        throw ConfigError("mode must be 'incremental' or 'non_incremental'");

    derive_constants(p);  // surface validation errors at parse time
    return p;
}

SystemParams load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const SystemParams& p) {
    json doc;
    doc["geometry"] = {{"d_sr", p.geometry.d_sr},
                       {"d_rd", p.geometry.d_rd},
                       {"d_sd", p.geometry.d_sd}};
    doc["alpha"] = p.alpha;
    doc["noise_power_db"] = 10.0 * std::log10(p.noise_power);
    doc["source_snr_db"] = 10.0 * std::log10(p.source_power / p.noise_power);
    doc["rate_bpcu"] = p.rate_bpcu;
    doc["harvest_mean_db"] = 10.0 * std::log10(p.harvest_mean);
    if (p.buffer.kind == BufferSpec::Kind::Draw)
        doc["buffer"] = {{"m", p.buffer.value}};
    else
        doc["buffer"] = {{"phi", p.buffer.value}};
    doc["mode"] = p.mode == SignallingMode::Incremental ? "incremental"
                                                        : "non_incremental";
    return doc.dump();
}

}  // namespace relaybuf
