#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "conjkit/maps.hpp"

namespace conjkit {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Driving-pair configuration. Rational coefficients are stored as "p/q" (or
 * decimal) strings and parsed exactly; quad maps take plain doubles.
 *
 * {
 *   "name": "example1",
 *   "g": [ {"type": "mobius", "a": "1", "b": "0", "c": "-1", "d": "6"}, ... ],
 *   "f": [ {"type": "quad", "a": 0.85, "b": 0.0, "c": 0.025}, ... ],
 *   "defaults": {"tol": 1e-9, "seed": 1, "eps": 0.1}
 * }
 */
struct Config {
    std::string name;
    MapSystem g, f;
    double tol = 1e-9;
    std::uint64_t seed = 1;
    double eps = 0.1;
};

namespace detail {

inline Rat rat_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field: ") + key);
    const auto& v = j.at(key);
    try {
        if (v.is_string()) return Rat::parse(v.get<std::string>());
        if (v.is_number_integer()) return Rat(v.get<long>());
        if (v.is_number_float()) {
            std::ostringstream os;
            os.precision(17);
            os << v.get<double>();
            return Rat::parse(os.str());
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad rational in '") + key + "': " + e.what());
    }
    throw ConfigError(std::string("bad rational field: ") + key);
}

inline IntervalMap parse_map(const nlohmann::json& j) {
    if (!j.contains("type")) throw ConfigError("map record lacks a type");
    std::string type = j.at("type").get<std::string>();
    if (type == "mobius") {
        return MobiusMap{rat_field(j, "a"), rat_field(j, "b"), rat_field(j, "c"),
                         rat_field(j, "d")};
    }
    if (type == "affine") {
        return AffineMap{rat_field(j, "slope"), rat_field(j, "intercept")};
    }
    if (type == "quad") {
        QuadMap q;
        q.a = j.at("a").get<double>();
        q.b = j.at("b").get<double>();
        q.c = j.at("c").get<double>();
        return q;
    }
    throw ConfigError("unknown map type: " + type);
}

inline nlohmann::json map_to_json(const IntervalMap& m) {
    nlohmann::json j;
    if (auto* mo = std::get_if<MobiusMap>(&m)) {
        j["type"] = "mobius";
        j["a"] = mo->a.str();
        j["b"] = mo->b.str();
        j["c"] = mo->c.str();
        j["d"] = mo->d.str();
    } else if (auto* af = std::get_if<AffineMap>(&m)) {
        j["type"] = "affine";
        j["slope"] = af->slope.str();
        j["intercept"] = af->intercept.str();
    } else {
        const auto& q = std::get<QuadMap>(m);
        j["type"] = "quad";
        j["a"] = q.a;
        j["b"] = q.b;
        j["c"] = q.c;
    }
    return j;
}

inline MapSystem parse_system(const nlohmann::json& arr, const char* which) {
    if (!arr.is_array() || arr.size() < 2)
        throw ConfigError(std::string(which) + ": need an array of at least two maps");
    MapSystem sys;
    for (const auto& j : arr) sys.maps.push_back(parse_map(j));
    return sys;
}

}  // namespace detail

inline Config parse_config(const nlohmann::json& j) {
    Config cfg;
    cfg.name = j.value("name", "unnamed");
    if (!j.contains("g")) throw ConfigError("config lacks the g system");
    cfg.g = detail::parse_system(j.at("g"), "g");
    if (j.contains("f"))
        cfg.f = detail::parse_system(j.at("f"), "f");
    else
        cfg.f = cfg.g;
    if (j.contains("defaults")) {
        const auto& d = j.at("defaults");
        cfg.tol = d.value("tol", cfg.tol);
        cfg.seed = d.value("seed", cfg.seed);
        cfg.eps = d.value("eps", cfg.eps);
    }
    if (cfg.f.N() != cfg.g.N())
        throw ConfigError("f and g must have the same number of maps");
    return cfg;
}

inline Config parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline nlohmann::json config_to_json(const Config& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    for (const auto& m : cfg.g.maps) j["g"].push_back(detail::map_to_json(m));
    for (const auto& m : cfg.f.maps) j["f"].push_back(detail::map_to_json(m));
    j["defaults"] = {{"tol", cfg.tol}, {"seed", cfg.seed}, {"eps", cfg.eps}};
    return j;
}

}  // namespace conjkit
