#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "shockrel/catastrophic.hpp"
#include "shockrel/cumulative.hpp"
#include "shockrel/distributions.hpp"
#include "shockrel/errors.hpp"

// JSON encodings consumed by the command-line tool.
//
//   distribution: {"type":"exponential","rate":R}
//               | {"type":"erlang","shape":M,"rate":R}        (M a JSON integer >= 1)
//               | {"type":"weibull","shape":A,"scale":B}
//
//   model file:   {"kind":"catastrophic","proc1":D,"proc2":D}
//               | {"kind":"cumulative","rate1":R,"rate2":R,"mag1":D,"mag2":D,"threshold":K}
//               | {"kind":"general_cumulative","inter1":D,"inter2":D,"mag1":D,"mag2":D,"threshold":K}
//               each optionally with "tail_epsilon" and "rel_tol".
//
// Unknown fields are rejected everywhere.

namespace shockrel {

using json = nlohmann::json;

struct NumericPolicies {
    double tail_epsilon = 1e-10;
    double rel_tol = 1e-10;
};

using AnyModel = std::variant<CatastrophicModel, CumulativeModel, GeneralCumulativeModel>;

struct ModelFile {
    AnyModel model;
    NumericPolicies policies;
};

namespace detail {

inline void only_fields(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidParameter(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw InvalidParameter("unknown field \"" + key + "\" in " + where);
    }
}

inline const json& field(const json& j, const char* name, const std::string& where) {
    const auto it = j.find(name);
    if (it == j.end()) throw InvalidParameter("missing field \"" + std::string(name) + "\" in " + where);
    return *it;
}

inline double positive_number(const json& j, const char* name, const std::string& where) {
    const json& v = field(j, name, where);
    if (!v.is_number()) throw InvalidParameter("field \"" + std::string(name) + "\" in " + where + " must be a number");
    const double d = v.get<double>();
    if (!(d > 0.0 && std::isfinite(d))) {
        throw InvalidParameter("field \"" + std::string(name) + "\" in " + where + " must be positive");
    }
    return d;
}

}  // namespace detail

inline DistributionSpec distribution_from_json(const json& j, const std::string& where = "distribution") {
    if (!j.is_object()) throw InvalidParameter(where + " must be a JSON object");
    const json& type = detail::field(j, "type", where);
    if (!type.is_string()) throw InvalidParameter("\"type\" in " + where + " must be a string");
    const auto name = type.get<std::string>();
    DistributionSpec spec;
    if (name == "exponential") {
        detail::only_fields(j, {"type", "rate"}, where);
        spec = Exponential{detail::positive_number(j, "rate", where)};
    } else if (name == "erlang") {
        detail::only_fields(j, {"type", "shape", "rate"}, where);
        const json& shape = detail::field(j, "shape", where);
        if (!shape.is_number_integer()) throw InvalidParameter("erlang shape in " + where + " must be a JSON integer");
        if (!shape.is_number_unsigned() || shape.get<std::uint64_t>() < 1) {
            throw InvalidParameter("erlang shape in " + where + " must be >= 1");
        }
        spec = Erlang{shape.get<std::uint64_t>(), detail::positive_number(j, "rate", where)};
    } else if (name == "weibull") {
        detail::only_fields(j, {"type", "shape", "scale"}, where);
        spec = Weibull{detail::positive_number(j, "shape", where), detail::positive_number(j, "scale", where)};
    } else {
        throw InvalidParameter("unknown distribution type \"" + name + "\" in " + where);
    }
    validate(spec);
    return spec;
}

inline json to_json(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> json {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Exponential>) return {{"type", "exponential"}, {"rate", d.rate}};
            else if constexpr (std::is_same_v<D, Erlang>) return {{"type", "erlang"}, {"shape", d.shape}, {"rate", d.rate}};
            else return {{"type", "weibull"}, {"shape", d.shape}, {"scale", d.scale}};
        },
        spec);
}

inline json to_json(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> json {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, CatastrophicModel>) {
                return {{"kind", "catastrophic"}, {"proc1", to_json(m.proc1)}, {"proc2", to_json(m.proc2)}};
            } else if constexpr (std::is_same_v<M, CumulativeModel>) {
                return {{"kind", "cumulative"}, {"rate1", m.rate1}, {"rate2", m.rate2}, {"mag1", to_json(m.mag1)},
                        {"mag2", to_json(m.mag2)}, {"threshold", m.threshold}};
            } else {
                return {{"kind", "general_cumulative"}, {"inter1", to_json(m.inter1)}, {"inter2", to_json(m.inter2)},
                        {"mag1", to_json(m.mag1)}, {"mag2", to_json(m.mag2)}, {"threshold", m.threshold}};
            }
        },
        model);
}

inline ModelFile model_from_json(const json& j) {
    if (!j.is_object()) throw InvalidParameter("model file must contain a JSON object");
    const json& kind_field = detail::field(j, "kind", "model");
    if (!kind_field.is_string()) throw InvalidParameter("\"kind\" must be a string");
    const auto kind = kind_field.get<std::string>();

    ModelFile out;
    if (kind == "catastrophic") {
        detail::only_fields(j, {"kind", "proc1", "proc2", "tail_epsilon", "rel_tol"}, "catastrophic model");
        CatastrophicModel m{distribution_from_json(detail::field(j, "proc1", "model"), "proc1"),
                            distribution_from_json(detail::field(j, "proc2", "model"), "proc2")};
        validate(m);
        out.model = m;
    } else if (kind == "cumulative") {
        detail::only_fields(j, {"kind", "rate1", "rate2", "mag1", "mag2", "threshold", "tail_epsilon", "rel_tol"},
                            "cumulative model");
        CumulativeModel m;
        m.rate1 = detail::positive_number(j, "rate1", "model");
        m.rate2 = detail::positive_number(j, "rate2", "model");
        m.mag1 = distribution_from_json(detail::field(j, "mag1", "model"), "mag1");
        m.mag2 = distribution_from_json(detail::field(j, "mag2", "model"), "mag2");
        m.threshold = detail::positive_number(j, "threshold", "model");
        validate(m);
        out.model = m;
    } else if (kind == "general_cumulative") {
        detail::only_fields(j, {"kind", "inter1", "inter2", "mag1", "mag2", "threshold", "tail_epsilon", "rel_tol"},
                            "general_cumulative model");
        GeneralCumulativeModel g;
        g.inter1 = distribution_from_json(detail::field(j, "inter1", "model"), "inter1");
        g.inter2 = distribution_from_json(detail::field(j, "inter2", "model"), "inter2");
        g.mag1 = distribution_from_json(detail::field(j, "mag1", "model"), "mag1");
        g.mag2 = distribution_from_json(detail::field(j, "mag2", "model"), "mag2");
        g.threshold = detail::positive_number(j, "threshold", "model");
        validate(g);
        out.model = g;
    } else {
        throw InvalidParameter("unknown model kind \"" + kind + "\"");
    }

    if (j.contains("tail_epsilon")) out.policies.tail_epsilon = detail::positive_number(j, "tail_epsilon", "model");
    if (j.contains("rel_tol")) out.policies.rel_tol = detail::positive_number(j, "rel_tol", "model");
    validate(TruncationPolicy{out.policies.tail_epsilon});
    validate(QuadraturePolicy{out.policies.rel_tol});
    return out;
}

inline ModelFile parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidParameter(std::string("malformed model JSON: ") + e.what());
    }
    return model_from_json(j);
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open model file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

}  // namespace shockrel
