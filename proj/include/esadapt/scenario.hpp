#pragma once

// Named scenario presets and the JSON configuration schema.
//
// A configuration document is a JSON object whose keys override the chosen
// preset field by field; `--set path.to.key=value` applies the same override
// from the command line. Unknown keys and type mismatches raise SchemaError,
// invariant breaches raise ValidationError.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "esadapt/errors.hpp"
#include "esadapt/sim.hpp"

namespace esadapt {

using json = nlohmann::json;

struct Scenario {
    std::string name;
    SimConfig sim;
    std::optional<Vec2> synthetic_target;  // set only for the plant-free quadratic benchmark

    [[nodiscard]] bool synthetic() const { return synthetic_target.has_value(); }

    void validate() const {
        if (synthetic()) {
            sim.mes.validate();
            if (sim.iterations < 1) throw ValidationError("iterations must be >= 1");
            if (sim.mes.channels() != 2) throw ValidationError("mes must have two channels");
            if (sim.mes.t_f != sim.t_f) throw ValidationError("mes.t_f must equal t_f");
            if (!synthetic_target->allFinite()) throw ValidationError("synthetic.target must be finite");
        } else {
            sim.validate();
        }
    }
};

struct PresetInfo {
    std::string_view name;
    std::string_view provenance;
};

inline constexpr std::array<PresetInfo, 6> kPresets{{
    {"nominal", "uncertainty-free arm, nominal feedback-linearizing law only"},
    {"state_dep_case2",
     "Table 2: Q1=Q2=5, a=(0.05,0.04), w=(7.4,7.5), t_f=4; Delta=diag(-1,-3) on gravity"},
    {"timevar_case1",
     "Table 3: Q1=Q2=0.325, alpha=kappa=(0.01,0.01), w=(9.9,9.8), t_f=4; "
     "Delta1=1-0.14 sin(0.01t), Delta2=1-0.12 cos(0.01t)"},
    {"timevar_case2", "Table 3 estimator tuning; Delta(t) of the case-1 benchmark scaling G(q), case-2 robust law"},
    {"timevar_case3",
     "Table 2 estimator tuning; Delta=diag(-1,-3) on G(q)+eta(t), eta=0.1(sin 0.5t, cos 0.5t), C1=0.1"},
    {"synthetic_quadratic",
     "Table 2 estimator tuning on J=||est-(-1,-3)||^2, start (-0.7,-3.3), no plant"},
}};

inline std::string preset_names() {
    std::string out;
    for (const auto& p : kPresets) {
        if (!out.empty()) out += "|";
        out += p.name;
    }
    return out;
}

namespace presets {

inline MesConfig table2_mes() {
    return {MesVariant::DiscreteMes, {0.05, 0.04}, {7.4, 7.5}, {}, 4.0, {}};
}

inline MesConfig table3_mes() {
    return {MesVariant::DiscreteDynamic, {0.01, 0.01}, {9.9, 9.8}, {0.01, 0.01}, 4.0, {}};
}

inline std::array<Waveform, 2> timevarying_truth() {
    return {Waveform::sine(1.0, -0.14, 0.01), Waveform::cosine(1.0, -0.12, 0.01)};
}

}  // namespace presets

/// Preset by name; the single source of the benchmark table values.
inline Scenario make_preset(std::string_view name) {
    Scenario s;
    s.name = std::string(name);
    SimConfig& c = s.sim;
    c.t_f = 4.0;
    c.dt = 1e-3;
    if (name == "nominal") {
        c.iterations = 3;
        c.robust = RobustCase::none();
        c.uncertainty = NoUncertainty{};
        c.mes = presets::table2_mes();
        c.cost = {5.0, 5.0};
    } else if (name == "state_dep_case2") {
        c.dt = 1e-4;
        c.iterations = 100;
        c.robust = RobustCase::case2();
        c.uncertainty = GravityUncertainty::constant(-1.0, -3.0);
        c.mes = presets::table2_mes();
        c.cost = {5.0, 5.0};
    } else if (name == "timevar_case1") {
        c.iterations = 100;
        c.robust = RobustCase::case1();
        c.uncertainty = TimeVaryingUncertainty{presets::timevarying_truth()};
        c.mes = presets::table3_mes();
        c.cost = {0.325, 0.325};
    } else if (name == "timevar_case2") {
        c.dt = 1e-4;
        c.iterations = 100;
        c.robust = RobustCase::case2();
        c.uncertainty = GravityUncertainty{presets::timevarying_truth()};
        c.mes = presets::table3_mes();
        c.cost = {0.325, 0.325};
    } else if (name == "timevar_case3") {
        c.dt = 1e-4;
        c.iterations = 100;
        c.robust = RobustCase::case3(0.1);
        MixedUncertainty m;
        m.delta << -1.0, 0.0, 0.0, -3.0;
        m.state_term = MixedUncertainty::StateTerm::Gravity;
        m.eta = {Waveform::sine(0.0, 0.1, 0.5), Waveform::cosine(0.0, 0.1, 0.5)};
        m.c1 = 0.1;
        c.uncertainty = m;
        c.mes = presets::table2_mes();
        c.cost = {5.0, 5.0};
    } else if (name == "synthetic_quadratic") {
        c.iterations = 500;
        c.robust = RobustCase::none();
        c.uncertainty = NoUncertainty{};
        c.mes = presets::table2_mes();
        c.mes.initial = {-0.7, -3.3};
        c.cost = {1.0, 1.0};
        s.synthetic_target = Vec2{-1.0, -3.0};
    } else {
        throw SchemaError("unknown scenario '" + std::string(name) + "' (expected " + preset_names() + ")");
    }
    return s;
}

// --- JSON serialization ------------------------------------------------------

namespace detail {

inline json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json waveform_json(const Waveform& w) {
    if (w.kind == Waveform::Kind::Constant) return w.offset;
    return {{"kind", std::string(to_string(w.kind))},
            {"offset", w.offset},
            {"amplitude", w.amplitude},
            {"frequency", w.frequency}};
}

inline json uncertainty_json(const UncertaintySpec& unc) {
    struct Visitor {
        json operator()(const NoUncertainty&) const { return {{"kind", "none"}}; }
        json operator()(const TimeVaryingUncertainty& u) const {
            return {{"kind", "time_varying"}, {"delta", {waveform_json(u.delta[0]), waveform_json(u.delta[1])}}};
        }
        json operator()(const GravityUncertainty& u) const {
            return {{"kind", "gravity"}, {"delta", {waveform_json(u.diagonal[0]), waveform_json(u.diagonal[1])}}};
        }
        json operator()(const MixedUncertainty& u) const {
            return {{"kind", "mixed"},
                    {"delta", {{u.delta(0, 0), u.delta(0, 1)}, {u.delta(1, 0), u.delta(1, 1)}}},
                    {"state_term", u.state_term == MixedUncertainty::StateTerm::Gravity ? "gravity" : "zero"},
                    {"eta", {waveform_json(u.eta[0]), waveform_json(u.eta[1])}},
                    {"c1", u.c1}};
        }
    };
    return std::visit(Visitor{}, unc);
}

}  // namespace detail

inline json to_json(const Scenario& s) {
    const SimConfig& c = s.sim;
    json gains = json::array();
    for (const auto& row : c.gains.rows) gains.push_back(detail::vec_json(row));
    json j = {
        {"scenario", s.name},
        {"iterations", c.iterations},
        {"dt", c.dt},
        {"t_f", c.t_f},
        {"reference", std::string(to_string(c.reference))},
        {"sign_smoothing", c.sign.epsilon},
        {"blowup_threshold", c.blowup_threshold},
        {"params",
         {{"m1", c.params.m1},
          {"m2", c.params.m2},
          {"l1", c.params.l1},
          {"l2", c.params.l2},
          {"lc1", c.params.lc1},
          {"lc2", c.params.lc2},
          {"I1", c.params.I1},
          {"I2", c.params.I2},
          {"g", c.params.g}}},
        {"initial_state", nullptr},
        {"gains", gains},
        {"robust", {{"case", std::string(to_string(c.robust.kind))}, {"c1", c.robust.c1}}},
        {"cost", {{"q1", c.cost.q1}, {"q2", c.cost.q2}}},
        {"uncertainty", detail::uncertainty_json(c.uncertainty)},
        {"mes",
         {{"variant", std::string(to_string(c.mes.variant))},
          {"amplitude", c.mes.amplitude},
          {"frequency", c.mes.frequency},
          {"gain", c.mes.gain},
          {"initial", c.mes.initial}}},
    };
    if (c.initial_state) {
        j["initial_state"] = {{"q", detail::vec_json(c.initial_state->q)},
                              {"qdot", detail::vec_json(c.initial_state->qdot)}};
    }
    if (s.synthetic_target) j["synthetic"] = {{"target", detail::vec_json(*s.synthetic_target)}};
    return j;
}

// --- strict JSON reading -----------------------------------------------------

namespace detail {

/// Reads one JSON object, rejecting keys that are not consumed.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw SchemaError("key '" + display(path_) + "': expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }

    const json& at(const std::string& key) {
        seen_.push_back(key);
        return obj_.at(key);
    }

    [[nodiscard]] std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number()) throw SchemaError("key '" + key_path(key) + "': expected a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_integer()) throw SchemaError("key '" + key_path(key) + "': expected an integer");
        return v.get<int>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_string()) throw SchemaError("key '" + key_path(key) + "': expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
        if (!has(key)) return fallback;
        return number_array(at(key), key_path(key));
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
                throw SchemaError("unknown key '" + key_path(it.key()) + "'");
            }
        }
    }

    static std::vector<double> number_array(const json& v, const std::string& path) {
        if (!v.is_array()) throw SchemaError("key '" + path + "': expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw SchemaError("key '" + path + "': expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    static Vec2 vec2(const json& v, const std::string& path) {
        const auto a = number_array(v, path);
        if (a.size() != 2) throw SchemaError("key '" + path + "': expected 2 numbers");
        return {a[0], a[1]};
    }

private:
    static std::string display(const std::string& p) { return p.empty() ? "<root>" : p; }

    const json& obj_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline Waveform read_waveform(const json& v, const std::string& path) {
    if (v.is_number()) return Waveform::constant(v.get<double>());
    ObjectReader r(v, path);
    Waveform w;
    w.kind = waveform_kind_from_string(r.string("kind", "constant"));
    w.offset = r.number("offset", 0.0);
    w.amplitude = r.number("amplitude", 0.0);
    w.frequency = r.number("frequency", 0.0);
    r.finish();
    return w;
}

inline std::array<Waveform, 2> read_waveform_pair(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw SchemaError("key '" + path + "': expected 2 waveforms");
    return {read_waveform(v[0], path + ".0"), read_waveform(v[1], path + ".1")};
}

inline UncertaintySpec read_uncertainty(const json& v, const std::string& path) {
    ObjectReader r(v, path);
    const std::string kind = r.string("kind", "none");
    UncertaintySpec out;
    if (kind == "none") {
        out = NoUncertainty{};
    } else if (kind == "time_varying") {
        if (!r.has("delta")) throw SchemaError("key '" + r.key_path("delta") + "' is required");
        out = TimeVaryingUncertainty{read_waveform_pair(r.at("delta"), r.key_path("delta"))};
    } else if (kind == "gravity") {
        if (!r.has("delta")) throw SchemaError("key '" + r.key_path("delta") + "' is required");
        out = GravityUncertainty{read_waveform_pair(r.at("delta"), r.key_path("delta"))};
    } else if (kind == "mixed") {
        MixedUncertainty m;
        if (!r.has("delta") || !r.has("eta")) {
            throw SchemaError("key '" + path + "': mixed uncertainty requires delta and eta");
        }
        const json& d = r.at("delta");
        if (!d.is_array() || d.size() != 2) throw SchemaError("key '" + r.key_path("delta") + "': expected 2x2");
        for (int i = 0; i < 2; ++i) m.delta.row(i) = ObjectReader::vec2(d[i], r.key_path("delta")).transpose();
        const std::string term = r.string("state_term", "gravity");
        if (term == "gravity") {
            m.state_term = MixedUncertainty::StateTerm::Gravity;
        } else if (term == "zero") {
            m.state_term = MixedUncertainty::StateTerm::Zero;
        } else {
            throw SchemaError("key '" + r.key_path("state_term") + "': expected gravity|zero");
        }
        m.eta = read_waveform_pair(r.at("eta"), r.key_path("eta"));
        m.c1 = r.number("c1", 0.0);
        out = m;
    } else {
        throw SchemaError("key '" + r.key_path("kind") + "': unknown uncertainty kind '" + kind +
                          "' (expected none|time_varying|gravity|mixed)");
    }
    r.finish();
    return out;
}

}  // namespace detail

/// Strictly parses a fully merged configuration document.
inline Scenario scenario_from_json(const json& doc) {
    using detail::ObjectReader;
    ObjectReader r(doc, "");
    if (!r.has("scenario")) throw SchemaError("key 'scenario' is required");
    Scenario s = make_preset(r.string("scenario", ""));
    SimConfig& c = s.sim;

    c.iterations = r.integer("iterations", c.iterations);
    c.dt = r.number("dt", c.dt);
    c.t_f = r.number("t_f", c.t_f);
    c.mes.t_f = c.t_f;
    c.reference = reference_kind_from_string(r.string("reference", std::string(to_string(c.reference))));
    c.sign.epsilon = r.number("sign_smoothing", c.sign.epsilon);
    c.blowup_threshold = r.number("blowup_threshold", c.blowup_threshold);

    if (r.has("params")) {
        ObjectReader p(r.at("params"), "params");
        c.params.m1 = p.number("m1", c.params.m1);
        c.params.m2 = p.number("m2", c.params.m2);
        c.params.l1 = p.number("l1", c.params.l1);
        c.params.l2 = p.number("l2", c.params.l2);
        c.params.lc1 = p.number("lc1", c.params.lc1);
        c.params.lc2 = p.number("lc2", c.params.lc2);
        c.params.I1 = p.number("I1", c.params.I1);
        c.params.I2 = p.number("I2", c.params.I2);
        c.params.g = p.number("g", c.params.g);
        p.finish();
    }
    if (r.has("initial_state")) {
        const json& v = r.at("initial_state");
        if (v.is_null()) {
            c.initial_state.reset();
        } else {
            ObjectReader p(v, "initial_state");
            PlantState st = c.resolved_initial_state();
            if (p.has("q")) st.q = ObjectReader::vec2(p.at("q"), "initial_state.q");
            if (p.has("qdot")) st.qdot = ObjectReader::vec2(p.at("qdot"), "initial_state.qdot");
            p.finish();
            c.initial_state = st;
        }
    }
    if (r.has("gains")) {
        const json& v = r.at("gains");
        if (!v.is_array()) throw SchemaError("key 'gains': expected an array of gain rows");
        c.gains.rows.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto row = ObjectReader::number_array(v[i], "gains." + std::to_string(i));
            c.gains.rows.emplace_back(Eigen::Map<const VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
        }
    }
    if (r.has("robust")) {
        ObjectReader p(r.at("robust"), "robust");
        c.robust.kind = robust_kind_from_string(p.string("case", std::string(to_string(c.robust.kind))));
        c.robust.c1 = p.number("c1", c.robust.c1);
        p.finish();
    }
    if (r.has("cost")) {
        ObjectReader p(r.at("cost"), "cost");
        c.cost.q1 = p.number("q1", c.cost.q1);
        c.cost.q2 = p.number("q2", c.cost.q2);
        p.finish();
    }
    if (r.has("uncertainty")) c.uncertainty = detail::read_uncertainty(r.at("uncertainty"), "uncertainty");
    if (r.has("mes")) {
        ObjectReader p(r.at("mes"), "mes");
        c.mes.variant = mes_variant_from_string(p.string("variant", std::string(to_string(c.mes.variant))));
        c.mes.amplitude = p.numbers("amplitude", c.mes.amplitude);
        c.mes.frequency = p.numbers("frequency", c.mes.frequency);
        c.mes.gain = p.numbers("gain", c.mes.gain);
        c.mes.initial = p.numbers("initial", c.mes.initial);
        p.finish();
    }
    if (r.has("synthetic")) {
        if (!s.synthetic()) throw SchemaError("key 'synthetic' only applies to the synthetic_quadratic scenario");
        ObjectReader p(r.at("synthetic"), "synthetic");
        if (p.has("target")) s.synthetic_target = ObjectReader::vec2(p.at("target"), "synthetic.target");
        p.finish();
    }
    r.finish();
    return s;
}

/// Objects merge key by key; any other value replaces. An override that
/// changes an object's "kind" replaces the object wholesale.
inline void merge_into(json& base, const json& patch) {
    if (!base.is_object() || !patch.is_object()) {
        base = patch;
        return;
    }
    if (patch.contains("kind") && base.contains("kind") && patch["kind"] != base["kind"]) {
        base = patch;
        return;
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
            merge_into(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
}

/// Applies `path.to.key=value`. The value is read as JSON when it parses,
/// otherwise as a bare string. Numeric segments index into arrays.
inline void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw SchemaError("override '" + std::string(assignment) + "' must have the form key=value");
    }
    const std::string path(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) throw SchemaError("override key '" + path + "' has an empty segment");
        json* next = nullptr;
        if (node->is_array()) {
            const bool digits = seg.find_first_not_of("0123456789") == std::string::npos;
            const std::size_t idx = digits ? std::stoul(seg) : node->size();
            if (!digits || idx >= node->size()) {
                throw SchemaError("override key '" + path + "': index '" + seg + "' out of range");
            }
            next = &(*node)[idx];
        } else {
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) throw SchemaError("override key '" + path + "': '" + seg + "' is not an object");
            next = &(*node)[seg];
        }
        if (dot == std::string::npos) {
            if (next->is_object() && value.is_object()) {
                merge_into(*next, value);
            } else {
                *next = value;
            }
            return;
        }
        node = next;
        start = dot + 1;
    }
}

/// Preset (from `scenario_flag` or the document's "scenario" key) overlaid
/// with `doc` and then with each `--set` assignment, parsed and (unless
/// `check` is false) validated.
inline Scenario parse_config(const json& doc, const std::optional<std::string>& scenario_flag = std::nullopt,
                             const std::vector<std::string>& overrides = {}, bool check = true) {
    if (!doc.is_null() && !doc.is_object()) throw SchemaError("configuration document must be a JSON object");
    std::string name;
    if (scenario_flag) {
        name = *scenario_flag;
    } else if (doc.is_object() && doc.contains("scenario")) {
        if (!doc["scenario"].is_string()) throw SchemaError("key 'scenario': expected a string");
        name = doc["scenario"].get<std::string>();
    } else {
        throw SchemaError("no scenario given (use --scenario or the 'scenario' key)");
    }
    json merged = to_json(make_preset(name));
    if (doc.is_object()) merge_into(merged, doc);
    merged["scenario"] = name;
    for (const auto& o : overrides) apply_override(merged, o);
    Scenario s = scenario_from_json(merged);
    if (check) s.validate();
    return s;
}

inline Scenario parse_config_text(std::string_view text, const std::optional<std::string>& scenario_flag = std::nullopt,
                                  const std::vector<std::string>& overrides = {}) {
    json doc;
    if (text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("configuration is not valid JSON: ") + e.what());
        }
    }
    return parse_config(doc, scenario_flag, overrides);
}

/// One line per configuration key, for --help.
inline constexpr std::string_view kConfigKeyHelp = R"(Configuration keys (JSON document, or --set key=value):
  scenario            preset name: nominal|state_dep_case2|timevar_case1|timevar_case2|timevar_case3|synthetic_quadratic
  iterations          number of tracking cycles (estimator updates)
  dt                  RK4 step [s]; must divide t_f
  t_f                 cycle duration [s] (also the estimator period)
  reference           desired trajectory: sigmoid (q_d = 1/(1+exp(-t)) on both joints)
  sign_smoothing      0 = exact signum; eps > 0 = sat(x/eps) boundary layer
  blowup_threshold    abort an episode when any |state| exceeds this value
  params.{m1,m2,l1,l2,lc1,lc2,I1,I2,g}   arm constants (SI units)
  initial_state       null (start on the reference) or {"q":[..], "qdot":[..]}
  gains               [[K1_1, K1_2], [K2_1, K2_2]] error-polynomial gains
  robust.case         none|case1|case2|case3
  robust.c1           bound on ||eta(t)|| used by case3
  cost.{q1,q2}        position / velocity weights of the tracking cost
  uncertainty.kind    none|time_varying|gravity|mixed
  uncertainty.delta   time_varying/gravity: 2 waveforms; mixed: 2x2 matrix
  uncertainty.state_term  mixed only: gravity|zero
  uncertainty.eta     mixed only: 2 waveforms
  uncertainty.c1      mixed only: bound on ||eta(t)||
  mes.variant         discrete_mes|discrete_dynamic|continuous_mes|continuous_dynamic
  mes.amplitude       dither amplitudes a_i (alpha_i)
  mes.frequency       dither frequencies w_i [rad/s], pairwise distinct
  mes.gain            adaptation gains k_i (kappa_i), dynamic laws only
  mes.initial         starting estimate (default zeros)
  synthetic.target    synthetic_quadratic only: minimizer of the quadratic cost
Waveforms are a number (constant) or {"kind":"sine"|"cosine","offset":..,"amplitude":..,"frequency":..}.
)";

}  // namespace esadapt
