#include <string>

#include <gtest/gtest.h>

#include "esadapt/scenario.hpp"

using namespace esadapt;

namespace {

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Presets, StateDependentTuning) {
    const auto s = parse_config(json(), "state_dep_case2");
    const auto& m = s.sim.mes;
    EXPECT_EQ(m.variant, MesVariant::DiscreteMes);
    EXPECT_EQ(m.amplitude, (std::vector<double>{0.05, 0.04}));
    EXPECT_EQ(m.frequency, (std::vector<double>{7.4, 7.5}));
    EXPECT_EQ(m.t_f, 4.0);
    EXPECT_EQ(s.sim.cost, (CostWeights{5.0, 5.0}));
    EXPECT_EQ(s.sim.robust.kind, RobustCase::Kind::Case2);
    EXPECT_EQ(std::get<GravityUncertainty>(s.sim.uncertainty), GravityUncertainty::constant(-1.0, -3.0));
}

TEST(Presets, TimeVaryingTuning) {
    const auto s = make_preset("timevar_case1");
    const auto& m = s.sim.mes;
    EXPECT_EQ(m.variant, MesVariant::DiscreteDynamic);
    EXPECT_EQ(m.amplitude, (std::vector<double>{0.01, 0.01}));
    EXPECT_EQ(m.gain, (std::vector<double>{0.01, 0.01}));
    EXPECT_EQ(m.frequency, (std::vector<double>{9.9, 9.8}));
    EXPECT_EQ(s.sim.cost, (CostWeights{0.325, 0.325}));
    const auto& tv = std::get<TimeVaryingUncertainty>(s.sim.uncertainty);
    EXPECT_EQ(tv.delta[0], Waveform::sine(1.0, -0.14, 0.01));
    EXPECT_EQ(tv.delta[1], Waveform::cosine(1.0, -0.12, 0.01));
}

TEST(Presets, ArmConstants) {
    const ManipulatorParams p = make_preset("nominal").sim.params;
    EXPECT_EQ(p.m1, 10.0);
    EXPECT_EQ(p.m2, 5.0);
    EXPECT_EQ(p.l1, 1.0);
    EXPECT_EQ(p.l2, 1.0);
    EXPECT_EQ(p.lc1, 0.5);
    EXPECT_EQ(p.lc2, 0.5);
    EXPECT_DOUBLE_EQ(p.I1, 10.0 / 12.0);
    EXPECT_DOUBLE_EQ(p.I2, 5.0 / 12.0);
    EXPECT_EQ(p.g, 9.8);
}

TEST(Presets, AllValidateAndRoundTrip) {
    for (const auto& info : kPresets) {
        const Scenario s = make_preset(info.name);
        EXPECT_NO_THROW(s.validate()) << info.name;
        const json j = to_json(s);
        EXPECT_EQ(to_json(scenario_from_json(j)), j) << info.name;
        for (auto it = j.begin(); it != j.end(); ++it) {
            EXPECT_NE(kConfigKeyHelp.find(it.key()), std::string_view::npos) << "help lacks key " << it.key();
        }
    }
}

TEST(Presets, UnknownName) {
    EXPECT_THROW(make_preset("fig9"), SchemaError);
    EXPECT_NE(message_of([] { parse_config(json(), "fig9"); }).find("state_dep_case2"), std::string::npos);
}

TEST(Config, EqualFrequenciesNamed) {
    const json doc = {{"mes", {{"frequency", {7.0, 7.0}}}}};
    try {
        parse_config(doc, "state_dep_case2");
        FAIL() << "accepted equal dither frequencies";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("pairwise distinct"), std::string::npos);
    }
}

TEST(Config, OverrideTouchesOnlyItsKey) {
    const Scenario base = make_preset("state_dep_case2");
    const Scenario s = parse_config(json(), "state_dep_case2", {"dt=5e-4"});
    EXPECT_EQ(s.sim.dt, 5e-4);
    json expected = to_json(base);
    expected["dt"] = 5e-4;
    EXPECT_EQ(to_json(s), expected);
}

TEST(Config, DocumentThenOverrides) {
    const json doc = {{"scenario", "timevar_case1"}, {"iterations", 7}, {"cost", {{"q1", 2.0}}}};
    const Scenario s = parse_config(doc, std::nullopt, {"iterations=9", "gains.1.0=2"});
    EXPECT_EQ(s.name, "timevar_case1");
    EXPECT_EQ(s.sim.iterations, 9);
    EXPECT_EQ(s.sim.cost.q1, 2.0);
    EXPECT_EQ(s.sim.cost.q2, 0.325);
    EXPECT_EQ(s.sim.gains.rows[1](0), 2.0);
    EXPECT_EQ(s.sim.gains.rows[0](0), 1.0);
}

TEST(Config, FlagBeatsDocumentScenario) {
    const Scenario s = parse_config(json{{"scenario", "nominal"}}, "timevar_case1");
    EXPECT_EQ(s.name, "timevar_case1");
}

TEST(Config, ChangingUncertaintyKindReplacesObject) {
    const Scenario s = parse_config(json(), "state_dep_case2", {"uncertainty={\"kind\":\"none\"}"});
    EXPECT_TRUE(std::holds_alternative<NoUncertainty>(s.sim.uncertainty));
    const json mixed = {{"uncertainty",
                         {{"kind", "mixed"},
                          {"delta", {{-1.0, 0.0}, {0.0, -2.0}}},
                          {"state_term", "zero"},
                          {"eta", {0.05, {{"kind", "sine"}, {"offset", 0.0}, {"amplitude", 0.05}, {"frequency", 1.0}}}},
                          {"c1", 0.2}}}};
    const Scenario m = parse_config(mixed, "timevar_case3");
    const auto& u = std::get<MixedUncertainty>(m.sim.uncertainty);
    EXPECT_EQ(u.state_term, MixedUncertainty::StateTerm::Zero);
    EXPECT_EQ(u.eta[1], Waveform::sine(0.0, 0.05, 1.0));
    EXPECT_EQ(u.delta(1, 1), -2.0);
}

TEST(Config, StrictKeysAndTypes) {
    EXPECT_NE(message_of([] { parse_config(json{{"mes", {{"amplitud", {1, 2}}}}}, "nominal"); }).find("mes.amplitud"),
              std::string::npos);
    EXPECT_THROW(parse_config(json{{"iterations", "ten"}}, "nominal"), SchemaError);
    EXPECT_THROW(parse_config(json{{"iterations", 2.5}}, "nominal"), SchemaError);
    EXPECT_THROW(parse_config(json{{"robust", {{"case", "case7"}}}}, "nominal"), SchemaError);
    EXPECT_THROW(parse_config(json{{"synthetic", {{"target", {0, 0}}}}}, "nominal"), SchemaError);
    EXPECT_THROW(parse_config(json::array(), "nominal"), SchemaError);
    EXPECT_THROW(parse_config(json()), SchemaError);
}

TEST(Config, OverrideGrammar) {
    EXPECT_THROW(parse_config(json(), "nominal", {"dt"}), SchemaError);
    EXPECT_THROW(parse_config(json(), "nominal", {"gains.5.0=1"}), SchemaError);
    EXPECT_THROW(parse_config(json(), "nominal", {"dt.x=1"}), SchemaError);
    const Scenario s = parse_config(json(), "nominal", {"mes.variant=continuous_mes", "sign_smoothing=0.01"});
    EXPECT_EQ(s.sim.mes.variant, MesVariant::ContinuousMes);
    EXPECT_EQ(s.sim.sign.epsilon, 0.01);
}

TEST(Config, SemanticChecks) {
    EXPECT_THROW(parse_config(json(), "nominal", {"dt=0.003"}), ValidationError);
    EXPECT_THROW(parse_config(json(), "nominal", {"gains.0.0=-1"}), ValidationError);
    EXPECT_THROW(parse_config(json(), "nominal", {"iterations=0"}), ValidationError);
    EXPECT_THROW(parse_config(json(), "timevar_case3", {"uncertainty.c1=0.05"}), ValidationError);
    EXPECT_NO_THROW(parse_config(json(), "nominal", {"gains.0.0=-1"}, false));
}

TEST(Config, TextParsing) {
    EXPECT_EQ(parse_config_text("  \n", "nominal").name, "nominal");
    EXPECT_EQ(parse_config_text(R"({"scenario": "timevar_case2", "iterations": 2})").sim.iterations, 2);
    EXPECT_THROW(parse_config_text("{ not json", "nominal"), SchemaError);
}

TEST(Config, InitialStateKey) {
    const json doc = {{"initial_state", {{"q", {0.1, 0.2}}, {"qdot", {0.0, -0.1}}}}};
    const Scenario s = parse_config(doc, "nominal");
    ASSERT_TRUE(s.sim.initial_state.has_value());
    EXPECT_EQ(s.sim.initial_state->q, Vec2(0.1, 0.2));
    EXPECT_EQ(to_json(s)["initial_state"]["qdot"], json({0.0, -0.1}));
}
