#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mgap/config.hpp"
#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"
#include "mgap/stiffness.hpp"
#include "mgap/toml.hpp"

using namespace mgap;

TEST_CASE("sub_seed: stable, label- and index-sensitive") {
    CHECK(sub_seed(1, "a") == sub_seed(1, "a"));
    CHECK(sub_seed(1, "a") != sub_seed(1, "b"));
    CHECK(sub_seed(1, "a", 0) != sub_seed(1, "a", 1));
    CHECK(sub_seed(1, "a") != sub_seed(2, "a"));
}

TEST_CASE("toml: values, arrays, comments, errors") {
    auto t = toml::parse(
        "top = 1\n"
        "[env]\n"
        "kp = [200.0, 50] # comment\n"
        "name = \"x # not a comment\"\n"
        "flag = true\n"
        "dt = 1.5e-2\n");
    CHECK(t.get_int("top") == 1);
    auto kp = t.get_double_array("env.kp");
    CHECK(kp.size() == 2);
    CHECK(kp[1] == 50.0);
    CHECK(t.get_string("env.name") == "x # not a comment");
    CHECK(t.get_bool("env.flag"));
    CHECK(t.get_double("env.dt") == doctest::Approx(0.015));
    CHECK_THROWS_AS(toml::parse("bad line without equals\n"), ParseError);
    CHECK_THROWS_AS(toml::parse("a = 1\na = 2\n"), ParseError);
    CHECK_THROWS_AS(t.get_double("missing.key"), ConfigError);
}

TEST_CASE("config: defaults round-trip through TOML text") {
    std::string text = default_config_toml();
    RunConfig c = RunConfig::from_toml(toml::parse(text));
    CHECK(c.env.kp.x() == 200.0);
    CHECK(c.env.dt == doctest::Approx(1.0 / 60.0));
    CHECK(c.policy.horizon == 30);
    CHECK(c.task("button").f_trig == 10.0);
}

TEST_CASE("config: strict parsing rejects unknown keys") {
    CHECK_THROWS_WITH_AS(RunConfig::from_toml(toml::parse("[env]\nkp_typo = [1, 2]\n")),
                         doctest::Contains("unknown config key"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_toml(toml::parse("[nosuch]\nx = 1\n")), ConfigError);
}

TEST_CASE("config: per-task policy shapes") {
    RunConfig c = RunConfig::defaults();
    PolicyConfig quasi = c.policy_for(TaskKind::kButton, PolicyMode::kS2M);
    CHECK(quasi.t_obs == 1);
    CHECK_FALSE(quasi.use_inpainting);
    PolicyConfig dyn = c.policy_for(TaskKind::kConveyorSort, PolicyMode::kSM2M);
    CHECK(dyn.t_obs == 9);
    CHECK(dyn.use_inpainting);
    PolicyConfig dyn_s2m = c.policy_for(TaskKind::kConveyorSort, PolicyMode::kS2M);
    CHECK_FALSE(dyn_s2m.use_inpainting);
}

TEST_CASE("fit_line: exact synthetic line recovers slope and R^2 = 1") {
    std::vector<double> x, y;
    for (int i = 1; i <= 8; ++i) {
        x.push_back(0.001 * i);
        y.push_back(3500.0 * 0.001 * i);
    }
    LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(3500.0));
    CHECK(f.intercept == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(f.r2 == doctest::Approx(1.0));
}
