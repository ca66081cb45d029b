#include <doctest.h>

#include <cmath>

#include "mgap/episode.hpp"
#include "mgap/errors.hpp"
#include "mgap/oracle.hpp"

using namespace mgap;

TEST_CASE("oracle_command: free-space fixed point emits the waypoint") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kButton);
    EnvState env = init_env(p, task, 0);
    TaskGoal goal;
    goal.phase = Phase::kApproach;
    goal.waypoint = env.robot.pos;  // slave already there
    OperatorParams op;
    MasterCommand cmd = oracle_command(env, goal, op);
    CHECK((cmd.pos - goal.waypoint).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("oracle_command: press commands the virtual penetration F/khat") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kButton);
    EnvState env = init_env(p, task, 0);
    env.robot.pos = Vec2(0.50, 0.2);  // at the surface
    TaskGoal goal;
    goal.phase = Phase::kPress;
    goal.waypoint = Vec2(0.50, 0.2);
    goal.desired_force = 12.0;
    OperatorParams op;  // khat = Kp = 200
    MasterCommand cmd = oracle_command(env, goal, op);
    CHECK(cmd.pos.x() == doctest::Approx(0.56));
    CHECK(cmd.pos.y() == doctest::Approx(0.2));

    goal.desired_force = -1.0;
    CHECK_THROWS_AS(oracle_command(env, goal, op), ContractError);
    goal.phase = Phase::kDone;
    CHECK_THROWS_AS(oracle_command(env, goal, op), ContractError);
}

TEST_CASE("oracle_command: lift adds the gravity compensation offset") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kConveyorSort);
    EnvState env = init_env(p, task, 0);
    TaskGoal goal;
    goal.phase = Phase::kLift;
    goal.waypoint = Vec2(0.3, 0.3);
    OperatorParams op;
    op.mass_prior = 0.35;
    MasterCommand cmd = oracle_command(env, goal, op);
    CHECK(cmd.pos.y() - goal.waypoint.y() == doctest::Approx(0.35 * 9.81 / 200.0).epsilon(1e-6));
}

TEST_CASE("button press servo realizes the target force within the stiction band") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kButton).randomized(3);
    task.f_trig = 1e9;  // keep it pressing; we only probe the steady force
    OperatorParams op;
    OracleController oracle(task, op, 3);
    EnvState env = init_env(p, task, 3);
    for (int i = 0; i < 500; ++i) step(env, oracle.command(env));
    REQUIRE(oracle.phase() == Phase::kPress);
    double f = std::abs(interaction_force(env).x());
    CHECK(f >= op.button_press_f - p.stiction_f - 0.05);
    CHECK(f <= op.button_press_f + p.stiction_f + 0.05);
}

TEST_CASE("apply_intervention: prob 0 is a no-op; draws are deterministic") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kConveyorSort).randomized(5);
    EnvState env = init_env(p, task, 5);
    OperatorParams op;
    op.intervention_prob = 0.0;
    std::mt19937_64 rng(9);
    double before = env.object.pos.x();
    CHECK_FALSE(apply_intervention(env, rng, op).has_value());
    CHECK(env.object.pos.x() == before);

    op.intervention_prob = 1.0;
    std::mt19937_64 r1(9), r2(9);
    EnvState e1 = init_env(p, task, 5);
    EnvState e2 = init_env(p, task, 5);
    auto d1 = apply_intervention(e1, r1, op);
    auto d2 = apply_intervention(e2, r2, op);
    REQUIRE(d1.has_value());
    CHECK(*d1 == *d2);
    CHECK(e1.object.pos.x() == e2.object.pos.x());
    CHECK(e1.object.pos.x() != before);
}

TEST_CASE("apply_intervention: blind-slot declines while the tip is engaged") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kBlindSlot).randomized(2);
    EnvState env = init_env(p, task, 2);
    env.robot.pos = Vec2(task.plate_x + 0.01, task.slot_z);  // inside the slot
    OperatorParams op;
    op.intervention_prob = 1.0;
    std::mt19937_64 rng(4);
    CHECK_FALSE(apply_intervention(env, rng, op).has_value());
}

TEST_CASE("record_episode: button demo succeeds quickly; bad max_t rejected") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kButton).randomized(1);
    OperatorParams op;
    Episode ep = record_episode(p, task, op, 1, task.max_t);
    CHECK(ep.header.success);
    CHECK(ep.header.length < 600);
    CHECK(ep.header.task == "button");
    CHECK_THROWS_AS(record_episode(p, task, op, 1, 0), ContractError);
}

TEST_CASE("record_episode: compensation is visible in free space of the approach") {
    EnvParams p;
    TaskSpec task = TaskSpec::defaults(TaskKind::kButton).randomized(8);
    OperatorParams op;
    Episode ep = record_episode(p, task, op, 8, task.max_t, false);
    REQUIRE(ep.header.success);
    double max_eps = 0.0;
    for (int i = 0; i < std::min<int>(60, ep.header.length); ++i) {
        Vec3 eps = ep.steps[static_cast<std::size_t>(i)].master_cmd -
                   ep.steps[static_cast<std::size_t>(i)].slave_state;
        max_eps = std::max(max_eps, eps.head<2>().norm());
    }
    CHECK(max_eps > 3.0 * p.sigma_vis);
}

TEST_CASE("oracle competence: a handful of seeds per task, interventions on") {
    EnvParams p;
    OperatorParams op;
    for (TaskKind kind : {TaskKind::kButton, TaskKind::kWipe, TaskKind::kBlindSlot,
                          TaskKind::kConveyorSort, TaskKind::kToss}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            TaskSpec task = TaskSpec::defaults(kind).randomized(seed + 100);
            Episode ep = record_episode(p, task, op, seed + 100, task.max_t);
            INFO("task ", to_string(kind), " seed ", seed + 100, " len ", ep.header.length);
            CHECK(ep.header.success);
        }
    }
}

TEST_CASE("record_episode: intervention step lands in the header") {
    EnvParams p;
    OperatorParams op;
    op.intervention_prob = 1.0;
    TaskSpec task = TaskSpec::defaults(TaskKind::kConveyorSort).randomized(77);
    Episode ep = record_episode(p, task, op, 77, task.max_t);
    CHECK(ep.header.intervention_step >= op.intervention_lo);
    CHECK(ep.header.intervention_step <= op.intervention_hi);
    CHECK(ep.header.success);
}
