#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "swarmphase/dynamics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace swarmphase;
using swarmphase::oracle::rk4;
using swarmphase::testing::random_microstate;
using swarmphase::testing::random_motion;

namespace {

double min_pair_distance(const Microstate& m) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j)
            best = std::min(best, distance(m.agents[i].position(), m.agents[j].position()));
    return best;
}

SimParams point_params(Controller c, double v, double omega, double dt) {
    SimParams p;
    p.controller = c;
    p.n_agents = 1;
    p.speed = v;
    p.turn_rate = omega;
    p.dt = dt;
    p.body_radius = 0.0;
    p.horizon = 1.0;
    p.eval_window = 1.0;
    p.record_interval = dt;
    return p;
}

}  // namespace

TEST_CASE("milling control") {
    SimParams p;
    p.speed = 0.25;
    p.turn_rate = deg_to_rad(45.0);
    CHECK(milling_control(1, p) == ControlInput{0.25, deg_to_rad(45.0)});
    CHECK(milling_control(0, p) == ControlInput{0.25, -deg_to_rad(45.0)});
    p.speed = 1.0;
    p.turn_rate = 1e-12;
    const auto u = milling_control(0, p);
    CHECK(u.forward_speed == 1.0);
    CHECK(u.turn_rate == -1e-12);
}

TEST_CASE("diffusion control") {
    SimParams p;
    p.speed = 0.3;
    p.turn_rate = deg_to_rad(150.0);
    CHECK(diffusion_control(1, p) == ControlInput{-0.3, 0.0});
    CHECK(diffusion_control(0, p) == ControlInput{0.0, deg_to_rad(150.0)});
    p.speed = 7.0;
    CHECK(diffusion_control(0, p).forward_speed == 0.0);
}

TEST_CASE("unicycle integration") {
    SUBCASE("straight line") {
        const AgentState s = integrate_unicycle({0.0, 0.0, 0.0}, {1.0, 0.0}, 0.1);
        CHECK(s.x == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(s.y == 0.0);
        CHECK(s.theta == 0.0);
    }
    SUBCASE("quarter arc through step(), lone milling agent turns clockwise") {
        const SimParams p = point_params(Controller::Milling, 1.0, kPi / 2.0, 1.0);
        const Microstate next = step(Microstate{{{0.0, 0.0, 0.0}}, 0.0}, p);
        const AgentState& a = next.agents[0];
        CHECK(a.x == doctest::Approx(2.0 / kPi).epsilon(1e-14));
        CHECK(a.y == doctest::Approx(-2.0 / kPi).epsilon(1e-14));
        CHECK(a.theta == doctest::Approx(-kPi / 2.0).epsilon(1e-14));
        CHECK(next.time == 1.0);

        const AgentState oracle = rk4({0.0, 0.0, 0.0}, {1.0, -kPi / 2.0}, 1.0, 1e-5);
        CHECK(std::abs(a.x - oracle.x) <= 1e-6);
        CHECK(std::abs(a.y - oracle.y) <= 1e-6);
        CHECK(std::abs(a.theta - oracle.theta) <= 1e-6);
    }
    SUBCASE("random single steps match RK4") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> pos(-3.0, 3.0);
        std::uniform_real_distribution<double> ang(-kPi, kPi);
        std::uniform_real_distribution<double> vel(-1.0, 1.0);
        std::uniform_real_distribution<double> turn(-3.0, 3.0);
        for (int k = 0; k < 50; ++k) {
            const AgentState s{pos(rng), pos(rng), ang(rng)};
            const ControlInput u{vel(rng), turn(rng)};
            const AgentState got = integrate_unicycle(s, u, 0.1);
            const AgentState want = rk4(s, u, 0.1, 1e-5);
            REQUIRE(std::abs(got.x - want.x) <= 1e-6);
            REQUIRE(std::abs(got.y - want.y) <= 1e-6);
            REQUIRE(std::abs(normalize_angle(got.theta - want.theta)) <= 1e-6);
        }
    }
}

TEST_CASE("resolve_collisions") {
    SUBCASE("point agents are untouched") {
        std::mt19937_64 rng(1);
        const Microstate m = random_microstate(rng, 10, 0.1);
        CHECK(resolve_collisions(m, 0.0) == m);
    }
    SUBCASE("symmetric projection") {
        const Microstate out = resolve_collisions(Microstate{{{0.0, 0.0, 0.3}, {0.1, 0.0, -1.0}}, 0.0}, 0.1);
        CHECK(out.agents[0].x == doctest::Approx(-0.05).epsilon(1e-12));
        CHECK(out.agents[1].x == doctest::Approx(0.15).epsilon(1e-12));
        CHECK(out.agents[0].y == 0.0);
        CHECK(out.agents[0].theta == 0.3);
        CHECK(out.agents[1].theta == -1.0);
    }
    SUBCASE("no overlap, no change") {
        const Microstate m{{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, 0.0};
        CHECK(resolve_collisions(m, 0.1) == m);
    }
    SUBCASE("coincident pair is separated deterministically") {
        const Microstate m{{{0.2, 0.2, 0.0}, {0.2, 0.2, 1.0}}, 0.0};
        const Microstate a = resolve_collisions(m, 0.1);
        const Microstate b = resolve_collisions(m, 0.1);
        CHECK(a == b);
        CHECK(distance(a.agents[0].position(), a.agents[1].position()) == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("fuzz: no pair overlaps afterwards") {
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<std::size_t> count(2, 20);
        for (int k = 0; k < 2000; ++k) {
            const double radius = 0.08;
            const Microstate m = random_microstate(rng, count(rng), 1.0);
            const Microstate out = resolve_collisions(m, radius);
            REQUIRE(min_pair_distance(out) >= 2.0 * radius - 1e-9);
        }
    }
}

TEST_CASE("step is independent of agent ordering") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::size_t> count(2, 14);
    for (Controller c : {Controller::Milling, Controller::Diffusion}) {
        SimParams p;
        p.controller = c;
        p.dt = 0.05;
        for (int k = 0; k < 300; ++k) {
            const std::size_t n = count(rng);
            p.n_agents = static_cast<int>(n);
            const Microstate m = random_microstate(rng, n, 0.6);
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            Microstate shuffled = m;
            for (std::size_t i = 0; i < n; ++i) shuffled.agents[i] = m.agents[perm[i]];

            const Microstate direct = step(m, p);
            const Microstate via = step(shuffled, p);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(via.agents[i] == direct.agents[perm[i]]);
        }
    }
}

TEST_CASE("milling displacement is the arc chord") {
    std::mt19937_64 rng(31);
    SimParams p;
    p.body_radius = 0.0;
    p.speed = 0.25;
    p.turn_rate = deg_to_rad(45.0);
    p.n_agents = 12;
    const double chord = 2.0 * (p.speed / p.turn_rate) * std::abs(std::sin(p.turn_rate * p.dt / 2.0));
    Microstate m = random_microstate(rng, 12, 1.0);
    for (int k = 0; k < 500; ++k) {
        const Microstate next = step(m, p);
        for (std::size_t i = 0; i < m.size(); ++i) {
            REQUIRE(std::abs(distance(m.agents[i].position(), next.agents[i].position()) - chord) <= 1e-12);
        }
        m = next;
    }
}

TEST_CASE("diffusion agents that sense nothing only rotate") {
    SimParams p;
    p.controller = Controller::Diffusion;
    p.n_agents = 3;
    const Microstate m{{{0.0, 0.0, 0.0}, {5.0, 0.0, 1.0}, {0.0, 5.0, -2.0}}, 0.0};
    const Microstate next = step(m, p);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(next.agents[i].x == m.agents[i].x);
        CHECK(next.agents[i].y == m.agents[i].y);
        CHECK(next.agents[i].theta == doctest::Approx(normalize_angle(m.agents[i].theta + p.turn_rate * p.dt)));
    }
}

TEST_CASE("trajectories are equivariant under rigid motions") {
    std::mt19937_64 rng(77);
    for (Controller c : {Controller::Milling, Controller::Diffusion}) {
        SimParams p;
        p.controller = c;
        p.n_agents = 6;
        p.horizon = 10.0;  // 1000 steps
        p.eval_window = 1.0;
        const Microstate init = random_microstate(rng, 6, 0.8);
        const auto motion = random_motion(rng);
        const Trajectory a = run(p, 1, init);
        const Trajectory b = run(p, 1, motion.apply(init));
        REQUIRE(a.frames.size() == b.frames.size());
        for (std::size_t k = 0; k < a.frames.size(); ++k) {
            const Microstate moved = motion.apply(a.frames[k]);
            for (std::size_t i = 0; i < moved.size(); ++i) {
                REQUIRE(std::abs(moved.agents[i].x - b.frames[k].agents[i].x) <= 1e-6);
                REQUIRE(std::abs(moved.agents[i].y - b.frames[k].agents[i].y) <= 1e-6);
                REQUIRE(std::abs(normalize_angle(moved.agents[i].theta - b.frames[k].agents[i].theta)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("run") {
    SimParams p;
    p.n_agents = 3;
    p.horizon = 1.0;
    p.eval_window = 1.0;
    p.dt = 0.01;
    const Microstate init{{{0.0, 0.0, 0.0}, {0.5, 0.1, 2.0}, {-0.4, 0.3, -1.0}}, 0.0};

    SUBCASE("step count and frame spacing") {
        const Trajectory t = run(p, 0, init);
        REQUIRE(t.frames.size() == 11);
        CHECK(t.frames.front().time == 0.0);
        CHECK(t.frames.back().time == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t k = 1; k < t.frames.size(); ++k) {
            CHECK(std::abs((t.frames[k].time - t.frames[k - 1].time) - 0.1) <= 1e-12 * 0.1 + 1e-15);
            CHECK(t.frames[k].size() == 3);
        }
        // The last frame equals 100 explicit steps.
        Microstate m = init;
        for (int k = 0; k < 100; ++k) m = step(m, p);
        CHECK(m.agents == t.frames.back().agents);
    }
    SUBCASE("deterministic") {
        const Trajectory a = run(p, 9, init);
        const Trajectory b = run(p, 9, init);
        CHECK(a.frames == b.frames);
    }
    SUBCASE("wrong agent count") {
        p.n_agents = 4;
        CHECK_THROWS_AS(run(p, 0, init), UsageError);
    }
    SUBCASE("non-finite state raises simulation-diverged with the step index") {
        Microstate bad = init;
        bad.agents[1].x = std::numeric_limits<double>::quiet_NaN();
        try {
            run(p, 0, bad);
            FAIL("expected SimulationDiverged");
        } catch (const SimulationDiverged& e) {
            CHECK(e.step_index() == 0);
        }
        // An arc radius v / omega that overflows poisons the first step.
        p.speed = 1e306;
        p.turn_rate = 1e-3;
        try {
            run(p, 0, init);
            FAIL("expected SimulationDiverged");
        } catch (const SimulationDiverged& e) {
            CHECK(e.step_index() == 1);
            CHECK(std::string(e.what()).find("step 1") != std::string::npos);
        }
    }
}
