#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "swarmphase/io.hpp"
#include "swarmphase/sweep.hpp"
#include "test_support.hpp"

using namespace swarmphase;
using swarmphase::testing::TempDir;

namespace {

SimParams short_params() {
    SimParams p;
    p.horizon = 12.0;
    p.eval_window = 10.0;
    return p;
}

ParamGrid small_grid(int trials = 10) {
    ParamGrid g;
    g.base = short_params();
    g.axes = {Axis{SweepParam::N, {4, 6, 8}}};
    g.trials_per_point = trials;
    g.base_seed = 99;
    return g;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return lines;
}

}  // namespace

TEST_CASE("init_connected examples") {
    SimParams p;
    SUBCASE("single agent") {
        p.n_agents = 1;
        const Microstate s = init_connected(p, 5);
        REQUIRE(s.agents.size() == 1);
        CHECK(std::hypot(s.agents[0].x, s.agents[0].y) <= init_disk_radius(p) + 1e-12);
    }
    SUBCASE("default six agents") {
        const Microstate s = init_connected(p, 5);
        REQUIRE(s.agents.size() == 6);
        CHECK(r_disk_connected(s, p.sensor.range));
    CHECK(init_disk_radius(p) == doctest::Approx(std::max(1.0, 2 * 0.08 * std::sqrt(6.0)) * 0.75 * std::sqrt(6.0)));
    }
    SUBCASE("infeasible") {
        p.n_agents = 20;
        p.sensor.range = 0.001;
        CHECK_THROWS_AS(init_connected(p, 5), InfeasibleInitialization);
        const TrialRecord r = run_trial(p, 5, StructureSet::milling());
        CHECK(r.failed);
        CHECK(r.classification.value == 0);
        CHECK(r.error.find("infeasible") != std::string::npos);
    }
}

TEST_CASE("init_connected postconditions") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> n_dist(1, 20);
    std::uniform_real_distribution<double> gamma_dist(0.3, 2.0);
    for (int k = 0; k < 300; ++k) {
        SimParams p;
        p.n_agents = n_dist(rng);
        p.sensor.range = gamma_dist(rng);
        const std::uint64_t seed = rng();
        const Microstate s = init_connected(p, seed);
        REQUIRE(s.agents.size() == static_cast<std::size_t>(p.n_agents));
        REQUIRE(r_disk_connected(s, p.sensor.range));
        const double r0 = init_disk_radius(p);
        for (std::size_t i = 0; i < s.agents.size(); ++i) {
            REQUIRE(std::hypot(s.agents[i].x, s.agents[i].y) <= r0 + 1e-12);
            REQUIRE(s.agents[i].theta >= -kPi);
            REQUIRE(s.agents[i].theta < kPi);
            for (std::size_t j = i + 1; j < s.agents.size(); ++j)
                REQUIRE(distance(s.agents[i].position(), s.agents[j].position()) >= 2 * p.body_radius);
        }
        const Microstate again = init_connected(p, seed);
        for (std::size_t i = 0; i < s.agents.size(); ++i) {
            REQUIRE(again.agents[i].x == s.agents[i].x);
            REQUIRE(again.agents[i].theta == s.agents[i].theta);
        }
    }
}

TEST_CASE("split_seed is injective over trials and points") {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(1'100'000);
    for (std::uint64_t point = 0; point < 1000; ++point)
        for (std::uint64_t trial = 0; trial < 1000; ++trial) seen.insert(split_seed(7, point, trial));
    CHECK(seen.size() == 1'000'000);
    CHECK(split_seed(7, 0, 0) != split_seed(8, 0, 0));
    CHECK(split_seed(7, 1, 0) == split_seed(7, 1, 0));
}

TEST_CASE("grid decoding") {
    ParamGrid g;
    g.axes = {Axis{SweepParam::N, {4, 6}}, Axis{SweepParam::Phi, {10, 20, 30}}};
    g.validate();
    CHECK(g.point_count() == 6);
    const auto c = g.coordinates(4);
    CHECK(c[0] == Coordinate{SweepParam::N, 6});
    CHECK(c[1] == Coordinate{SweepParam::Phi, 20});
    const SimParams p = g.params_at(4);
    CHECK(p.n_agents == 6);
    CHECK(p.sensor.opening_angle == doctest::Approx(deg_to_rad(20)));

    SUBCASE("validation") {
        ParamGrid bad = g;
        bad.axes[1].values = {10, 10};
        CHECK_THROWS_AS(bad.validate(), UsageError);
        bad = g;
        bad.axes[1].param = SweepParam::N;
        CHECK_THROWS_AS(bad.validate(), UsageError);
        bad = g;
        bad.axes.clear();
        CHECK_THROWS_AS(bad.validate(), UsageError);
        bad = g;
        bad.trials_per_point = 0;
        CHECK_THROWS_AS(bad.validate(), UsageError);
    }
    CHECK_THROWS_AS(sweep_param_from_string("mass"), UsageError);
    CHECK(sweep_param_from_string("phi") == SweepParam::Phi);
}

TEST_CASE("run_point") {
    const SimParams p = short_params();
    const auto a = run_point(p, 4, 11, 0, StructureSet::milling());
    const auto b = run_point(p, 4, 11, 0, StructureSet::milling());
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_outcome(a[i], b[i]));
        CHECK(a[i].seed == split_seed(11, 0, i));
        CHECK(a[i].trial_index == i);
    }
    CHECK(a[0].seed != a[1].seed);
}

TEST_CASE("run_grid aggregates per point") {
    const ParamGrid g = small_grid();
    const GridResult r = run_grid(g);
    REQUIRE(r.cells.size() == 3);
    CHECK(r.records.size() == 30);
    CHECK(r.executed == 30);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.cells[i].point_index == i);
        CHECK(r.cells[i].trials == 10);
        int s = 0;
        for (const auto& rec : r.records)
            if (rec.point_index == i) s += rec.classification.value;
        CHECK(r.cells[i].successes == s);
    }
}

TEST_CASE("parallel executor matches the serial reference") {
    const ParamGrid g = small_grid(4);
    std::vector<WorkUnit> units;
    for (std::size_t p = 0; p < g.point_count(); ++p)
        for (std::size_t t = 0; t < 4; ++t) units.push_back({p, t});
    std::reverse(units.begin(), units.end());
    const auto serial = run_units_serial(g, units);
    std::size_t sunk = 0;
    const auto parallel = run_units_parallel(g, units, 8, [&](const TrialRecord&) { ++sunk; });
    REQUIRE(serial.size() == parallel.size());
    CHECK(sunk == units.size());
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(same_outcome(serial[i], parallel[i]));

    const auto a = run_grid(g, {1, std::nullopt});
    const auto b = run_grid(g, {8, std::nullopt});
    for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(same_outcome(a.records[i], b.records[i]));
}

TEST_CASE("resume") {
    TempDir dir("resume");
    const auto path = dir.path / "trials.jsonl";
    const ParamGrid g = small_grid(3);
    const GridResult full = run_grid(g, {1, path});
    auto lines = read_lines(path);
    REQUIRE(lines.size() == 10);  // header + 9 records

    SUBCASE("complete file runs nothing") {
        const GridResult again = run_grid(g, {1, path});
        CHECK(again.executed == 0);
        CHECK(again.records.size() == 9);
        for (std::size_t i = 0; i < 9; ++i) CHECK(same_outcome(again.records[i], full.records[i]));
    }
    SUBCASE("interrupted file with a torn line") {
        {
            std::ofstream out(path, std::ios::trunc);
            for (std::size_t i = 0; i < 5; ++i) out << lines[i] << '\n';
            out << lines[5].substr(0, lines[5].size() / 2);
        }
        const GridResult resumed = run_grid(g, {2, path});
        CHECK(resumed.executed == 5);
        REQUIRE(resumed.cells.size() == full.cells.size());
        for (std::size_t i = 0; i < full.cells.size(); ++i) {
            CHECK(resumed.cells[i].successes == full.cells[i].successes);
            CHECK(resumed.cells[i].trials == full.cells[i].trials);
        }
        const auto after = read_lines(path);
        REQUIRE(after.size() == lines.size());
        for (std::size_t i = 1; i < after.size(); ++i)
            CHECK(same_outcome(trial_from_json(Json::parse(after[i])), full.records[i - 1]));
    }
    SUBCASE("file from another grid is rejected") {
        ParamGrid other = g;
        other.base_seed = 100;
        CHECK_THROWS_AS(run_grid(other, {1, path}), UsageError);
    }
}

TEST_CASE("trial and cell persistence round trip") {
    const ParamGrid g = small_grid(2);
    const GridResult r = run_grid(g);
    for (const auto& rec : r.records) {
        const TrialRecord back = trial_from_json(Json::parse(to_json(rec).dump()));
        CHECK(same_outcome(back, rec));
    }
    TempDir dir("cells");
    write_cells(dir.path / "cells.json", g, r.cells);
    const CellsFile f = read_cells(dir.path / "cells.json");
    CHECK(to_json(f.grid) == to_json(g));
    REQUIRE(f.cells.size() == r.cells.size());
    for (std::size_t i = 0; i < f.cells.size(); ++i) CHECK(to_json(f.cells[i]) == to_json(r.cells[i]));
}

TEST_CASE("grid config parsing") {
    const Json ok = Json::parse(R"({"base_params": {"controller": "diffusion"},
        "axes": [{"name": "N", "min": 4, "max": 12, "steps": 5}, {"name": "phi", "values": [30, 60]}],
        "trials": 3, "base_seed": 1})");
    const ParamGrid g = grid_from_json(ok);
    CHECK(g.axes[0].values == std::vector<double>{4, 6, 8, 10, 12});
    CHECK(g.thresholds.behavior == Behavior::Diffusion);
    CHECK(g.base.controller == Controller::Diffusion);

    Json bad = ok;
    bad["axes"][0]["name"] = "mass";
    CHECK_THROWS_AS(grid_from_json(bad), UsageError);
    bad = ok;
    bad["speed"] = 3;
    CHECK_THROWS_WITH_AS(grid_from_json(bad), doctest::Contains("speed"), UsageError);
    bad = ok;
    bad["trials"] = 0;
    CHECK_THROWS_AS(grid_from_json(bad), UsageError);
}
