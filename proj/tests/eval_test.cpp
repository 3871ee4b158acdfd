#include "oracles.hpp"

#include <narrownav/config.hpp>
#include <narrownav/eval.hpp>
#include <narrownav/track_io.hpp>
#include <narrownav/trainer.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace narrownav;
namespace fs = std::filesystem;

namespace
{
    fs::path scratch (const std::string &name)
    {
        const auto dir = fs::temp_directory_path () / ("narrownav_" + name);
        fs::remove_all (dir);
        fs::create_directories (dir);
        return dir;
    }

    std::string slurp (const fs::path &p)
    {
        std::ifstream in (p);
        std::ostringstream os;
        os << in.rdbuf ();
        return os.str ();
    }

    std::shared_ptr<const TrackWorld> track (const std::string &name)
    {
        return std::make_shared<const TrackWorld> (load_track (oracle::track_path (name)));
    }

    std::vector<EpisodeResult> random_results (std::uint64_t seed, int n)
    {
        std::mt19937_64 rng (seed);
        std::uniform_int_distribution<int> pick (0, 2);
        std::uniform_real_distribution<double> t (5.0, 60.0);
        const char *methods[] = {"RL_fomt", "IL", "planner"};
        const char *tracks[] = {"track1", "track2", "track3"};
        std::vector<EpisodeResult> out;
        for (int i = 0; i < n; ++i)
            out.push_back ({methods[pick (rng)], tracks[pick (rng)], static_cast<Outcome> (pick (rng)), 10,
                            t (rng), static_cast<std::uint64_t> (i), 0.0});
        return out;
    }
}  // namespace

TEST (Aggregate, MatchesDirectRecount)
{
    const auto results = random_results (1, 2000);
    const auto cells = aggregate (results);
    EXPECT_EQ (cells.size (), 9u);
    int total = 0;
    for (const auto &c : cells)
    {
        int n = 0, s = 0, f = 0, k = 0;
        double time = 0.0;
        for (const auto &r : results)
            if (r.method == c.method && r.track == c.track)
            {
                ++n;
                s += r.outcome == Outcome::success;
                f += r.outcome == Outcome::fail;
                k += r.outcome == Outcome::collision;
                if (r.outcome == Outcome::success)
                    time += r.sim_time;
            }
        EXPECT_EQ (c.episodes, n);
        EXPECT_DOUBLE_EQ (c.success_rate, static_cast<double> (s) / n);
        EXPECT_DOUBLE_EQ (c.fail_rate, static_cast<double> (f) / n);
        EXPECT_DOUBLE_EQ (c.collision_rate, static_cast<double> (k) / n);
        EXPECT_NEAR (c.success_rate + c.fail_rate + c.collision_rate, 1.0, 1e-12);
        ASSERT_TRUE (c.avg_success_time.has_value ());
        EXPECT_NEAR (*c.avg_success_time, time / s, 1e-9);
        total += n;
    }
    EXPECT_EQ (total, 2000);
}

TEST (Aggregate, NoSuccessMeansNoAverageTime)
{
    const std::vector<EpisodeResult> r{{"m", "t", Outcome::collision, 3, 0.6, 0, -50.0},
                                       {"m", "t", Outcome::fail, 1000, 200.0, 1, 3.0}};
    const auto cells = aggregate (r);
    ASSERT_EQ (cells.size (), 1u);
    EXPECT_FALSE (cells[0].avg_success_time.has_value ());
    EXPECT_DOUBLE_EQ (cells[0].collision_rate, 0.5);
}

TEST (Report, RoundTripIsExact)
{
    BenchmarkReport report;
    report.config_hash = "0123456789abcdef";
    report.seeds = {0, 1, 2, 3, 4};
    report.cells = aggregate (random_results (2, 500));
    report.collisions = {{"big_track", 500, 7, 720, 42, 481, 330, 12}};
    const auto dir = scratch ("report");
    emit_report (report, dir);
    EXPECT_EQ (parse_report (dir), report);
    EXPECT_NE (slurp (dir / "report.txt").find ("== track1"), std::string::npos);
    EXPECT_NE (slurp (dir / "report.txt").find ("SR 481"), std::string::npos);
}

TEST (Report, RejectsMalformedCsv)
{
    const auto dir = scratch ("bad_report");
    std::ofstream (dir / "report.csv") << "not,the,header\n";
    EXPECT_THROW (parse_report (dir), ConfigError);
    EXPECT_THROW (parse_report (dir / "missing"), IoError);
}

TEST (Report, ImportExternalResultsAnyColumnOrder)
{
    const auto dir = scratch ("external");
    std::ofstream (dir / "ext.csv") << "time,outcome,track,method\n12.5,success,track4,planner\n,collision,track4,planner\n";
    const auto r = import_external_results (dir / "ext.csv");
    ASSERT_EQ (r.size (), 2u);
    EXPECT_EQ (r[0].method, "planner");
    EXPECT_EQ (r[0].outcome, Outcome::success);
    EXPECT_DOUBLE_EQ (r[0].sim_time, 12.5);
    EXPECT_EQ (r[1].outcome, Outcome::collision);
    std::ofstream (dir / "bad.csv") << "method,track\nx,y\n";
    EXPECT_THROW (import_external_results (dir / "bad.csv"), ConfigError);
}

TEST (RunEval, DeterministicAndFileIdentical)
{
    LearnerConfig cfg;
    cfg.hidden = 16;
    cfg.seed = 5;
    DdpgAgent<float> agent (32, cfg);
    EnvConfig env;
    env.max_steps = 60;
    const EvalOptions opts{4, 9, true};
    std::ostringstream log1, log2;
    const auto a = run_eval (agent, "RL_fomt", {track ("track1"), track ("track5")}, env, opts, &log1);
    const auto b = run_eval (agent, "RL_fomt", {track ("track1"), track ("track5")}, env, opts, &log2);
    ASSERT_EQ (a.size (), 8u);
    EXPECT_EQ (log1.str (), log2.str ());
    BenchmarkReport ra{"h", {9}, aggregate (a), {}}, rb{"h", {9}, aggregate (b), {}};
    const auto d1 = scratch ("eval1"), d2 = scratch ("eval2");
    emit_report (ra, d1);
    emit_report (rb, d2);
    EXPECT_EQ (slurp (d1 / "report.csv"), slurp (d2 / "report.csv"));
    for (const auto &r : a)
        EXPECT_DOUBLE_EQ (r.sim_time, r.steps * 0.2);
}

TEST (RunEval, DimensionMismatchIsConfigError)
{
    LearnerConfig cfg;
    cfg.hidden = 8;
    DqnAgent<float> agent (32, cfg);
    EnvConfig env;
    env.reward.mode = RewardMode::wg;  // 34-dimensional state
    EXPECT_THROW (run_eval (agent, "x", {track ("corridor")}, env, EvalOptions{}), ConfigError);
    EXPECT_THROW (run_eval (agent, "x", {track ("corridor")}, EnvConfig{}, EvalOptions{0, 0, true}), ConfigError);
}

TEST (RunEval, LoadAgentDispatchesOnAlgorithm)
{
    LearnerConfig cfg;
    cfg.hidden = 8;
    EXPECT_EQ (load_agent (DdpgAgent<float> (32, cfg).checkpoint ())->algorithm (), "ddpg");
    EXPECT_EQ (load_agent (DqnAgent<float> (32, cfg).checkpoint ())->algorithm (), "dqn");
    EXPECT_EQ (load_agent (ClonedPolicy<float> (32, 8, 0).checkpoint ())->algorithm (), "bc");
    EXPECT_THROW (load_agent (nlohmann::json{{"algorithm", "sac"}}), ConfigError);
    EXPECT_THROW (load_agent (nlohmann::json{{"weights", 1}}), ConfigError);
}

TEST (CollisionBench, SeededAndPrefixStable)
{
    const std::vector<std::shared_ptr<const TrackWorld>> worlds{track ("big_track")};
    const auto a = collision_benchmark (Footprint{}, worlds, 60, 3);
    const auto b = collision_benchmark (Footprint{}, worlds, 60, 3);
    EXPECT_EQ (a.counts, b.counts);
    const auto longer = collision_benchmark (Footprint{}, worlds, 90, 3);
    for (std::size_t i = 0; i < 60; ++i)
        EXPECT_EQ (longer.trials[i].pose, a.trials[i].pose);
    EXPECT_EQ (a.counts.table_size, build_table (Footprint{}, 720, 0.095).size ());
    EXPECT_THROW (collision_benchmark (Footprint{}, worlds, 0, 3), ConfigError);
}

TEST (CollisionBench, EveryTrialIsAGroundTruthCollision)
{
    const auto world = track ("track3");
    const Footprint fp;
    for (auto sampler : {CollisionSampler::first_contact, CollisionSampler::static_overlap})
    {
        CollisionBenchOptions opts;
        opts.sampler = sampler;
        const auto r = collision_benchmark (fp, {world}, 80, 1, opts);
        ASSERT_EQ (r.trials.size (), 80u);
        std::size_t sr = 0;
        for (const auto &t : r.trials)
        {
            bool overlap = false;
            for (const auto &w : world->walls)
                overlap = overlap || oracle::sat_overlap (t.pose, fp.half_length (), fp.half_width (), w.a, w.b);
            EXPECT_TRUE (overlap);
            // Re-derive the SR verdict from a fresh dense scan.
            const auto table = build_table (fp, opts.n_rays, opts.resolution);
            const bool detected = detect_collision (table, scan (*world, t.pose, fp, opts.n_rays, opts.max_range));
            EXPECT_EQ (detected, t.sr);
            sr += t.sr;
        }
        EXPECT_EQ (sr, r.counts.sr);
    }
}

TEST (Config, PrecedenceAndHash)
{
    RunConfig c;
    const std::string base = config_hash (c);
    EXPECT_EQ (base.size (), 16u);
    EXPECT_EQ (base, config_hash (RunConfig{}));
    c.out = "elsewhere";
    EXPECT_EQ (config_hash (c), base);

    apply_config_json (nlohmann::json::parse (R"({"algo":"dqn","reward":"ft","env":{"n_scans":64},
        "rewards":{"c2":0.5},"learner":{"hidden":32},"train":{"episodes":7}})"),
                       c);
    EXPECT_EQ (c.algo, "dqn");
    EXPECT_EQ (c.env.reward.mode, RewardMode::ft);
    EXPECT_EQ (c.env.n_scans, 64u);
    EXPECT_EQ (c.env.reward.c2, 0.5);
    EXPECT_EQ (c.learner.hidden, 32);
    EXPECT_EQ (c.learner.gamma, 0.99);
    EXPECT_EQ (c.episodes, 7);
    EXPECT_NE (config_hash (c), base);

    // The dump reproduces the same config and hash.
    RunConfig again;
    apply_config_json (to_json (c), again);
    EXPECT_EQ (to_json (again), to_json (c));
    EXPECT_EQ (config_hash (again), config_hash (c));
}

TEST (Config, ProfileThenLearnerOverrides)
{
    RunConfig c;
    apply_config_json (nlohmann::json::parse (R"({"profile":"desk","learner":{"warmup":7}})"), c);
    EXPECT_EQ (c.learner.hidden, 64);
    EXPECT_EQ (c.learner.updates_per_step, 4);
    EXPECT_EQ (c.learner.warmup, 7u);
    EXPECT_THROW (apply_config_json (nlohmann::json::parse (R"({"profile":"huge"})"), c), ConfigError);
    EXPECT_THROW (apply_config_json (nlohmann::json::parse (R"({"reward":"xyz"})"), c), ConfigError);
    EXPECT_THROW (apply_config_json (nlohmann::json::parse (R"({"train":{"episodes":"many"}})"), c), ConfigError);
    EXPECT_THROW (apply_config_json (nlohmann::json::parse ("[1,2]"), c), ConfigError);
}

TEST (Config, FineTuneDefaultsToHalfTheBudget)
{
    RunConfig c;
    EXPECT_EQ (fine_tune_budget (c), 500);
    c.episodes = 150;
    EXPECT_EQ (fine_tune_budget (c), 75);
    c.fine_tune_episodes = 0;
    EXPECT_EQ (fine_tune_budget (c), 0);
}

TEST (Trainer, CurveAndReturnFiles)
{
    SeedRun r;
    r.seed = 4;
    r.episodes = {{0, 1.5, 3, DoneReason::collision}, {1, -2.0, 9, DoneReason::open_space}};
    r.curve = {1.5};
    const auto dir = scratch ("curves");
    write_curves (dir / "curve.csv", {r});
    write_returns (dir / "returns.csv", {r});
    EXPECT_EQ (slurp (dir / "curve.csv"), "episode_window,best_score,seed\n0,1.5,4\n");
    EXPECT_EQ (slurp (dir / "returns.csv"),
               "episode,return,steps,done_reason,seed\n0,1.5,3,collision,4\n1,-2,9,open_space,4\n");
    EXPECT_THROW (write_curves ("/nonexistent/x.csv", {r}), IoError);
    EXPECT_THROW (read_json_file (dir / "curve.csv"), ConfigError);
}
