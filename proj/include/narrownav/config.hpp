#pragma once
/**
 * @file    config.hpp
 * @brief   Merged run configuration (defaults < file < flags) with a
 *          content hash for provenance.
 *
 * File layout (JSON, every key optional):
 *   { "algo": "ddpg", "reward": "fomt", "world": "tracks/corridor.json",
 *     "seeds": [0, 1, 2, 3, 4], "out": "runs",
 *     "env":      { "n_scans": 32, "max_range": 6, "resolution": 0.095, "dt": 0.2,
 *                   "max_steps": 1000, "open_space_threshold": 8, "wheelbase": 0.6,
 *                   "substeps": 10, "spawn_jitter": true, "collision_check": "either" },
 *     "footprint":{ "length": 1.0, "width": 0.6, "lidar_offset": 0.2, "safety_margin": 0.05 },
 *     "rewards":  { "R_c": -50, "R_r": 50, "c1": 1, ..., "c5": 100, "R_g": 50 },
 *     "profile":  "full",    (or "desk")
 *     "learner":  { "hidden": 512, "gamma": 0.99, ... },
 *     "train":    { "episodes": 1000, "fine_tune_episodes": 500, "window": 20 },
 *     "eval":     { "tracks": "tracks/track*.json", "episodes": 70, "seed": 0, "spawn_jitter": true },
 *     "bench":    { "trials": 500, "seed": 0, "n_rays": 720, "band": 0.5, "sampler": "first_contact" },
 *     "serve":    { "bind": "127.0.0.1:8765", "pace": true } }
 */

#include <narrownav/env.hpp>
#include <narrownav/errors.hpp>
#include <narrownav/learner_config.hpp>
#include <narrownav/reward.hpp>

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace narrownav
{
    struct RunConfig
    {
        std::string algo{"ddpg"};
        std::string world;
        std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
        std::string out{"runs"};

        EnvConfig env;  ///< world pointer is resolved separately from `world`
        std::string profile{"full"};  ///< learner preset the `learner` section is applied on top of
        LearnerConfig learner;

        int episodes{1000};
        int fine_tune_episodes{-1};  ///< negative: half of `episodes`
        int window{20};

        std::string eval_tracks;
        std::string model;
        int eval_episodes{70};
        std::uint64_t eval_seed{0};
        bool eval_jitter{true};

        std::size_t bench_trials{500};
        std::uint64_t bench_seed{0};
        std::size_t bench_rays{720};
        double bench_band{0.5};
        std::string bench_sampler{"first_contact"};

        std::string bind{"127.0.0.1:8765"};
        bool pace{true};
    };

    inline nlohmann::json reward_params_json (const RewardParams &p)
    {
        return {{"R_c", p.collision_reward},
                {"R_r", p.open_space_reward},
                {"c1", p.c1},
                {"c2", p.c2},
                {"c3", p.c3},
                {"c4", p.c4},
                {"n_f", p.n_f},
                {"n_o", p.n_o},
                {"n_m", p.n_m},
                {"alpha1", p.alpha1},
                {"alpha2", p.alpha2},
                {"alpha3", p.alpha3},
                {"alpha4", p.alpha4},
                {"gap_floor", p.gap_floor},
                {"c5", p.c5},
                {"R_g", p.goal_reward},
                {"capture_radius", p.capture_radius}};
    }

    inline void apply_reward_params (const nlohmann::json &j, RewardParams &p)
    {
        p.collision_reward = j.value ("R_c", p.collision_reward);
        p.open_space_reward = j.value ("R_r", p.open_space_reward);
        p.c1 = j.value ("c1", p.c1);
        p.c2 = j.value ("c2", p.c2);
        p.c3 = j.value ("c3", p.c3);
        p.c4 = j.value ("c4", p.c4);
        p.n_f = j.value ("n_f", p.n_f);
        p.n_o = j.value ("n_o", p.n_o);
        p.n_m = j.value ("n_m", p.n_m);
        p.alpha1 = j.value ("alpha1", p.alpha1);
        p.alpha2 = j.value ("alpha2", p.alpha2);
        p.alpha3 = j.value ("alpha3", p.alpha3);
        p.alpha4 = j.value ("alpha4", p.alpha4);
        p.gap_floor = j.value ("gap_floor", p.gap_floor);
        p.c5 = j.value ("c5", p.c5);
        p.goal_reward = j.value ("R_g", p.goal_reward);
        p.capture_radius = j.value ("capture_radius", p.capture_radius);
    }

    inline nlohmann::json to_json (const RunConfig &c)
    {
        const EnvConfig &e = c.env;
        return {{"algo", c.algo},
                {"reward", to_string (e.reward.mode)},
                {"world", c.world},
                {"seeds", c.seeds},
                {"out", c.out},
                {"env",
                 {{"n_scans", e.n_scans},
                  {"max_range", e.max_range},
                  {"resolution", e.resolution},
                  {"dt", e.dt},
                  {"max_steps", e.max_steps},
                  {"open_space_threshold", e.open_space_threshold},
                  {"wheelbase", e.wheelbase},
                  {"substeps", e.substeps},
                  {"spawn_jitter", e.spawn_jitter},
                  {"jitter_position", e.jitter_position},
                  {"jitter_heading", e.jitter_heading},
                  {"collision_check", e.collision_check == CollisionCheck::either ? "either" : "safety_region"}}},
                {"footprint",
                 {{"length", e.footprint.length},
                  {"width", e.footprint.width},
                  {"lidar_offset", e.footprint.lidar_offset},
                  {"safety_margin", e.footprint.safety_margin}}},
                {"rewards", reward_params_json (e.reward)},
                {"profile", c.profile},
                {"learner", c.learner},
                {"train", {{"episodes", c.episodes}, {"fine_tune_episodes", c.fine_tune_episodes}, {"window", c.window}}},
                {"eval",
                 {{"tracks", c.eval_tracks},
                  {"model", c.model},
                  {"episodes", c.eval_episodes},
                  {"seed", c.eval_seed},
                  {"spawn_jitter", c.eval_jitter}}},
                {"bench",
                 {{"trials", c.bench_trials},
                  {"seed", c.bench_seed},
                  {"n_rays", c.bench_rays},
                  {"band", c.bench_band},
                  {"sampler", c.bench_sampler}}},
                {"serve", {{"bind", c.bind}, {"pace", c.pace}}}};
    }

    /// Overlays a (possibly partial) config document onto `c`.
    inline void apply_config_json (const nlohmann::json &j, RunConfig &c)
    {
        try
        {
            if (!j.is_object ())
                throw ConfigError ("config file must hold a JSON object");
            c.algo = j.value ("algo", c.algo);
            if (j.contains ("reward"))
                c.env.reward.mode = parse_reward_mode (j["reward"].get<std::string> ());
            c.world = j.value ("world", c.world);
            if (j.contains ("seeds"))
                c.seeds = j["seeds"].get<std::vector<std::uint64_t>> ();
            c.out = j.value ("out", c.out);
            if (j.contains ("env"))
            {
                const auto &e = j["env"];
                EnvConfig &env = c.env;
                env.n_scans = e.value ("n_scans", env.n_scans);
                env.max_range = e.value ("max_range", env.max_range);
                env.resolution = e.value ("resolution", env.resolution);
                env.dt = e.value ("dt", env.dt);
                env.max_steps = e.value ("max_steps", env.max_steps);
                env.open_space_threshold = e.value ("open_space_threshold", env.open_space_threshold);
                env.wheelbase = e.value ("wheelbase", env.wheelbase);
                env.substeps = e.value ("substeps", env.substeps);
                env.spawn_jitter = e.value ("spawn_jitter", env.spawn_jitter);
                env.jitter_position = e.value ("jitter_position", env.jitter_position);
                env.jitter_heading = e.value ("jitter_heading", env.jitter_heading);
                if (e.contains ("collision_check"))
                {
                    const auto s = e["collision_check"].get<std::string> ();
                    if (s == "either")
                        env.collision_check = CollisionCheck::either;
                    else if (s == "safety_region")
                        env.collision_check = CollisionCheck::safety_region;
                    else
                        throw ConfigError ("collision_check must be either|safety_region");
                }
            }
            if (j.contains ("footprint"))
            {
                const auto &f = j["footprint"];
                Footprint &fp = c.env.footprint;
                fp.length = f.value ("length", fp.length);
                fp.width = f.value ("width", fp.width);
                fp.lidar_offset = f.value ("lidar_offset", fp.lidar_offset);
                fp.safety_margin = f.value ("safety_margin", fp.safety_margin);
            }
            if (j.contains ("rewards"))
                apply_reward_params (j["rewards"], c.env.reward);
            if (j.contains ("profile"))
            {
                c.profile = j["profile"].get<std::string> ();
                c.learner = learner_profile (c.profile);
            }
            if (j.contains ("learner"))
            {
                nlohmann::json merged = c.learner;
                merged.update (j["learner"]);
                c.learner = merged.get<LearnerConfig> ();
            }
            if (j.contains ("train"))
            {
                const auto &t = j["train"];
                c.episodes = t.value ("episodes", c.episodes);
                c.fine_tune_episodes = t.value ("fine_tune_episodes", c.fine_tune_episodes);
                c.window = t.value ("window", c.window);
            }
            if (j.contains ("eval"))
            {
                const auto &e = j["eval"];
                c.eval_tracks = e.value ("tracks", c.eval_tracks);
                c.model = e.value ("model", c.model);
                c.eval_episodes = e.value ("episodes", c.eval_episodes);
                c.eval_seed = e.value ("seed", c.eval_seed);
                c.eval_jitter = e.value ("spawn_jitter", c.eval_jitter);
            }
            if (j.contains ("bench"))
            {
                const auto &b = j["bench"];
                c.bench_trials = b.value ("trials", c.bench_trials);
                c.bench_seed = b.value ("seed", c.bench_seed);
                c.bench_rays = b.value ("n_rays", c.bench_rays);
                c.bench_band = b.value ("band", c.bench_band);
                c.bench_sampler = b.value ("sampler", c.bench_sampler);
            }
            if (j.contains ("serve"))
            {
                c.bind = j["serve"].value ("bind", c.bind);
                c.pace = j["serve"].value ("pace", c.pace);
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError (std::string ("bad config value: ") + e.what ());
        }
    }

    /// 64-bit FNV-1a over the canonical (sorted-key, compact) JSON dump.
    inline std::string config_hash (const nlohmann::json &j)
    {
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char ch : j.dump ())
        {
            h ^= ch;
            h *= 1099511628211ULL;
        }
        char buf[17];
        std::snprintf (buf, sizeof buf, "%016llx", static_cast<unsigned long long> (h));
        return buf;
    }

    /// Fine-tuning budget after defaults are resolved.
    inline int fine_tune_budget (const RunConfig &c)
    {
        return c.fine_tune_episodes < 0 ? c.episodes / 2 : c.fine_tune_episodes;
    }

    /// The output location does not take part in the hash.
    inline std::string config_hash (const RunConfig &c)
    {
        nlohmann::json j = to_json (c);
        j.erase ("out");
        return config_hash (j);
    }

}  // namespace narrownav
