#pragma once
/**
 * @file    trainer.hpp
 * @brief   Episodic training loop, per-seed runs with best-model
 *          fine-tuning, learning-curve files and checkpoint persistence.
 */

#include <narrownav/agent.hpp>
#include <narrownav/ddpg.hpp>
#include <narrownav/dqn.hpp>
#include <narrownav/env.hpp>
#include <narrownav/errors.hpp>
#include <narrownav/learner_config.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace narrownav
{
    inline std::unique_ptr<Agent> make_agent (const std::string &algorithm, std::size_t state_dim,
                                              const LearnerConfig &config)
    {
        if (algorithm == "ddpg")
            return std::make_unique<DdpgAgent<float>> (state_dim, config);
        if (algorithm == "dqn")
            return std::make_unique<DqnAgent<float>> (state_dim, config);
        throw ConfigError ("unknown algorithm '" + algorithm + "' (expected ddpg|dqn)");
    }

    struct EpisodeLog
    {
        int episode{0};
        double episode_return{0.0};
        int steps{0};
        DoneReason reason{DoneReason::running};
    };

    /// Rolls out one episode. With `learn` set every transition is fed to the agent.
    inline EpisodeLog run_episode (NarrowSpaceEnv &env, Agent &agent, std::uint64_t reset_seed, bool explore,
                                   bool learn, TraceWriter *trace = nullptr)
    {
        const StateEncoder encoder{env.config ().max_range};
        Observation obs = env.reset (reset_seed);
        std::vector<double> state = encoder.encode (obs, env.state ().last_action);
        EpisodeLog log;
        while (true)
        {
            const Decision d = agent.act (state, explore);
            const StepOutcome out = env.step (d.action);
            if (trace)
                trace->write (env, out);
            std::vector<double> next = encoder.encode (out.observation, env.state ().last_action);
            log.episode_return += out.reward;
            // Timeouts are not terminal for bootstrapping.
            const bool terminal = out.done && out.done_reason != DoneReason::timeout;
            if (learn)
                agent.record ({state, d.action, d.action_id, out.reward, next, terminal});
            state = std::move (next);
            if (out.done)
            {
                log.steps = env.steps ();
                log.reason = out.done_reason;
                break;
            }
        }
        if (learn)
            agent.end_episode ();
        return log;
    }

    struct TrainOptions
    {
        int episodes{1000};
        int fine_tune_episodes{500};
        int window{20};  ///< learning-curve window (best return per window)
    };

    struct SeedRun
    {
        std::uint64_t seed{0};
        std::vector<EpisodeLog> episodes;
        std::vector<double> curve;  ///< best return per window
        nlohmann::json best_checkpoint;
        double best_return{-std::numeric_limits<double>::infinity ()};
        int best_episode{-1};
        nlohmann::json final_checkpoint;
        bool faulted{false};
        std::string fault;
    };

    inline std::vector<double> window_best (const std::vector<EpisodeLog> &episodes, int window)
    {
        std::vector<double> curve;
        for (std::size_t start = 0; start < episodes.size (); start += static_cast<std::size_t> (window))
        {
            const auto end = std::min (episodes.size (), start + static_cast<std::size_t> (window));
            double best = -std::numeric_limits<double>::infinity ();
            for (auto i = start; i < end; ++i)
                best = std::max (best, episodes[i].episode_return);
            curve.push_back (best);
        }
        return curve;
    }

    /// Reset seed of training episode `episode` for run seed `seed`.
    inline std::uint64_t training_reset_seed (std::uint64_t seed, int episode)
    {
        return seed * 1'000'003ULL + static_cast<std::uint64_t> (episode);
    }

    using EpisodeCallback = std::function<void (const SeedRun &, const EpisodeLog &)>;

    /// Trains one seed: `episodes` from scratch, then `fine_tune_episodes`
    /// continuing from the best-return snapshot. A TrainingFault ends the
    /// seed and is reported in the result.
    inline SeedRun train_seed (EnvConfig env_config, const std::string &algorithm, LearnerConfig learner,
                               std::uint64_t seed, const TrainOptions &opts, const EpisodeCallback &on_episode = {})
    {
        if (opts.episodes < 1 || opts.fine_tune_episodes < 0 || opts.window < 1)
            throw ConfigError ("episodes must be >= 1, fine_tune_episodes >= 0, window >= 1");
        env_config.seed = seed;
        learner.seed = seed;
        NarrowSpaceEnv env (env_config);
        auto agent = make_agent (algorithm, StateEncoder::state_dimension (env.observation_dimension ()), learner);

        SeedRun run;
        run.seed = seed;
        const int total = opts.episodes + opts.fine_tune_episodes;
        try
        {
            for (int ep = 0; ep < total; ++ep)
            {
                if (ep == opts.episodes && !run.best_checkpoint.is_null ())
                    agent->restore (run.best_checkpoint);
                EpisodeLog log = run_episode (env, *agent, training_reset_seed (seed, ep), true, true);
                log.episode = ep;
                run.episodes.push_back (log);
                if (log.episode_return > run.best_return)
                {
                    run.best_return = log.episode_return;
                    run.best_episode = ep;
                    run.best_checkpoint = agent->checkpoint ();
                }
                if (on_episode)
                    on_episode (run, log);
            }
        }
        catch (const TrainingFault &e)
        {
            run.faulted = true;
            run.fault = e.what ();
        }
        run.curve = window_best (run.episodes, opts.window);
        run.final_checkpoint = agent->checkpoint ();
        return run;
    }

    inline void write_json_file (const std::filesystem::path &path, const nlohmann::json &j)
    {
        std::ofstream out (path);
        if (!out)
            throw IoError ("cannot write " + path.string ());
        out << j.dump () << '\n';
        if (!out)
            throw IoError ("failed writing " + path.string ());
    }

    inline nlohmann::json read_json_file (const std::filesystem::path &path)
    {
        std::ifstream in (path);
        if (!in)
            throw IoError ("cannot open " + path.string ());
        try
        {
            return nlohmann::json::parse (in);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError ("malformed JSON in " + path.string () + ": " + e.what ());
        }
    }

    /// Writes curve.csv rows (episode_window, best_score, seed) for all runs.
    inline void write_curves (const std::filesystem::path &path, const std::vector<SeedRun> &runs)
    {
        std::ofstream out (path);
        if (!out)
            throw IoError ("cannot write " + path.string ());
        out << "episode_window,best_score,seed\n";
        out.precision (17);
        for (const auto &r : runs)
            for (std::size_t w = 0; w < r.curve.size (); ++w)
                out << w << ',' << r.curve[w] << ',' << r.seed << '\n';
    }

    /// Raw per-episode returns: episode, return, steps, done_reason, seed.
    inline void write_returns (const std::filesystem::path &path, const std::vector<SeedRun> &runs)
    {
        std::ofstream out (path);
        if (!out)
            throw IoError ("cannot write " + path.string ());
        out << "episode,return,steps,done_reason,seed\n";
        out.precision (17);
        for (const auto &r : runs)
            for (const auto &e : r.episodes)
                out << e.episode << ',' << e.episode_return << ',' << e.steps << ',' << to_string (e.reason) << ','
                    << r.seed << '\n';
    }

    /// Checkpoint with provenance: the run config hash travels with the weights.
    inline nlohmann::json stamp_checkpoint (nlohmann::json checkpoint, const std::string &config_hash,
                                            std::uint64_t seed, const EnvConfig &env)
    {
        checkpoint["config_hash"] = config_hash;
        checkpoint["seed"] = seed;
        checkpoint["reward_mode"] = to_string (env.reward.mode);
        checkpoint["n_scans"] = env.n_scans;
        checkpoint["max_range"] = env.max_range;
        return checkpoint;
    }

}  // namespace narrownav
