#pragma once
/**
 * @file    eval.hpp
 * @brief   Greedy policy evaluation over tracks, metric aggregation,
 *          report files, and the randomized collision-detection benchmark.
 */

#include <narrownav/agent.hpp>
#include <narrownav/behavior_cloning.hpp>
#include <narrownav/ddpg.hpp>
#include <narrownav/dqn.hpp>
#include <narrownav/env.hpp>
#include <narrownav/errors.hpp>
#include <narrownav/safety_region.hpp>
#include <narrownav/trainer.hpp>
#include <narrownav/vehicle.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace narrownav
{
    enum class Outcome
    {
        success,
        fail,
        collision
    };

    inline std::string to_string (Outcome o)
    {
        switch (o)
        {
        case Outcome::success: return "success";
        case Outcome::fail: return "fail";
        case Outcome::collision: return "collision";
        }
        return "?";
    }

    inline Outcome parse_outcome (const std::string &s)
    {
        if (s == "success")
            return Outcome::success;
        if (s == "fail")
            return Outcome::fail;
        if (s == "collision")
            return Outcome::collision;
        throw ConfigError ("unknown outcome '" + s + "'");
    }

    inline Outcome outcome_of (DoneReason r)
    {
        switch (r)
        {
        case DoneReason::open_space: return Outcome::success;
        case DoneReason::collision: return Outcome::collision;
        default: return Outcome::fail;
        }
    }

    struct EpisodeResult
    {
        std::string method;
        std::string track;
        Outcome outcome{Outcome::fail};
        int steps{0};
        double sim_time{0.0};
        std::uint64_t seed{0};
        double reward_total{0.0};
    };

    inline nlohmann::json to_json (const EpisodeResult &r)
    {
        return {{"method", r.method}, {"track", r.track},   {"outcome", to_string (r.outcome)}, {"steps", r.steps},
                {"sim_time", r.sim_time}, {"seed", r.seed}, {"reward_total", r.reward_total}};
    }

    /// One (method, track) cell of the results table.
    struct CellMetrics
    {
        std::string method;
        std::string track;
        int episodes{0};
        double success_rate{0.0};
        double fail_rate{0.0};
        double collision_rate{0.0};
        std::optional<double> avg_success_time;  ///< absent when nothing succeeded

        bool operator== (const CellMetrics &) const = default;
    };

    /// Detected-collision counts per scan representation on the same raw scans.
    struct CollisionCounts
    {
        std::string world;
        std::size_t trials{0};
        std::uint64_t seed{0};
        std::size_t n_rays{0};
        std::size_t table_size{0};
        std::size_t sr{0};
        std::size_t firect{0};
        std::size_t fifr{0};

        bool operator== (const CollisionCounts &) const = default;
    };

    struct BenchmarkReport
    {
        std::string config_hash;
        std::vector<std::uint64_t> seeds;
        std::vector<CellMetrics> cells;
        std::vector<CollisionCounts> collisions;

        bool operator== (const BenchmarkReport &) const = default;
    };

    /// Groups results by (method, track) in first-seen order.
    inline std::vector<CellMetrics> aggregate (const std::vector<EpisodeResult> &results)
    {
        std::vector<CellMetrics> cells;
        std::map<std::pair<std::string, std::string>, std::size_t> where;
        std::vector<std::array<int, 3>> counts;
        std::vector<double> success_time;
        for (const auto &r : results)
        {
            auto [it, fresh] = where.emplace (std::make_pair (r.method, r.track), cells.size ());
            if (fresh)
            {
                cells.push_back ({r.method, r.track});
                counts.push_back ({0, 0, 0});
                success_time.push_back (0.0);
            }
            const std::size_t c = it->second;
            ++cells[c].episodes;
            ++counts[c][static_cast<std::size_t> (r.outcome)];
            if (r.outcome == Outcome::success)
                success_time[c] += r.sim_time;
        }
        for (std::size_t c = 0; c < cells.size (); ++c)
        {
            const double n = cells[c].episodes;
            cells[c].success_rate = counts[c][0] / n;
            cells[c].fail_rate = counts[c][1] / n;
            cells[c].collision_rate = counts[c][2] / n;
            if (counts[c][0] > 0)
                cells[c].avg_success_time = success_time[c] / counts[c][0];
        }
        return cells;
    }

    /// Rebuilds a learner or cloned policy from its checkpoint JSON.
    inline std::unique_ptr<Agent> load_agent (const nlohmann::json &checkpoint)
    {
        try
        {
            const auto algorithm = checkpoint.at ("algorithm").get<std::string> ();
            if (algorithm == "ddpg")
                return DdpgAgent<float>::from_checkpoint (checkpoint);
            if (algorithm == "dqn")
                return DqnAgent<float>::from_checkpoint (checkpoint);
            if (algorithm == "bc")
                return ClonedPolicy<float>::from_checkpoint (checkpoint);
            throw ConfigError ("checkpoint has unknown algorithm '" + algorithm + "'");
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError (std::string ("malformed checkpoint: ") + e.what ());
        }
    }

    struct EvalOptions
    {
        int episodes_per_track{70};
        std::uint64_t seed{0};
        /// Seeded spawn jitter per episode; without it greedy rollouts are all identical.
        bool spawn_jitter{true};
    };

    inline std::uint64_t eval_reset_seed (std::uint64_t seed, int episode)
    {
        return seed * 7'919ULL + 17ULL * static_cast<std::uint64_t> (episode) + 1ULL;
    }

    /// Greedy rollouts of `agent` on every track; env_template supplies everything but the world.
    inline std::vector<EpisodeResult> run_eval (Agent &agent, const std::string &method,
                                                const std::vector<std::shared_ptr<const TrackWorld>> &tracks,
                                                EnvConfig env_template, const EvalOptions &opts,
                                                std::ostream *episode_log = nullptr)
    {
        if (opts.episodes_per_track < 1)
            throw ConfigError ("episodes per track must be positive");
        std::vector<EpisodeResult> results;
        env_template.spawn_jitter = opts.spawn_jitter;
        env_template.seed = opts.seed;
        for (const auto &track : tracks)
        {
            EnvConfig cfg = env_template;
            cfg.world = track;
            NarrowSpaceEnv env (cfg);
            const std::size_t dim = StateEncoder::state_dimension (env.observation_dimension ());
            if (agent.state_dimension () != dim)
                throw ConfigError ("model expects state dimension " + std::to_string (agent.state_dimension ()) +
                                   " but track '" + track->name + "' gives " + std::to_string (dim));
            for (int ep = 0; ep < opts.episodes_per_track; ++ep)
            {
                const std::uint64_t reset_seed = eval_reset_seed (opts.seed, ep);
                const EpisodeLog log = run_episode (env, agent, reset_seed, false, false);
                EpisodeResult r{method,      track->name, outcome_of (log.reason), log.steps,
                                log.steps * cfg.dt, reset_seed, log.episode_return};
                if (episode_log)
                    *episode_log << to_json (r).dump () << '\n';
                results.push_back (std::move (r));
            }
        }
        return results;
    }

    // ---- report files ------------------------------------------------------

    namespace detail
    {
        inline std::string format_double (double v)
        {
            char buf[64];
            const auto res = std::to_chars (buf, buf + sizeof buf, v);
            return std::string (buf, res.ptr);
        }

        inline double parse_double (const std::string &s)
        {
            double v = 0.0;
            const auto res = std::from_chars (s.data (), s.data () + s.size (), v);
            if (res.ec != std::errc{} || res.ptr != s.data () + s.size ())
                throw ConfigError ("bad number '" + s + "' in report");
            return v;
        }

        inline std::vector<std::string> split_csv (const std::string &line)
        {
            std::vector<std::string> out;
            std::string field;
            std::istringstream in (line);
            while (std::getline (in, field, ','))
                out.push_back (field);
            if (!line.empty () && line.back () == ',')
                out.emplace_back ();
            return out;
        }

        inline std::ofstream open_out (const std::filesystem::path &path)
        {
            std::ofstream out (path);
            if (!out)
                throw IoError ("cannot write " + path.string ());
            return out;
        }
    }  // namespace detail

    inline constexpr const char *kReportHeader =
        "method,track,episodes,success_rate,fail_rate,collision_rate,avg_success_time";
    inline constexpr const char *kCollisionHeader = "world,trials,seed,n_rays,table_size,SR,FIRect,FIFR";

    /// Writes report.csv, collisions.csv and a human-readable report.txt into `dir`.
    inline void emit_report (const BenchmarkReport &report, const std::filesystem::path &dir)
    {
        using detail::format_double;
        std::error_code ec;
        std::filesystem::create_directories (dir, ec);
        if (ec)
            throw IoError ("cannot create " + dir.string () + ": " + ec.message ());

        std::string seeds;
        for (std::size_t i = 0; i < report.seeds.size (); ++i)
            seeds += (i ? ";" : "") + std::to_string (report.seeds[i]);

        {
            auto out = detail::open_out (dir / "report.csv");
            out << "# config_hash=" << report.config_hash << "\n# seeds=" << seeds << '\n' << kReportHeader << '\n';
            for (const auto &c : report.cells)
                out << c.method << ',' << c.track << ',' << c.episodes << ',' << format_double (c.success_rate) << ','
                    << format_double (c.fail_rate) << ',' << format_double (c.collision_rate) << ','
                    << (c.avg_success_time ? format_double (*c.avg_success_time) : "") << '\n';
            if (!out)
                throw IoError ("failed writing report.csv");
        }
        {
            auto out = detail::open_out (dir / "collisions.csv");
            out << "# config_hash=" << report.config_hash << '\n' << kCollisionHeader << '\n';
            for (const auto &c : report.collisions)
                out << c.world << ',' << c.trials << ',' << c.seed << ',' << c.n_rays << ',' << c.table_size << ','
                    << c.sr << ',' << c.firect << ',' << c.fifr << '\n';
        }

        // Methods as rows, tracks x metrics as columns.
        auto out = detail::open_out (dir / "report.txt");
        out << "config hash: " << report.config_hash << "\nseeds: " << (seeds.empty () ? "-" : seeds) << "\n\n";
        std::vector<std::string> methods, tracks;
        for (const auto &c : report.cells)
        {
            if (std::find (methods.begin (), methods.end (), c.method) == methods.end ())
                methods.push_back (c.method);
            if (std::find (tracks.begin (), tracks.end (), c.track) == tracks.end ())
                tracks.push_back (c.track);
        }
        char line[256];
        for (const auto &t : tracks)
        {
            out << "== " << t << '\n';
            std::snprintf (line, sizeof line, "%-16s %8s %8s %8s %10s %6s\n", "method", "success", "fail", "collide",
                           "avg_time_s", "n");
            out << line;
            for (const auto &m : methods)
                for (const auto &c : report.cells)
                    if (c.method == m && c.track == t)
                    {
                        std::string avg = c.avg_success_time ? format_double (std::round (*c.avg_success_time * 100.0) / 100.0) : "-";
                        std::snprintf (line, sizeof line, "%-16s %8.3f %8.3f %8.3f %10s %6d\n", m.c_str (),
                                       c.success_rate, c.fail_rate, c.collision_rate, avg.c_str (), c.episodes);
                        out << line;
                    }
            out << '\n';
        }
        if (!report.collisions.empty ())
        {
            out << "== detected collisions\n";
            for (const auto &c : report.collisions)
            {
                const auto pct = [&] (std::size_t n) { return 100.0 * static_cast<double> (n) / static_cast<double> (c.trials); };
                std::snprintf (line, sizeof line, "%s: %zu trials, %zu rays, %zu scans | SR %zu (%.1f%%)  FIRect %zu (%.1f%%)  FIFR %zu (%.1f%%)\n",
                               c.world.c_str (), c.trials, c.n_rays, c.table_size, c.sr, pct (c.sr), c.firect,
                               pct (c.firect), c.fifr, pct (c.fifr));
                out << line;
            }
        }
    }

    /// Inverse of emit_report (reads report.csv and, when present, collisions.csv).
    inline BenchmarkReport parse_report (const std::filesystem::path &dir)
    {
        BenchmarkReport report;
        std::ifstream in (dir / "report.csv");
        if (!in)
            throw IoError ("cannot open " + (dir / "report.csv").string ());
        std::string line;
        bool header_seen = false;
        while (std::getline (in, line))
        {
            if (line.rfind ("# config_hash=", 0) == 0)
            {
                report.config_hash = line.substr (14);
                continue;
            }
            if (line.rfind ("# seeds=", 0) == 0)
            {
                std::istringstream s (line.substr (8));
                std::string tok;
                while (std::getline (s, tok, ';'))
                    if (!tok.empty ())
                        report.seeds.push_back (std::stoull (tok));
                continue;
            }
            if (!header_seen)
            {
                if (line != kReportHeader)
                    throw ConfigError ("report.csv has an unexpected header");
                header_seen = true;
                continue;
            }
            if (line.empty ())
                continue;
            const auto f = detail::split_csv (line);
            if (f.size () != 7)
                throw ConfigError ("report.csv row has " + std::to_string (f.size ()) + " fields");
            CellMetrics c{f[0], f[1], std::stoi (f[2]), detail::parse_double (f[3]), detail::parse_double (f[4]),
                          detail::parse_double (f[5])};
            if (!f[6].empty ())
                c.avg_success_time = detail::parse_double (f[6]);
            report.cells.push_back (std::move (c));
        }

        std::ifstream cin (dir / "collisions.csv");
        if (cin)
        {
            while (std::getline (cin, line))
            {
                if (line.empty () || line[0] == '#' || line == kCollisionHeader)
                    continue;
                const auto f = detail::split_csv (line);
                if (f.size () != 8)
                    throw ConfigError ("collisions.csv row has " + std::to_string (f.size ()) + " fields");
                report.collisions.push_back ({f[0], std::stoul (f[1]), std::stoull (f[2]), std::stoul (f[3]),
                                              std::stoul (f[4]), std::stoul (f[5]), std::stoul (f[6]), std::stoul (f[7])});
            }
        }
        return report;
    }

    /// External planner results (CSV with method, track, outcome, time columns; any order).
    inline std::vector<EpisodeResult> import_external_results (const std::filesystem::path &path)
    {
        std::ifstream in (path);
        if (!in)
            throw IoError ("cannot open " + path.string ());
        std::string line;
        if (!std::getline (in, line))
            throw ConfigError ("external results file is empty");
        const auto header = detail::split_csv (line);
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < header.size (); ++i)
            col[header[i]] = i;
        for (const char *k : {"method", "track", "outcome", "time"})
            if (!col.count (k))
                throw ConfigError (std::string ("external results lack a '") + k + "' column");

        std::vector<EpisodeResult> out;
        while (std::getline (in, line))
        {
            if (line.empty ())
                continue;
            const auto f = detail::split_csv (line);
            if (f.size () < header.size ())
                throw ConfigError ("short row in " + path.string ());
            EpisodeResult r;
            r.method = f[col["method"]];
            r.track = f[col["track"]];
            r.outcome = parse_outcome (f[col["outcome"]]);
            r.sim_time = f[col["time"]].empty () ? 0.0 : detail::parse_double (f[col["time"]]);
            out.push_back (std::move (r));
        }
        return out;
    }

    // ---- collision benchmark -------------------------------------------------

    enum class CollisionSampler
    {
        first_contact,  ///< free pose in the band, one random control step, keep if it now collides
        static_overlap  ///< any pose in the band that overlaps a wall
    };

    inline CollisionSampler parse_collision_sampler (const std::string &s)
    {
        if (s == "first_contact")
            return CollisionSampler::first_contact;
        if (s == "static")
            return CollisionSampler::static_overlap;
        throw ConfigError ("unknown collision sampler '" + s + "' (expected first_contact|static)");
    }

    inline std::string to_string (CollisionSampler s)
    {
        return s == CollisionSampler::first_contact ? "first_contact" : "static";
    }

    struct CollisionBenchOptions
    {
        std::size_t n_rays{720};
        double resolution{0.095};
        double band{0.5};
        double max_range{6.0};
        CollisionSampler sampler{CollisionSampler::first_contact};
        double dt{0.2};
        double wheelbase{0.6};
        int substeps{10};
    };

    struct CollisionTrial
    {
        std::size_t world{0};
        Pose2D pose;
        bool sr{false};
        bool firect{false};
        bool fifr{false};
    };

    struct CollisionBenchResult
    {
        CollisionCounts counts;
        std::vector<CollisionTrial> trials;
    };

    /// Seeded rejection sampler over ground-truth collision poses near walls.
    /// Trials are drawn sequentially, so a longer run extends a shorter one.
    inline CollisionBenchResult collision_benchmark (const Footprint &fp,
                                                     const std::vector<std::shared_ptr<const TrackWorld>> &worlds,
                                                     std::size_t n_trials, std::uint64_t seed,
                                                     const CollisionBenchOptions &opts = {})
    {
        if (n_trials < 1)
            throw ConfigError ("trials must be at least 1");
        if (worlds.empty ())
            throw ConfigError ("collision benchmark needs at least one world");
        if (!(opts.band > 0.0))
            throw ConfigError ("sampling band must be positive");

        const SafetyRegionTable sr = build_table (fp, opts.n_rays, opts.resolution);
        const SafetyRegionTable firect = build_baseline_firect (fp, opts.n_rays, sr.size ());
        const SafetyRegionTable fifr = build_baseline_fifr (fp, opts.n_rays, sr.size ());

        struct WallRef
        {
            std::size_t world;
            const Segment *wall;
        };
        std::vector<WallRef> walls;
        std::vector<double> lengths;
        for (std::size_t w = 0; w < worlds.size (); ++w)
            for (const auto &s : worlds[w]->walls)
            {
                walls.push_back ({w, &s});
                lengths.push_back (s.length ());
            }

        std::mt19937_64 rng (seed);
        std::discrete_distribution<std::size_t> pick_wall (lengths.begin (), lengths.end ());
        std::uniform_real_distribution<double> unit (0.0, 1.0);
        std::uniform_real_distribution<double> sym (-1.0, 1.0);

        CollisionBenchResult result;
        result.counts.world = worlds.size () == 1 ? worlds.front ()->name : "multi";
        result.counts.trials = n_trials;
        result.counts.seed = seed;
        result.counts.n_rays = opts.n_rays;
        result.counts.table_size = sr.size ();

        const std::size_t max_attempts = 100'000 * n_trials;
        std::size_t attempts = 0;
        while (result.trials.size () < n_trials)
        {
            if (++attempts > max_attempts)
                throw ConfigError ("collision sampler found too few colliding poses");
            const WallRef &ref = walls[pick_wall (rng)];
            const Vec2 along = ref.wall->b - ref.wall->a;
            const Vec2 dir = along * (1.0 / along.norm ());
            const Vec2 normal{-dir.y, dir.x};
            const Vec2 p = ref.wall->a + along * unit (rng) + normal * (opts.band * sym (rng));
            Pose2D pose (p.x, p.y, kPi * sym (rng));
            const TrackWorld &world = *worlds[ref.world];

            if (opts.sampler == CollisionSampler::first_contact)
            {
                if (oracle_collides (world, pose, fp))
                    continue;
                const Action a{kActionLimit * sym (rng), kActionLimit * sym (rng)};
                pose = step_kinematics ({pose, {}}, a, opts.dt, opts.wheelbase, opts.substeps).pose;
            }
            if (!oracle_collides (world, pose, fp))
                continue;

            const auto raw = scan (world, pose, fp, opts.n_rays, opts.max_range);
            CollisionTrial t{ref.world, pose, detect_collision (sr, raw), detect_collision (firect, raw),
                             detect_collision (fifr, raw)};
            result.counts.sr += t.sr;
            result.counts.firect += t.firect;
            result.counts.fifr += t.fifr;
            result.trials.push_back (t);
        }
        return result;
    }

}  // namespace narrownav
