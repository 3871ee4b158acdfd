// narrownav: train, evaluate, benchmark, serve and inspect.
//
// Exit codes: 0 success, 1 runtime fault, 2 usage or configuration error.

#include <narrownav/behavior_cloning.hpp>
#include <narrownav/config.hpp>
#include <narrownav/demo_io.hpp>
#include <narrownav/eval.hpp>
#include <narrownav/service.hpp>
#include <narrownav/track_io.hpp>
#include <narrownav/trainer.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace narrownav;

namespace
{
    constexpr int kOk = 0;
    constexpr int kFault = 1;
    constexpr int kUsage = 2;

    fs::path bundled_track_dir ()
    {
        if (const char *dir = std::getenv ("NARROWNAV_TRACKS"))
            return dir;
#ifdef NARROWNAV_TRACK_DIR
        return NARROWNAV_TRACK_DIR;
#else
        return "tracks";
#endif
    }

    std::string default_out_root ()
    {
        const char *out = std::getenv ("NARROWNAV_OUT");
        return out && *out ? out : "runs";
    }

    // A path as given, else a bundled track by file or bare name.
    fs::path resolve_track (const std::string &where)
    {
        if (where.empty ())
            throw ConfigError ("no world given (--world)");
        if (fs::exists (where))
            return where;
        const fs::path bundled = bundled_track_dir ();
        for (const fs::path &candidate : {bundled / where, bundled / (where + ".json")})
            if (fs::exists (candidate))
                return candidate;
        throw ConfigError ("track '" + where + "' not found");
    }

    std::shared_ptr<const TrackWorld> load_world (const std::string &where)
    {
        return std::make_shared<const TrackWorld> (load_track (resolve_track (where)));
    }

    // Shell-style wildcard in the file name; a relative pattern that matches
    // nothing locally is retried against the bundled track directory.
    std::vector<fs::path> expand_glob (const std::string &pattern)
    {
        if (pattern.find_first_of ("*?") == std::string::npos)
            return {resolve_track (pattern)};
        const fs::path p (pattern);
        std::string rx;
        for (char ch : p.filename ().string ())
        {
            if (ch == '*')
                rx += ".*";
            else if (ch == '?')
                rx += '.';
            else if (std::string ("\\^$.|+()[]{}").find (ch) != std::string::npos)
                (rx += '\\') += ch;
            else
                rx += ch;
        }
        const std::regex re (rx);
        auto scan = [&] (const fs::path &dir) {
            std::vector<fs::path> out;
            std::error_code ec;
            for (const auto &entry : fs::directory_iterator (dir, ec))
                if (entry.is_regular_file () && entry.path ().extension () == ".json" &&
                    (std::regex_match (entry.path ().filename ().string (), re) ||
                     std::regex_match (entry.path ().stem ().string (), re)))
                    out.push_back (entry.path ());
            std::sort (out.begin (), out.end ());
            return out;
        };
        const fs::path dir = p.parent_path ().empty () ? fs::path (".") : p.parent_path ();
        auto out = scan (dir);
        if (out.empty () && p.is_relative ())
            out = scan (bundled_track_dir () / p.parent_path ());
        return out;
    }

    void ensure_dir (const fs::path &dir)
    {
        std::error_code ec;
        fs::create_directories (dir, ec);
        if (ec)
            throw IoError ("cannot create output directory " + dir.string () + ": " + ec.message ());
    }

    void dump_config (const fs::path &dir, const RunConfig &cfg, const std::string &command)
    {
        nlohmann::json j = to_json (cfg);
        j["command"] = command;
        j["config_hash"] = config_hash (cfg);
        std::ofstream out (dir / "config.json");
        if (!out)
            throw IoError ("cannot write " + (dir / "config.json").string ());
        out << j.dump (2) << '\n';
    }

    // Flags parsed straight into a RunConfig would clobber file values, so
    // every flag lands in a scratch copy and is applied only if it was given.
    struct Overrides
    {
        std::vector<std::function<void (RunConfig &)>> apply;

        template <typename T>
        CLI::Option *add (CLI::App *app, const std::string &name, T RunConfig::*field, const std::string &help)
        {
            auto value = std::make_shared<T> ();
            auto *opt = app->add_option (name, *value, help);
            apply.push_back ([opt, value, field] (RunConfig &c) {
                if (opt->count () > 0)
                    c.*field = *value;
            });
            return opt;
        }

        template <typename T, typename Fn>
        CLI::Option *add_fn (CLI::App *app, const std::string &name, Fn fn, const std::string &help)
        {
            auto value = std::make_shared<T> ();
            auto *opt = app->add_option (name, *value, help);
            apply.push_back ([opt, value, fn] (RunConfig &c) {
                if (opt->count () > 0)
                    fn (c, *value);
            });
            return opt;
        }

        CLI::Option *flag (CLI::App *app, const std::string &name, std::function<void (RunConfig &)> fn,
                           const std::string &help)
        {
            auto *opt = app->add_flag (name, help);
            apply.push_back ([opt, fn] (RunConfig &c) {
                if (opt->count () > 0)
                    fn (c);
            });
            return opt;
        }
    };

    void add_env_flags (CLI::App *app, Overrides &o)
    {
        o.add_fn<std::string> (
            app, "--reward", [] (RunConfig &c, const std::string &v) { c.env.reward.mode = parse_reward_mode (v); },
            "reward mode: fomt|fot|ft|wg");
        o.add (app, "--world", &RunConfig::world, "track file or bundled track name");
        o.add_fn<std::size_t> (
            app, "--n-scans", [] (RunConfig &c, std::size_t v) { c.env.n_scans = v; }, "raw lidar rays");
        o.add_fn<int> (
            app, "--max-steps", [] (RunConfig &c, int v) { c.env.max_steps = v; }, "episode step limit");
    }

    struct Cli
    {
        RunConfig cfg;
        std::string config_file;
        std::string profile_flag;
        bool quiet{false};
        Overrides overrides;

        void resolve ()
        {
            nlohmann::json file = config_file.empty () ? nlohmann::json::object () : read_json_file (config_file);
            // A preset from the command line still sits under the file's learner keys.
            if (!profile_flag.empty ())
                file["profile"] = profile_flag;
            apply_config_json (file, cfg);
            for (const auto &fn : overrides.apply)
                fn (cfg);
        }

        void log (const std::string &line) const
        {
            if (!quiet)
                std::cerr << line << '\n';
        }
    };

    EnvConfig resolved_env (const RunConfig &cfg)
    {
        EnvConfig env = cfg.env;
        env.world = load_world (cfg.world);
        env.validate ();
        return env;
    }

    // ---- train ----------------------------------------------------------------

    int cmd_train (Cli &cli)
    {
        RunConfig &cfg = cli.cfg;
        if (cfg.algo != "ddpg" && cfg.algo != "dqn")
            throw ConfigError ("--algo must be ddpg or dqn");
        if (cfg.seeds.empty ())
            throw ConfigError ("at least one seed is required");
        cfg.learner.validate ();
        cfg.fine_tune_episodes = fine_tune_budget (cfg);
        const EnvConfig env = resolved_env (cfg);
        const std::string hash = config_hash (cfg);
        const fs::path out = cfg.out;
        ensure_dir (out);
        dump_config (out, cfg, "train");

        const TrainOptions opts{cfg.episodes, cfg.fine_tune_episodes, cfg.window};
        std::vector<SeedRun> runs;
        bool faulted = false;
        for (std::uint64_t seed : cfg.seeds)
        {
            cli.log ("seed " + std::to_string (seed) + ": training " + cfg.algo + "/" + to_string (env.reward.mode) +
                     " on " + env.world->name);
            const int every = std::max (1, (opts.episodes + opts.fine_tune_episodes) / 20);
            SeedRun run = train_seed (env, cfg.algo, cfg.learner, seed, opts, [&] (const SeedRun &r, const EpisodeLog &e) {
                if ((e.episode + 1) % every == 0)
                    cli.log ("  episode " + std::to_string (e.episode + 1) + " return " +
                             std::to_string (e.episode_return) + " (" + to_string (e.reason) + "), best " +
                             std::to_string (r.best_return));
            });
            const fs::path dir = out / ("seed_" + std::to_string (seed));
            ensure_dir (dir);
            if (!run.best_checkpoint.is_null ())
                write_json_file (dir / "best.json", stamp_checkpoint (run.best_checkpoint, hash, seed, env));
            write_json_file (dir / "final.json", stamp_checkpoint (run.final_checkpoint, hash, seed, env));
            if (run.faulted)
            {
                faulted = true;
                std::cerr << "seed " << seed << ": training fault: " << run.fault << '\n';
            }
            runs.push_back (std::move (run));
        }
        write_curves (out / "curve.csv", runs);
        write_returns (out / "returns.csv", runs);
        cli.log ("wrote " + out.string () + " (config " + hash + ")");
        return faulted ? kFault : kOk;
    }

    // ---- eval -----------------------------------------------------------------

    struct EvalFlags
    {
        std::vector<std::string> models;       // [name=]path
        std::vector<std::string> track_globs;
        std::vector<std::string> external;     // csv files of outcomes from elsewhere
    };

    int cmd_eval (Cli &cli, const EvalFlags &flags, bool reward_given)
    {
        RunConfig &cfg = cli.cfg;
        std::vector<std::string> models = flags.models;
        if (models.empty () && !cfg.model.empty ())
            models.push_back (cfg.model);
        if (models.empty () && flags.external.empty ())
            throw ConfigError ("no model given (--model)");
        std::vector<std::string> globs = flags.track_globs;
        if (globs.empty () && !cfg.eval_tracks.empty ())
            globs.push_back (cfg.eval_tracks);
        if (globs.empty () && !flags.models.empty ())
            throw ConfigError ("no tracks given (--tracks)");

        std::vector<std::shared_ptr<const TrackWorld>> tracks;
        for (const auto &g : globs)
        {
            const auto files = expand_glob (g);
            if (files.empty ())
                throw ConfigError ("track glob '" + g + "' matched nothing");
            for (const auto &f : files)
                tracks.push_back (std::make_shared<const TrackWorld> (load_track (f)));
        }

        const fs::path out = cfg.out;
        ensure_dir (out);
        std::ofstream episodes (out / "episodes.jsonl");
        if (!episodes)
            throw IoError ("cannot write " + (out / "episodes.jsonl").string ());

        std::vector<EpisodeResult> results;
        const EvalOptions opts{cfg.eval_episodes, cfg.eval_seed, cfg.eval_jitter};
        for (const auto &arg : models)
        {
            std::string method, path = arg;
            if (const auto eq = arg.find ('='); eq != std::string::npos)
            {
                method = arg.substr (0, eq);
                path = arg.substr (eq + 1);
            }
            if (!fs::exists (path))
                throw ConfigError ("model file '" + path + "' does not exist");
            const nlohmann::json ckpt = read_json_file (path);
            auto agent = load_agent (ckpt);
            EnvConfig env = cfg.env;
            if (!reward_given && ckpt.contains ("reward_mode"))
                env.reward.mode = parse_reward_mode (ckpt["reward_mode"].get<std::string> ());
            env.n_scans = ckpt.value ("n_scans", env.n_scans);
            env.max_range = ckpt.value ("max_range", env.max_range);
            if (method.empty ())
                method = agent->algorithm () == "bc" ? "IL" : "RL_" + to_string (env.reward.mode);
            cli.log ("evaluating " + method + " (" + path + ") on " + std::to_string (tracks.size ()) + " track(s)");
            auto r = run_eval (*agent, method, tracks, env, opts, &episodes);
            results.insert (results.end (), r.begin (), r.end ());
        }
        for (const auto &csv : flags.external)
        {
            auto r = import_external_results (csv);
            results.insert (results.end (), r.begin (), r.end ());
        }

        BenchmarkReport report;
        report.config_hash = config_hash (cfg);
        report.seeds = {cfg.eval_seed};
        report.cells = aggregate (results);
        emit_report (report, out);
        dump_config (out, cfg, "eval");
        std::ifstream txt (out / "report.txt");
        if (!cli.quiet)
            std::cout << txt.rdbuf ();
        return kOk;
    }

    // ---- bench-collision ------------------------------------------------------

    int cmd_bench (Cli &cli, const std::vector<std::string> &worlds, bool write_out)
    {
        RunConfig &cfg = cli.cfg;
        std::vector<std::string> names = worlds;
        if (names.empty ())
            names.push_back (cfg.world.empty () ? "big_track" : cfg.world);
        if (cfg.bench_trials < 1)
            throw ConfigError ("--trials must be at least 1");
        std::vector<std::shared_ptr<const TrackWorld>> loaded;
        for (const auto &w : names)
            loaded.push_back (load_world (w));

        CollisionBenchOptions opts;
        opts.n_rays = cfg.bench_rays;
        opts.resolution = cfg.env.resolution;
        opts.band = cfg.bench_band;
        opts.max_range = cfg.env.max_range;
        opts.sampler = parse_collision_sampler (cfg.bench_sampler);
        opts.dt = cfg.env.dt;
        opts.wheelbase = cfg.env.wheelbase;
        opts.substeps = cfg.env.substeps;
        const auto result = collision_benchmark (cfg.env.footprint, loaded, cfg.bench_trials, cfg.bench_seed, opts);
        const auto &c = result.counts;
        std::cout << "world " << c.world << ", " << c.trials << " ground-truth collisions (seed " << c.seed << ", "
                  << c.n_rays << " rays, " << c.table_size << " selected scans)\n"
                  << "  SR     " << c.sr << '\n'
                  << "  FIRect " << c.firect << '\n'
                  << "  FIFR   " << c.fifr << '\n';
        if (write_out)
        {
            const fs::path out = cfg.out;
            ensure_dir (out);
            BenchmarkReport report;
            report.config_hash = config_hash (cfg);
            report.seeds = {cfg.bench_seed};
            report.collisions = {c};
            emit_report (report, out);
            std::ofstream trials (out / "trials.jsonl");
            for (const auto &t : result.trials)
                trials << nlohmann::json{{"world", loaded[t.world]->name},
                                         {"pose", {t.pose.x, t.pose.y, t.pose.theta}},
                                         {"SR", t.sr},
                                         {"FIRect", t.firect},
                                         {"FIFR", t.fifr}}
                              .dump ()
                       << '\n';
            dump_config (out, cfg, "bench-collision");
        }
        return kOk;
    }

    // ---- serve ----------------------------------------------------------------

    int cmd_serve (Cli &cli, const std::string &demo_dir)
    {
        RunConfig &cfg = cli.cfg;
        if (cfg.world.empty ())
            cfg.world = "corridor";
        const EnvConfig env = resolved_env (cfg);
        ServerOptions opts;
        const auto colon = cfg.bind.rfind (':');
        if (colon == std::string::npos)
            throw ConfigError ("--bind must be HOST:PORT");
        opts.host = cfg.bind.substr (0, colon);
        try
        {
            const int port = std::stoi (cfg.bind.substr (colon + 1));
            if (port < 0 || port > 65535)
                throw std::out_of_range ("port");
            opts.port = static_cast<unsigned short> (port);
        }
        catch (const std::exception &)
        {
            throw ConfigError ("bad port in --bind '" + cfg.bind + "'");
        }
        opts.track_dir = bundled_track_dir ();
        opts.pace = cfg.pace;
        if (!demo_dir.empty ())
        {
            ensure_dir (demo_dir);
            opts.demo_dir = demo_dir;
        }
        TeleopServer server (env, opts);
        server.stop_on_signals ();
        server.start ();
        std::cerr << "serving " << env.world->name << " on " << opts.host << ':' << server.port ()
                  << " (ws /teleop/{session}, GET /health, GET /tracks)\n";
        server.wait ();
        return kOk;
    }

    // ---- clone ----------------------------------------------------------------

    int cmd_clone (Cli &cli, const std::vector<std::string> &demo_files, const std::string &model_out,
                   const CloneOptions &opts)
    {
        if (demo_files.empty ())
            throw ConfigError ("no demo files given (--demos)");
        std::vector<DemoSample> samples;
        double max_range = cli.cfg.env.max_range;
        for (const auto &f : demo_files)
        {
            const DemoFile d = read_demos (f);
            max_range = d.header.max_range;
            const auto s = demo_samples (d.records, StateEncoder{max_range});
            samples.insert (samples.end (), s.begin (), s.end ());
        }
        if (samples.empty ())
            throw ConfigError ("demo files hold no records");
        ClonedPolicy<float> policy (samples.front ().state.size (), cli.cfg.learner.hidden, opts.seed);
        const CloneReport report = behavior_clone (samples, policy, opts);
        cli.log ("cloned " + std::to_string (samples.size ()) + " records, final loss " +
                 std::to_string (report.final_loss));
        nlohmann::json ckpt = policy.checkpoint ();
        ckpt["max_range"] = max_range;
        ckpt["n_scans"] = cli.cfg.env.n_scans;
        ckpt["reward_mode"] = to_string (cli.cfg.env.reward.mode);
        const fs::path out (model_out);
        if (out.has_parent_path ())
            ensure_dir (out.parent_path ());
        write_json_file (out, ckpt);
        return kOk;
    }

    // ---- inspect --------------------------------------------------------------

    int cmd_inspect (Cli &cli, const std::string &table_kind)
    {
        const RunConfig &cfg = cli.cfg;
        const auto &e = cfg.env;
        SafetyRegionTable table;
        if (table_kind == "sr")
            table = build_table (e.footprint, e.n_scans, e.resolution);
        else if (table_kind == "firect")
            table = build_baseline_firect (e.footprint, e.n_scans);
        else if (table_kind == "fifr")
            table = build_baseline_fifr (e.footprint, e.n_scans);
        else
            throw ConfigError ("--table must be sr|firect|fifr");
        nlohmann::json j{{"config_hash", config_hash (cfg)},
                         {"config", to_json (cfg)},
                         {"table",
                          {{"kind", to_string (table.kind)},
                           {"n_scans", table.n_scans},
                           {"size", table.size ()},
                           {"indices", table.indices},
                           {"ranges", table.ranges},
                           {"forward_slot", table.forward_slot ()},
                           {"left_slot", table.left_slot ()},
                           {"right_slot", table.right_slot ()}}}};
        if (!cfg.world.empty ())
        {
            const auto world = load_world (cfg.world);
            j["track"] = {{"name", world->name},
                          {"description", world->description},
                          {"walls", world->walls.size ()},
                          {"waypoints", world->waypoints.size ()},
                          {"spawn", {world->spawn.x, world->spawn.y, world->spawn.theta}},
                          {"spawn_collides", oracle_collides (*world, world->spawn, e.footprint)}};
        }
        else
        {
            j["tracks"] = list_tracks (bundled_track_dir ());
        }
        std::cout << j.dump (2) << '\n';
        return kOk;
    }
}  // namespace

int main (int argc, char **argv)
{
    CLI::App app{"Narrow-space exploration for a rectangular Ackermann robot"};
    app.require_subcommand (1);
    app.fallthrough ();
    Cli cli;
    cli.cfg.out = default_out_root ();
    app.add_option ("--config", cli.config_file, "JSON config file (defaults < file < flags)")->check (CLI::ExistingFile);
    app.add_flag ("-q,--quiet", cli.quiet, "no progress output");
    Overrides &o = cli.overrides;

    auto *train = app.add_subcommand ("train", "train DDPG/DQN agents over several seeds");
    o.add (train, "--algo", &RunConfig::algo, "ddpg|dqn");
    add_env_flags (train, o);
    auto seeds_count = std::make_shared<std::size_t> (0);
    auto seed_first = std::make_shared<std::uint64_t> (0);
    auto *seeds_opt = train->add_option ("--seeds", *seeds_count, "number of seeds")->check (CLI::PositiveNumber);
    auto *seed_opt = train->add_option ("--seed", *seed_first, "first seed (seeds are consecutive)");
    o.apply.push_back ([=] (RunConfig &c) {
        if (seeds_opt->count () == 0 && seed_opt->count () == 0)
            return;
        const std::size_t n = seeds_opt->count () ? *seeds_count : std::max<std::size_t> (1, c.seeds.size ());
        c.seeds.clear ();
        for (std::size_t i = 0; i < n; ++i)
            c.seeds.push_back (*seed_first + i);
    });
    o.add (train, "--episodes", &RunConfig::episodes, "training episodes per seed");
    o.add (train, "--fine-tune", &RunConfig::fine_tune_episodes, "fine-tuning episodes from the best model (default: half of --episodes)");
    o.add (train, "--window", &RunConfig::window, "learning-curve window");
    o.add (train, "--out", &RunConfig::out, "output directory");
    train->add_option ("--profile", cli.profile_flag, "learner preset: full|desk");
    o.add_fn<int> (train, "--hidden", [] (RunConfig &c, int v) { c.learner.hidden = v; }, "hidden layer width");

    auto *eval = app.add_subcommand ("eval", "greedy evaluation on a set of tracks");
    EvalFlags eval_flags;
    eval->add_option ("--model", eval_flags.models, "checkpoint, optionally NAME=PATH (repeatable)");
    eval->add_option ("--tracks", eval_flags.track_globs, "track file or glob (repeatable)");
    eval->add_option ("--external", eval_flags.external, "CSV of externally run episodes to merge (method,track,outcome,time)");
    o.add (eval, "--episodes", &RunConfig::eval_episodes, "episodes per track");
    o.add (eval, "--seed", &RunConfig::eval_seed, "evaluation seed");
    o.add (eval, "--out", &RunConfig::out, "output directory");
    o.flag (eval, "--no-jitter", [] (RunConfig &c) { c.eval_jitter = false; }, "spawn exactly at the track start");
    auto *eval_reward = o.add_fn<std::string> (
        eval, "--reward", [] (RunConfig &c, const std::string &v) { c.env.reward.mode = parse_reward_mode (v); },
        "reward mode (default: from the checkpoint)");

    auto *bench = app.add_subcommand ("bench-collision", "safety-region vs fixed-interval collision detection");
    std::vector<std::string> bench_worlds;
    bench->add_option ("--world", bench_worlds, "track (repeatable; default big_track)");
    o.add (bench, "--trials", &RunConfig::bench_trials, "ground-truth collision poses");
    o.add (bench, "--seed", &RunConfig::bench_seed, "sampler seed");
    o.add (bench, "--rays", &RunConfig::bench_rays, "raw lidar rays");
    o.add (bench, "--band", &RunConfig::bench_band, "sampling band around walls, m");
    o.add (bench, "--sampler", &RunConfig::bench_sampler, "first_contact|static");
    auto *bench_out = o.add (bench, "--out", &RunConfig::out, "write collisions.csv and trials here");

    auto *serve = app.add_subcommand ("serve", "teleoperation websocket server");
    add_env_flags (serve, o);
    o.add (serve, "--bind", &RunConfig::bind, "HOST:PORT (port 0 picks one)");
    o.flag (serve, "--no-pace", [] (RunConfig &c) { c.pace = false; }, "step as fast as possible");
    std::string demo_dir;
    serve->add_option ("--demo-dir", demo_dir, "export demos here when recording stops");

    auto *clone = app.add_subcommand ("clone", "behavior cloning from recorded demos");
    std::vector<std::string> demo_files;
    std::string model_out = "bc_model.json";
    CloneOptions clone_opts;
    clone->add_option ("--demos", demo_files, "demo files (repeatable)")->required ();
    clone->add_option ("--model-out", model_out, "output checkpoint");
    clone->add_option ("--epochs", clone_opts.epochs, "training epochs");
    clone->add_option ("--lr", clone_opts.lr, "learning rate");
    clone->add_option ("--seed", clone_opts.seed, "initialisation and shuffling seed");
    clone->add_option ("--profile", cli.profile_flag, "learner preset for the network width: full|desk");
    o.add_fn<int> (clone, "--hidden", [] (RunConfig &c, int v) { c.learner.hidden = v; }, "hidden layer width");

    auto *inspect = app.add_subcommand ("inspect", "print the resolved config, a scan table and track facts");
    add_env_flags (inspect, o);
    std::string table_kind = "sr";
    inspect->add_option ("--table", table_kind, "sr|firect|fifr");

    try
    {
        app.parse (argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit (e);
        return code == 0 ? kOk : kUsage;
    }

    try
    {
        cli.resolve ();
        if (*train)
            return cmd_train (cli);
        if (*eval)
            return cmd_eval (cli, eval_flags, eval_reward->count () > 0);
        if (*bench)
            return cmd_bench (cli, bench_worlds, bench_out->count () > 0);
        if (*serve)
            return cmd_serve (cli, demo_dir);
        if (*clone)
            return cmd_clone (cli, demo_files, model_out, clone_opts);
        if (*inspect)
            return cmd_inspect (cli, table_kind);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "error: " << e.what () << '\n';
        return kUsage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "fault: " << e.what () << '\n';
        return kFault;
    }
    return kUsage;
}
