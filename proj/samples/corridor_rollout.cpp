// Drives the bundled corridor with a constant forward command and prints
// the per-step reward breakdown.

#include <narrownav/env.hpp>
#include <narrownav/track_io.hpp>

#include <cstdio>
#include <filesystem>

int main (int argc, char **argv)
{
    using namespace narrownav;
    const std::filesystem::path track =
        argc > 1 ? std::filesystem::path (argv[1]) : std::filesystem::path (NARROWNAV_TRACK_DIR) / "corridor.json";

    EnvConfig cfg;
    cfg.world = std::make_shared<const TrackWorld> (load_track (track));
    cfg.spawn_jitter = false;
    NarrowSpaceEnv env (cfg);
    env.reset (0);
    std::printf ("%zu raw scans, %zu in the safety region\n", cfg.n_scans, env.table ().size ());

    double total = 0.0;
    while (!env.done ())
    {
        const StepOutcome out = env.step ({0.6, 0.0});
        total += out.reward;
        const auto &p = env.state ().pose;
        std::printf ("%4d  x=%6.3f y=%6.3f  f=%7.3f o=%7.3f m=%7.3f t=%5.1f  r=%8.3f\n", env.steps (), p.x, p.y,
                     out.info.forward, out.info.obstacle, out.info.middle, out.info.time, out.reward);
        if (out.done)
            std::printf ("done: %s, return %.3f\n", to_string (out.done_reason).c_str (), total);
    }
}
