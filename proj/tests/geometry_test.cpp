#include "oracles.hpp"

#include <narrownav/geometry.hpp>
#include <narrownav/track_io.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace narrownav;

namespace
{
    TrackWorld box_world (double half)
    {
        TrackWorld w;
        w.name = "box";
        const Vec2 c[4] = {{half, half}, {-half, half}, {-half, -half}, {half, -half}};
        for (int i = 0; i < 4; ++i)
            w.walls.push_back ({c[i], c[(i + 1) % 4]});
        return w;
    }
}  // namespace

TEST (Geometry, NormalizeAngleRange)
{
    EXPECT_NEAR (normalize_angle (3.0 * kPi), kPi, 1e-12);
    EXPECT_NEAR (normalize_angle (-kPi / 2.0 - kTwoPi), -kPi / 2.0, 1e-12);
    for (double a = -20.0; a < 20.0; a += 0.37)
    {
        const double n = normalize_angle (a);
        EXPECT_GT (n, -kPi - 1e-12);
        EXPECT_LE (n, kPi + 1e-12);
        EXPECT_NEAR (std::sin (n), std::sin (a), 1e-12);
        EXPECT_NEAR (std::cos (n), std::cos (a), 1e-12);
    }
}

TEST (Geometry, CastRayMatchesParametricOracle)
{
    std::mt19937_64 rng (11);
    std::uniform_real_distribution<double> coord (-5.0, 5.0), ang (-kPi, kPi);
    for (int trial = 0; trial < 300; ++trial)
    {
        std::vector<Segment> walls;
        for (int i = 0; i < 6; ++i)
            walls.push_back ({{coord (rng), coord (rng)}, {coord (rng), coord (rng)}});
        const Vec2 o{coord (rng), coord (rng)};
        const double a = ang (rng);
        double expected = 20.0;
        for (const auto &w : walls)
            if (auto t = oracle::ray_hit (o, unit_vector (a), w.a, w.b))
                expected = std::min (expected, *t);
        EXPECT_NEAR (cast_ray (std::span<const Segment> (walls), o, a, 20.0), expected, 1e-9);
    }
}

TEST (Geometry, ScanInsideSquareRoom)
{
    const TrackWorld room = box_world (2.0);
    Footprint fp;
    fp.lidar_offset = 0.0;
    const auto ranges = scan (room, Pose2D{0.0, 0.0, 0.0}, fp, 8, 10.0);
    ASSERT_EQ (ranges.size (), 8u);
    for (std::size_t i = 0; i < 8; ++i)
        EXPECT_NEAR (ranges[i], i % 2 == 0 ? 2.0 : 2.0 * std::sqrt (2.0), 1e-12) << i;
}

TEST (Geometry, ScanIndexZeroIsForwardAndCounterClockwise)
{
    TrackWorld w;
    w.name = "one wall";
    w.walls.push_back ({{-10.0, 1.5}, {10.0, 1.5}});  // only on the left
    Footprint fp;
    const auto ranges = scan (w, Pose2D{0.0, 0.0, 0.0}, fp, 4, 6.0);
    EXPECT_DOUBLE_EQ (ranges[0], 6.0);
    EXPECT_NEAR (ranges[1], 1.5, 1e-12);  // +90 degrees
    EXPECT_DOUBLE_EQ (ranges[3], 6.0);
}

TEST (Geometry, ScanClampsToMaxRange)
{
    const TrackWorld room = box_world (50.0);
    const auto ranges = scan (room, Pose2D{0.0, 0.0, 0.3}, Footprint{}, 32, 6.0);
    for (double r : ranges)
        EXPECT_DOUBLE_EQ (r, 6.0);
}

TEST (Geometry, OracleCollidesAgreesWithSat)
{
    std::mt19937_64 rng (5);
    std::uniform_real_distribution<double> coord (-2.0, 2.0), ang (-kPi, kPi);
    Footprint fp;
    int hits = 0;
    for (int trial = 0; trial < 20000; ++trial)
    {
        TrackWorld w;
        w.name = "random";
        const Vec2 a{coord (rng), coord (rng)};
        w.walls.push_back ({a, a + unit_vector (ang (rng)) * (0.1 + std::abs (coord (rng)))});
        const Pose2D pose{coord (rng) * 0.5, coord (rng) * 0.5, ang (rng)};
        const bool expected = oracle::sat_overlap (pose, fp.half_length (), fp.half_width (), w.walls[0].a, w.walls[0].b);
        EXPECT_EQ (oracle_collides (w, pose, fp), expected) << "trial " << trial;
        hits += expected;
    }
    EXPECT_GT (hits, 2000);
    EXPECT_LT (hits, 18000);
}

TEST (Geometry, WallFullyInsideFootprintCollides)
{
    TrackWorld w;
    w.name = "inside";
    w.walls.push_back ({{-0.1, 0.0}, {0.1, 0.0}});
    EXPECT_TRUE (oracle_collides (w, Pose2D{0.0, 0.0, 0.7}, Footprint{}));
}

TEST (Geometry, TouchingCountsAsCollision)
{
    Footprint fp;
    TrackWorld w;
    w.name = "touch";
    const double edge = fp.half_width ();
    w.walls.push_back ({{-3.0, edge}, {3.0, edge}});
    EXPECT_TRUE (oracle_collides (w, Pose2D{0.0, 0.0, 0.0}, fp));
    w.walls[0] = {{-3.0, edge + 1e-6}, {3.0, edge + 1e-6}};
    EXPECT_FALSE (oracle_collides (w, Pose2D{0.0, 0.0, 0.0}, fp));
}

TEST (TrackIo, BundledTracksLoadWithCollisionFreeSpawns)
{
    for (const char *name : {"corridor", "turn90", "track1", "track2", "track3", "track4", "track5", "track6", "track7",
                             "track8", "big_track"})
    {
        const TrackWorld w = load_track (oracle::track_path (name));
        EXPECT_EQ (w.name, name);
        EXPECT_FALSE (w.walls.empty ());
        EXPECT_FALSE (w.waypoints.empty ()) << name;
        EXPECT_FALSE (oracle_collides (w, w.spawn, Footprint{})) << name;
    }
}

TEST (TrackIo, JsonRoundTrip)
{
    const TrackWorld w = load_track (oracle::track_path ("turn90"));
    const TrackWorld back = track_from_json (track_to_json (w));
    EXPECT_EQ (back.name, w.name);
    ASSERT_EQ (back.walls.size (), w.walls.size ());
    for (std::size_t i = 0; i < w.walls.size (); ++i)
    {
        EXPECT_EQ (back.walls[i].a, w.walls[i].a);
        EXPECT_EQ (back.walls[i].b, w.walls[i].b);
    }
    EXPECT_EQ (back.spawn, w.spawn);
    EXPECT_EQ (back.waypoints.size (), w.waypoints.size ());
}

TEST (TrackIo, MalformedTracksAreConfigErrors)
{
    EXPECT_THROW (track_from_json (nlohmann::json::parse (R"({"name":"x"})")), ConfigError);
    EXPECT_THROW (track_from_json (nlohmann::json::parse (
                      R"({"name":"x","walls":[[[0,0]]],"spawn":[0,0,0],"exit_band":[[0,0],[1,1]]})")),
                  ConfigError);
    EXPECT_THROW (track_from_json (nlohmann::json::parse (
                      R"({"name":"x","walls":[[[0,0],[0,0]]],"spawn":[0,0,0],"exit_band":[[0,0],[1,1]]})")),
                  ConfigError);
    EXPECT_THROW (load_track ("/nonexistent/track.json"), ConfigError);
}
