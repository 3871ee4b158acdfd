#include "oracles.hpp"
#include "ws_client.hpp"

#include <narrownav/behavior_cloning.hpp>
#include <narrownav/service.hpp>

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>

using namespace narrownav;
namespace fs = std::filesystem;
using namespace wsclient;

namespace
{
    EnvConfig corridor ()
    {
        EnvConfig cfg;
        cfg.world = std::make_shared<const TrackWorld> (load_track (oracle::track_path ("corridor")));
        cfg.seed = 11;
        return cfg;
    }

    nlohmann::json msg (const std::string &type) { return {{"type", type}}; }

    nlohmann::json action (double v, double w) { return {{"type", "action"}, {"v", v}, {"w", w}}; }
}  // namespace

TEST (TeleopSession, ZeroOrderHoldAndLastWriterWins)
{
    TeleopSession s (corridor (), "a");
    AckermannState ref{s.env ().state ().pose, {}};
    s.handle_message (action (0.1, 0.3).dump ());
    s.handle_message (action (0.5, -0.2).dump ());
    for (int i = 0; i < 5; ++i)
    {
        const auto frame = s.tick ();
        ASSERT_TRUE (frame.has_value ());
        ref = step_kinematics (ref, {0.5, -0.2}, 0.2, 0.6, 10);
        EXPECT_EQ ((*frame)["step"], i + 1);
        EXPECT_EQ ((*frame)["pose"][0].get<double> (), ref.pose.x);
        EXPECT_EQ ((*frame)["pose"][2].get<double> (), ref.pose.theta);
    }
    s.submit_action ({9.0, 0.0});
    EXPECT_EQ (s.held_action (), (Action{0.6, 0.0}));
}

TEST (TeleopSession, ResetFrameCarriesSafetyRegion)
{
    TeleopSession s (corridor (), "a");
    const auto first = s.current_frame ();
    EXPECT_EQ (first["reset"], true);
    EXPECT_EQ (first["safety_region"]["indices"].size (), s.env ().table ().size ());
    s.tick ();
    s.handle_message (msg ("reset").dump ());
    const auto frame = s.tick ();
    ASSERT_TRUE (frame.has_value ());
    EXPECT_EQ ((*frame)["reset"], true);
    EXPECT_EQ ((*frame)["episode"], 1);
    EXPECT_EQ ((*frame)["step"], 0);
}

TEST (TeleopSession, IdleAfterEpisodeEnds)
{
    TeleopSession s (corridor (), "a");
    s.submit_action ({0.6, 0.6});
    std::optional<nlohmann::json> frame;
    int ticks = 0;
    while ((frame = s.tick ()))
    {
        ++ticks;
        ASSERT_LT (ticks, 1000);
    }
    EXPECT_TRUE (s.env ().done ());
    EXPECT_FALSE (s.tick ().has_value ());
}

TEST (TeleopSession, MalformedMessagesProduceErrorFrames)
{
    TeleopSession s (corridor (), "a");
    for (const std::string bad : {"{", "[]", R"({"type":"fly"})", R"({"type":"action","v":"fast","w":0})",
                                  R"({"type":"record"})", R"({"v":1})"})
    {
        const auto err = s.handle_message (bad);
        ASSERT_TRUE (err.has_value ()) << bad;
        EXPECT_EQ ((*err)["type"], "error");
        EXPECT_TRUE ((*err)["message"].is_string ());
    }
    EXPECT_EQ (s.held_action (), Action{});
}

TEST (TeleopSession, RecordingReplaysExactly)
{
    TeleopSession s (corridor (), "a");
    s.handle_message (R"({"type":"record","on":true})");
    for (int i = 0; i < 30; ++i)
    {
        s.submit_action ({0.6, (i % 7 - 3) * 0.05});
        s.tick ();
    }
    EXPECT_EQ (s.demos ().size (), 30u);
    const auto dir = fs::temp_directory_path () / "narrownav_service";
    fs::create_directories (dir);
    EXPECT_THROW (s.export_demos (dir / "d.jsonl"), LifecycleError);
    s.handle_message (msg ("record_stop").dump ());
    s.export_demos (dir / "d.jsonl");

    const auto file = read_demos (dir / "d.jsonl");
    ASSERT_EQ (file.records.size (), 30u);
    EXPECT_EQ (file.header.world, "corridor");
    NarrowSpaceEnv env (corridor ());
    env.reset (file.header.seed);
    for (const auto &r : file.records)
    {
        EXPECT_EQ (r.pose, env.state ().pose);
        env.step (r.action);
    }
    EXPECT_EQ (env.state ().pose, s.env ().state ().pose);
}

TEST (TeleopServer, HttpRoutes)
{
    ServerOptions opts;
    opts.port = 0;
    opts.track_dir = NARROWNAV_TRACK_DIR;
    TeleopServer server (corridor (), opts);
    server.start ();
    const auto [hs, health] = http_get (server.port (), "/health");
    EXPECT_EQ (hs, http::status::ok);
    EXPECT_EQ (nlohmann::json::parse (health), (nlohmann::json{{"status", "ok"}}));
    const auto [ts, tracks] = http_get (server.port (), "/tracks");
    EXPECT_EQ (ts, http::status::ok);
    EXPECT_GE (nlohmann::json::parse (tracks)["tracks"].size (), 10u);
    const auto [ns, missing] = http_get (server.port (), "/nope");
    EXPECT_EQ (ns, http::status::not_found);
    EXPECT_EQ (nlohmann::json::parse (missing)["type"], "error");
    EXPECT_THROW (WsTestClient (server.port (), "/teleop/bad$id"), boost::system::system_error);

    ServerOptions busy = opts;
    busy.port = server.port ();
    TeleopServer second (corridor (), busy);
    EXPECT_THROW (second.start (), IoError);
    server.stop ();
}

TEST (TeleopServer, PacedLoopRecordsDemosThatClone)
{
    const auto demo_dir = fs::temp_directory_path () / "narrownav_service_demos";
    fs::remove_all (demo_dir);
    fs::create_directories (demo_dir);
    ServerOptions opts;
    opts.port = 0;
    opts.demo_dir = demo_dir;
    TeleopServer server (corridor (), opts);
    server.start ();

    WsTestClient client (server.port (), "/teleop/t1");
    EXPECT_EQ (client.read ()["reset"], true);
    client.send (action (0.3, 0.0));
    client.send (msg ("record_start"));
    EXPECT_EQ (client.read_until ("record")["on"], true);

    int recorded = 0;
    int last_step = -1;
    std::vector<std::chrono::steady_clock::time_point> arrivals;
    while (recorded < 50)
    {
        const auto f = client.read ();
        ASSERT_EQ (f["type"], "state");
        ASSERT_FALSE (f["done"].get<bool> ()) << "episode ended before 50 ticks";
        arrivals.push_back (std::chrono::steady_clock::now ());
        const int step = f["step"].get<int> ();
        if (last_step >= 0)
            EXPECT_EQ (step, last_step + 1);
        last_step = step;
        ++recorded;
    }
    client.send (msg ("record_stop"));
    nlohmann::json ack;
    for (;;)
    {
        ack = client.read ();
        if (ack["type"] == "record")
            break;
        ++recorded;  // ticks that ran before the stop was processed
    }
    const double span = std::chrono::duration<double> (arrivals.back () - arrivals.front ()).count ();
    const double hz = (arrivals.size () - 1) / span;
    EXPECT_NEAR (hz, 5.0, 0.5);

    EXPECT_EQ (ack["on"], false);
    EXPECT_EQ (ack["records"], recorded);
    ASSERT_TRUE (ack.contains ("file"));
    const auto file = read_demos (ack["file"].get<std::string> ());
    EXPECT_EQ (static_cast<int> (file.records.size ()), recorded);
    EXPECT_GE (file.records.size (), 50u);

    client.send (nlohmann::json{{"type", "warp"}});
    EXPECT_EQ (client.read_until ("error")["type"], "error");
    client.ws.close (websocket::close_code::normal);
    server.stop ();

    const auto samples = demo_samples (file.records, StateEncoder{file.header.max_range});
    ClonedPolicy<float> policy (samples.front ().state.size (), 16, 0);
    CloneOptions co;
    co.epochs = 20;
    const auto report = behavior_clone (samples, policy, co);
    EXPECT_TRUE (std::isfinite (report.final_loss));
    EXPECT_LT (report.epoch_losses.back (), report.epoch_losses.front ());
}
