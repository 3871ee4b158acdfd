#pragma once
/**
 * @file    demo_io.hpp
 * @brief   Line-delimited JSON demonstration files.
 *
 * Line 1 is a header object ({"type": "demo_header", ...}); every further
 * line is one executed step: the observation the operator saw, the
 * previous action, the commanded action and the simulated timestamp.
 */

#include <narrownav/agent.hpp>
#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>
#include <narrownav/safety_region.hpp>
#include <narrownav/vehicle.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace narrownav
{
    struct DemoRecord
    {
        int step{0};
        int episode{0};  ///< reset counter within the recording session
        std::vector<double> v_obs;
        std::vector<double> extras;
        Action prev_action;
        Action action;
        double timestamp{0.0};
        Pose2D pose;  ///< pose before the action was applied
    };

    struct DemoHeader
    {
        std::string world;
        std::uint64_t seed{0};  ///< episode k was reset with seed + k
        std::size_t n_scans{32};
        double max_range{6.0};
        double dt{0.2};
    };

    inline nlohmann::json demo_header_json (const DemoHeader &h)
    {
        return {{"type", "demo_header"}, {"format", "narrownav-demos"}, {"version", 1},        {"world", h.world},
                {"seed", h.seed},        {"n_scans", h.n_scans},         {"max_range", h.max_range}, {"dt", h.dt}};
    }

    inline nlohmann::json demo_record_json (const DemoRecord &r)
    {
        return {{"step", r.step},
                {"episode", r.episode},
                {"v_obs", r.v_obs},
                {"extras", r.extras},
                {"prev_action", {r.prev_action.v, r.prev_action.w}},
                {"v", r.action.v},
                {"w", r.action.w},
                {"timestamp", r.timestamp},
                {"pose", {r.pose.x, r.pose.y, r.pose.theta}}};
    }

    inline DemoRecord demo_record_from_json (const nlohmann::json &j)
    {
        DemoRecord r;
        r.step = j.value ("step", 0);
        r.episode = j.value ("episode", 0);
        r.v_obs = j.at ("v_obs").get<std::vector<double>> ();
        r.extras = j.value ("extras", std::vector<double>{});
        if (j.contains ("prev_action"))
            r.prev_action = {j["prev_action"].at (0).get<double> (), j["prev_action"].at (1).get<double> ()};
        r.action = {j.at ("v").get<double> (), j.at ("w").get<double> ()};
        r.timestamp = j.value ("timestamp", 0.0);
        if (j.contains ("pose"))
            r.pose = {j["pose"].at (0).get<double> (), j["pose"].at (1).get<double> (), j["pose"].at (2).get<double> ()};
        return r;
    }

    inline void write_demos (const std::filesystem::path &path, const DemoHeader &header,
                             const std::vector<DemoRecord> &records)
    {
        std::ofstream out (path);
        if (!out)
            throw IoError ("cannot write demo file " + path.string ());
        out << demo_header_json (header).dump () << '\n';
        for (const auto &r : records)
            out << demo_record_json (r).dump () << '\n';
        if (!out)
            throw IoError ("failed writing demo file " + path.string ());
    }

    struct DemoFile
    {
        DemoHeader header;
        std::vector<DemoRecord> records;
    };

    inline DemoFile read_demos (const std::filesystem::path &path)
    {
        std::ifstream in (path);
        if (!in)
            throw IoError ("cannot open demo file " + path.string ());
        DemoFile file;
        std::string line;
        bool first = true;
        try
        {
            while (std::getline (in, line))
            {
                if (line.empty ())
                    continue;
                const auto j = nlohmann::json::parse (line);
                if (first && j.value ("type", std::string{}) == "demo_header")
                {
                    file.header.world = j.value ("world", std::string{});
                    file.header.seed = j.value ("seed", std::uint64_t{0});
                    file.header.n_scans = j.value ("n_scans", std::size_t{32});
                    file.header.max_range = j.value ("max_range", 6.0);
                    file.header.dt = j.value ("dt", 0.2);
                }
                else
                {
                    file.records.push_back (demo_record_from_json (j));
                }
                first = false;
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError ("malformed demo file " + path.string () + ": " + e.what ());
        }
        return file;
    }

    struct DemoSample
    {
        std::vector<double> state;
        Action action;
    };

    /// Converts records into learner-space (state, action) pairs.
    inline std::vector<DemoSample> demo_samples (const std::vector<DemoRecord> &records, const StateEncoder &encoder)
    {
        std::vector<DemoSample> out;
        out.reserve (records.size ());
        for (const auto &r : records)
            out.push_back ({encoder.encode (Observation{r.v_obs, r.extras}, r.prev_action), r.action.clamped ()});
        return out;
    }

}  // namespace narrownav
