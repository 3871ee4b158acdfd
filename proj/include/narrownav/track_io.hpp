#pragma once
/**
 * @file    track_io.hpp
 * @brief   JSON track files: walls as polylines, spawn pose, exit band,
 *          optional waypoints.
 *
 * Schema:
 *   { "name": str,
 *     "walls": [ [[x,y], [x,y], ...], ... ],      // polylines
 *     "spawn": [x, y, theta],
 *     "exit_band": [[x1,y1], [x2,y2]],
 *     "description": str,
 *     "waypoints": [[x, y, theta], ...] }          // optional
 */

#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace narrownav
{
    namespace detail
    {
        inline Vec2 parse_point (const nlohmann::json &j)
        {
            if (!j.is_array () || j.size () != 2)
                throw ConfigError ("track point must be [x, y]");
            return {j.at (0).get<double> (), j.at (1).get<double> ()};
        }

        inline Pose2D parse_pose (const nlohmann::json &j)
        {
            if (!j.is_array () || (j.size () != 2 && j.size () != 3))
                throw ConfigError ("pose must be [x, y, theta]");
            return {j.at (0).get<double> (), j.at (1).get<double> (), j.size () == 3 ? j.at (2).get<double> () : 0.0};
        }
    }  // namespace detail

    inline TrackWorld track_from_json (const nlohmann::json &j)
    {
        TrackWorld world;
        try
        {
            world.name = j.at ("name").get<std::string> ();
            for (const auto &polyline : j.at ("walls"))
            {
                if (!polyline.is_array () || polyline.size () < 2)
                    throw ConfigError ("wall polyline needs at least two points");
                for (std::size_t i = 0; i + 1 < polyline.size (); ++i)
                    world.walls.push_back ({detail::parse_point (polyline[i]), detail::parse_point (polyline[i + 1])});
            }
            world.spawn = detail::parse_pose (j.at ("spawn"));
            const auto &band = j.at ("exit_band");
            if (!band.is_array () || band.size () != 2)
                throw ConfigError ("exit_band must be [[x1,y1],[x2,y2]]");
            world.exit_band = {detail::parse_point (band[0]), detail::parse_point (band[1])};
            world.description = j.value ("description", std::string{});
            if (j.contains ("waypoints"))
                for (const auto &wp : j.at ("waypoints"))
                    world.waypoints.push_back (detail::parse_pose (wp));
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError (std::string ("malformed track: ") + e.what ());
        }
        world.validate ();
        return world;
    }

    /// Walls are written one segment per polyline; chains are not re-joined.
    inline nlohmann::json track_to_json (const TrackWorld &world)
    {
        nlohmann::json walls = nlohmann::json::array ();
        for (const auto &w : world.walls)
            walls.push_back ({{w.a.x, w.a.y}, {w.b.x, w.b.y}});
        nlohmann::json j{{"name", world.name},
                         {"walls", walls},
                         {"spawn", {world.spawn.x, world.spawn.y, world.spawn.theta}},
                         {"exit_band", {{world.exit_band.a.x, world.exit_band.a.y}, {world.exit_band.b.x, world.exit_band.b.y}}},
                         {"description", world.description}};
        if (!world.waypoints.empty ())
        {
            nlohmann::json wps = nlohmann::json::array ();
            for (const auto &p : world.waypoints)
                wps.push_back ({p.x, p.y, p.theta});
            j["waypoints"] = wps;
        }
        return j;
    }

    inline TrackWorld load_track (const std::filesystem::path &path)
    {
        std::ifstream in (path);
        if (!in)
            throw ConfigError ("cannot open track file " + path.string ());
        nlohmann::json j;
        try
        {
            in >> j;
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw ConfigError ("track file " + path.string () + " is not valid JSON: " + e.what ());
        }
        return track_from_json (j);
    }

}  // namespace narrownav
