#pragma once
/**
 * @file    geometry.hpp
 * @brief   Planar primitives for track worlds: poses, wall segments,
 *          rectangular footprints, ray casting and exact footprint/wall
 *          overlap queries.
 *
 * Conventions:
 * - World frame is right-handed, meters and radians.
 * - Heading theta is measured counter-clockwise from +x and kept in (-pi, pi].
 * - The robot reference point is the body center; the lidar sits
 *   `lidar_offset` meters ahead of it along the heading.
 */

#include <narrownav/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace narrownav
{
    inline constexpr double kPi = std::numbers::pi;
    inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

    /// Wraps an angle into (-pi, pi].
    inline double normalize_angle (double a)
    {
        if (!std::isfinite (a))
            return a;
        a = std::remainder (a, kTwoPi);  // [-pi, pi]
        if (a <= -kPi)
            a += kTwoPi;
        return a;
    }

    /// Wraps an angle into [0, 2*pi).
    inline double wrap_positive (double a)
    {
        a = std::fmod (a, kTwoPi);
        if (a < 0.0)
            a += kTwoPi;
        if (a >= kTwoPi)
            a = 0.0;
        return a;
    }

    struct Vec2
    {
        double x{0.0};
        double y{0.0};

        constexpr Vec2 operator+ (Vec2 o) const { return {x + o.x, y + o.y}; }
        constexpr Vec2 operator- (Vec2 o) const { return {x - o.x, y - o.y}; }
        constexpr Vec2 operator* (double s) const { return {x * s, y * s}; }
        constexpr bool operator== (const Vec2 &) const = default;

        double norm () const { return std::hypot (x, y); }
    };

    constexpr double dot (Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
    constexpr double cross (Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
    inline Vec2 unit_vector (double angle) { return {std::cos (angle), std::sin (angle)}; }
    inline Vec2 rotate (Vec2 v, double angle)
    {
        const double c = std::cos (angle), s = std::sin (angle);
        return {c * v.x - s * v.y, s * v.x + c * v.y};
    }

    struct Pose2D
    {
        double x{0.0};
        double y{0.0};
        double theta{0.0};

        Pose2D () = default;
        Pose2D (double px, double py, double heading) : x (px), y (py), theta (normalize_angle (heading)) {}

        Vec2 position () const { return {x, y}; }
        /// Maps a body-frame point into the world frame.
        Vec2 transform (Vec2 local) const { return position () + rotate (local, theta); }

        bool operator== (const Pose2D &) const = default;
    };

    struct Segment
    {
        Vec2 a;
        Vec2 b;

        double length () const { return (b - a).norm (); }
    };

    /// Rectangular robot body plus lidar mount and safety inflation.
    struct Footprint
    {
        double length{1.0};
        double width{0.6};
        double lidar_offset{0.2};
        double safety_margin{0.05};

        void validate () const
        {
            if (!(length > 0.0) || !(width > 0.0))
                throw ConfigError ("footprint length and width must be positive");
            if (!(safety_margin >= 0.0))
                throw ConfigError ("footprint safety_margin must be non-negative");
            if (!(std::abs (lidar_offset) < length / 2.0))
                throw ConfigError ("lidar_offset must lie inside the body");
        }

        double half_length () const { return length / 2.0 + safety_margin; }
        double half_width () const { return width / 2.0 + safety_margin; }

        Vec2 lidar_origin (const Pose2D &pose) const { return pose.transform ({lidar_offset, 0.0}); }
    };

    /// Inflated footprint corners in the world frame, counter-clockwise
    /// starting at the front-left corner.
    inline std::array<Vec2, 4> footprint_polygon (const Pose2D &pose, const Footprint &fp)
    {
        const double hl = fp.half_length ();
        const double hw = fp.half_width ();
        return {pose.transform ({hl, hw}), pose.transform ({-hl, hw}), pose.transform ({-hl, -hw}),
                pose.transform ({hl, -hw})};
    }

    /// Distance along the ray to the segment, or +inf when it misses.
    /// Touching an endpoint counts as a hit.
    inline double ray_segment_distance (Vec2 origin, Vec2 dir, const Segment &seg)
    {
        constexpr double kInf = std::numeric_limits<double>::infinity ();
        const Vec2 e = seg.b - seg.a;
        const Vec2 w = seg.a - origin;
        const double denom = cross (dir, e);
        const double scale = std::max (1.0, e.norm ());

        if (std::abs (denom) <= 1e-15 * scale)
        {
            // Parallel. Only a collinear segment can be hit.
            if (std::abs (cross (w, dir)) > 1e-12 * scale)
                return kInf;
            const double ta = dot (seg.a - origin, dir);
            const double tb = dot (seg.b - origin, dir);
            if (ta < 0.0 && tb < 0.0)
                return kInf;
            if (ta <= 0.0 || tb <= 0.0)
                return 0.0;  // origin lies on the segment
            return std::min (ta, tb);
        }

        const double t = cross (w, e) / denom;
        const double s = cross (w, dir) / denom;
        if (t < 0.0 || s < 0.0 || s > 1.0)
            return kInf;
        return t;
    }

    /// Range to the nearest wall along `angle`, capped at max_range.
    inline double cast_ray (std::span<const Segment> walls, Vec2 origin, double angle, double max_range)
    {
        const Vec2 dir = unit_vector (angle);
        double best = max_range;
        for (const auto &w : walls)
            best = std::min (best, ray_segment_distance (origin, dir, w));
        return best;
    }

    /// A named static world of wall segments.
    struct TrackWorld
    {
        std::string name;
        std::vector<Segment> walls;
        Pose2D spawn;
        Segment exit_band;
        std::string description;
        /// Optional guidance poses along the centerline (waypoint-guided reward).
        std::vector<Pose2D> waypoints;

        void validate () const
        {
            if (walls.empty ())
                throw ConfigError ("track '" + name + "' has no walls");
            for (const auto &w : walls)
                if (!(w.length () > 0.0))
                    throw ConfigError ("track '" + name + "' contains a zero-length wall");
        }
    };

    inline double cast_ray (const TrackWorld &world, Vec2 origin, double angle, double max_range)
    {
        return cast_ray (std::span<const Segment> (world.walls), origin, angle, max_range);
    }

    /// Raw lidar sweep: n_scans rays evenly spaced over 2*pi, index 0 straight
    /// ahead, indices increasing counter-clockwise.
    inline std::vector<double> scan (const TrackWorld &world, const Pose2D &pose, const Footprint &fp,
                                     std::size_t n_scans, double max_range)
    {
        const Vec2 origin = fp.lidar_origin (pose);
        const double inc = kTwoPi / static_cast<double> (n_scans);
        std::vector<double> ranges (n_scans);
        for (std::size_t i = 0; i < n_scans; ++i)
        {
            const double r = cast_ray (world, origin, pose.theta + inc * static_cast<double> (i), max_range);
            ranges[i] = std::clamp (r, 0.0, max_range);
        }
        return ranges;
    }

    namespace detail
    {
        inline int orientation_sign (Vec2 a, Vec2 b, Vec2 c)
        {
            const double v = cross (b - a, c - a);
            const double tol = 1e-12 * std::max ({1.0, (b - a).norm (), (c - a).norm ()});
            if (v > tol)
                return 1;
            if (v < -tol)
                return -1;
            return 0;
        }

        inline bool on_segment (Vec2 a, Vec2 b, Vec2 p)
        {
            constexpr double eps = 1e-12;
            return std::min (a.x, b.x) - eps <= p.x && p.x <= std::max (a.x, b.x) + eps &&
                   std::min (a.y, b.y) - eps <= p.y && p.y <= std::max (a.y, b.y) + eps;
        }
    }  // namespace detail

    /// Closed-segment intersection (shared points count).
    inline bool segments_intersect (const Segment &s, const Segment &t)
    {
        using detail::on_segment;
        using detail::orientation_sign;
        const int o1 = orientation_sign (s.a, s.b, t.a);
        const int o2 = orientation_sign (s.a, s.b, t.b);
        const int o3 = orientation_sign (t.a, t.b, s.a);
        const int o4 = orientation_sign (t.a, t.b, s.b);
        if (o1 != o2 && o3 != o4)
            return true;
        if (o1 == 0 && on_segment (s.a, s.b, t.a))
            return true;
        if (o2 == 0 && on_segment (s.a, s.b, t.b))
            return true;
        if (o3 == 0 && on_segment (t.a, t.b, s.a))
            return true;
        if (o4 == 0 && on_segment (t.a, t.b, s.b))
            return true;
        return false;
    }

    /// Point inside or on the boundary of a counter-clockwise convex polygon.
    inline bool point_in_convex_polygon (std::span<const Vec2> poly, Vec2 p)
    {
        for (std::size_t i = 0; i < poly.size (); ++i)
            if (detail::orientation_sign (poly[i], poly[(i + 1) % poly.size ()], p) < 0)
                return false;
        return true;
    }

    /// Ground-truth overlap of the inflated footprint with any wall. Touching counts.
    inline bool oracle_collides (const TrackWorld &world, const Pose2D &pose, const Footprint &fp)
    {
        const auto poly = footprint_polygon (pose, fp);
        for (const auto &wall : world.walls)
        {
            if (point_in_convex_polygon (poly, wall.a) || point_in_convex_polygon (poly, wall.b))
                return true;
            for (std::size_t i = 0; i < poly.size (); ++i)
                if (segments_intersect (wall, {poly[i], poly[(i + 1) % poly.size ()]}))
                    return true;
        }
        return false;
    }

}  // namespace narrownav
