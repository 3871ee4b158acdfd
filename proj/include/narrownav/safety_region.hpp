#pragma once
/**
 * @file    safety_region.hpp
 * @brief   Rectangular safety-region scan selection and collision test,
 *          plus the fixed-interval baselines (FIFR, FIRect).
 *
 * The safety region is the footprint rectangle inflated by the safety
 * margin, expressed in the lidar frame (x forward, y left). Boundary samples
 * are spread along each side at a spacing no larger than the resolution,
 * the eight axis/corner directions are added, and each sample is snapped to
 * the nearest raw scan. The safe range of a selected scan is the distance
 * from the lidar to the rectangle boundary along that raw scan's own angle.
 */

#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace narrownav
{
    enum class TableKind
    {
        safety_region,
        fifr,
        firect
    };

    inline std::string to_string (TableKind k)
    {
        switch (k)
        {
        case TableKind::safety_region: return "SR";
        case TableKind::fifr: return "FIFR";
        case TableKind::firect: return "FIRect";
        }
        return "?";
    }

    /// Safety region in the lidar frame: x in [back, front], y in [-half_width, half_width].
    struct SafetyRect
    {
        double front{0.0};
        double back{0.0};  // negative
        double half_width{0.0};

        static SafetyRect from_footprint (const Footprint &fp)
        {
            return {fp.half_length () - fp.lidar_offset, -fp.half_length () - fp.lidar_offset, fp.half_width ()};
        }

        /// Distance from the lidar (inside the rectangle) to its boundary along `angle`.
        double boundary_distance (double angle) const
        {
            const double c = std::cos (angle);
            const double s = std::sin (angle);
            double t = std::numeric_limits<double>::infinity ();
            if (c > 0.0)
                t = std::min (t, front / c);
            else if (c < 0.0)
                t = std::min (t, back / c);
            if (s > 0.0)
                t = std::min (t, half_width / s);
            else if (s < 0.0)
                t = std::min (t, -half_width / s);
            return t;
        }

        /// Corners counter-clockwise from front-left.
        std::array<Vec2, 4> corners () const
        {
            return {Vec2{front, half_width}, Vec2{back, half_width}, Vec2{back, -half_width}, Vec2{front, -half_width}};
        }
    };

    struct SafetyRegionTable
    {
        TableKind kind{TableKind::safety_region};
        std::size_t n_scans{0};           ///< raw lidar rays the table indexes into
        std::vector<std::size_t> indices; ///< V_index, ascending (= ascending angle from forward)
        std::vector<double> ranges;       ///< V_range, parallel to indices
        double resolution{0.0};
        /// Forward, front-left corner, left, back-left corner, back, back-right
        /// corner, right, front-right corner; each in [0, 2*pi).
        std::array<double, 8> phase_boundaries{};
        /// Boundary sample points (lidar frame) that produced the selection.
        std::vector<Vec2> samples;

        std::size_t size () const { return indices.size (); }
        double raw_increment () const { return kTwoPi / static_cast<double> (n_scans); }
        double angle_of (std::size_t slot) const { return raw_increment () * static_cast<double> (indices[slot]); }

        /// Table slot whose raw scan is angularly closest to `angle` (robot frame).
        std::size_t slot_nearest (double angle) const
        {
            std::size_t best = 0;
            double best_err = std::numeric_limits<double>::infinity ();
            for (std::size_t i = 0; i < indices.size (); ++i)
            {
                const double err = std::abs (normalize_angle (angle_of (i) - angle));
                if (err < best_err - 1e-12)
                {
                    best_err = err;
                    best = i;
                }
            }
            return best;
        }

        std::size_t forward_slot () const { return slot_nearest (0.0); }
        std::size_t left_slot () const { return slot_nearest (kPi / 2.0); }
        std::size_t right_slot () const { return slot_nearest (-kPi / 2.0); }
    };

    /// Nearest raw index for an angle; exact half-way ties go to the lower index.
    inline std::size_t nearest_scan_index (double angle, std::size_t n_scans)
    {
        const double k = wrap_positive (angle) / (kTwoPi / static_cast<double> (n_scans));
        auto idx = static_cast<std::size_t> (std::floor (k));
        if (k - std::floor (k) > 0.5)
            ++idx;
        return idx % n_scans;
    }

    namespace detail
    {
        inline std::array<double, 8> phase_angles (const SafetyRect &rect)
        {
            const auto c = rect.corners ();
            return {0.0,
                    wrap_positive (std::atan2 (c[0].y, c[0].x)),
                    kPi / 2.0,
                    wrap_positive (std::atan2 (c[1].y, c[1].x)),
                    kPi,
                    wrap_positive (std::atan2 (c[2].y, c[2].x)),
                    3.0 * kPi / 2.0,
                    wrap_positive (std::atan2 (c[3].y, c[3].x))};
        }

        inline void check_scan_count (std::size_t n_scans)
        {
            if (n_scans < 8)
                throw ConfigError ("n_scans must be at least 8");
        }
    }  // namespace detail

    /// Builds the adaptive safety-region table over a raw lidar of n_scans rays.
    inline SafetyRegionTable build_table (const Footprint &fp, std::size_t n_scans, double resolution)
    {
        fp.validate ();
        detail::check_scan_count (n_scans);
        if (!(resolution > 0.0))
            throw ConfigError ("resolution must be positive");

        const SafetyRect rect = SafetyRect::from_footprint (fp);
        const auto corners = rect.corners ();

        SafetyRegionTable table;
        table.kind = TableKind::safety_region;
        table.n_scans = n_scans;
        table.resolution = resolution;
        table.phase_boundaries = detail::phase_angles (rect);

        for (std::size_t side = 0; side < 4; ++side)
        {
            const Vec2 a = corners[side];
            const Vec2 b = corners[(side + 1) % 4];
            const double len = (b - a).norm ();
            const auto intervals = static_cast<std::size_t> (std::ceil (len / resolution - 1e-12));
            for (std::size_t j = 0; j < intervals; ++j)  // the closing corner starts the next side
                table.samples.push_back (a + (b - a) * (static_cast<double> (j) / static_cast<double> (intervals)));
        }

        std::vector<double> sample_angles;
        sample_angles.reserve (table.samples.size () + 8);
        for (const auto &p : table.samples)
            sample_angles.push_back (std::atan2 (p.y, p.x));
        for (double a : table.phase_boundaries)
            sample_angles.push_back (a);

        const double inc = kTwoPi / static_cast<double> (n_scans);
        std::map<std::size_t, double> selected;
        for (double a : sample_angles)
        {
            const std::size_t idx = nearest_scan_index (a, n_scans);
            const double safe = rect.boundary_distance (inc * static_cast<double> (idx));
            auto [it, inserted] = selected.emplace (idx, safe);
            if (!inserted)
                it->second = std::max (it->second, safe);
        }
        for (const auto &[idx, safe] : selected)
        {
            table.indices.push_back (idx);
            table.ranges.push_back (safe);
        }
        return table;
    }

    namespace detail
    {
        inline SafetyRegionTable fixed_interval_table (const Footprint &fp, std::size_t n_scans, std::size_t count,
                                                       TableKind kind)
        {
            fp.validate ();
            detail::check_scan_count (n_scans);
            if (count == 0 || count > n_scans)
                throw ConfigError ("fixed-interval count must be in [1, n_scans]");

            const SafetyRect rect = SafetyRect::from_footprint (fp);
            SafetyRegionTable table;
            table.kind = kind;
            table.n_scans = n_scans;
            table.phase_boundaries = phase_angles (rect);
            const double inc = kTwoPi / static_cast<double> (n_scans);
            for (std::size_t j = 0; j < count; ++j)
            {
                const std::size_t idx = j * n_scans / count;
                table.indices.push_back (idx);
                table.ranges.push_back (kind == TableKind::fifr ? fp.half_width ()
                                                                : rect.boundary_distance (inc * static_cast<double> (idx)));
            }
            return table;
        }
    }  // namespace detail

    /// Fixed interval, fixed range: one constant range covering only the body width.
    inline SafetyRegionTable build_baseline_fifr (const Footprint &fp, std::size_t n_scans, std::size_t count = 0)
    {
        return detail::fixed_interval_table (fp, n_scans, count == 0 ? n_scans : count, TableKind::fifr);
    }

    /// Fixed interval, rectangle-fitted ranges.
    inline SafetyRegionTable build_baseline_firect (const Footprint &fp, std::size_t n_scans, std::size_t count = 0)
    {
        return detail::fixed_interval_table (fp, n_scans, count == 0 ? n_scans : count, TableKind::firect);
    }

    struct Observation
    {
        std::vector<double> v_obs;
        std::vector<double> extras;

        std::size_t dimension () const { return v_obs.size () + extras.size (); }
    };

    inline Observation observe (const SafetyRegionTable &table, std::span<const double> raw_scans)
    {
        if (raw_scans.size () != table.n_scans)
            throw ConfigError ("raw scan count " + std::to_string (raw_scans.size ()) + " does not match table (" +
                               std::to_string (table.n_scans) + ")");
        Observation obs;
        obs.v_obs.reserve (table.size ());
        for (std::size_t idx : table.indices)
            obs.v_obs.push_back (raw_scans[idx]);
        return obs;
    }

    /// True iff any selected raw range is at or inside its safe range.
    inline bool detect_collision (const SafetyRegionTable &table, std::span<const double> raw_scans)
    {
        if (raw_scans.size () != table.n_scans)
            throw ConfigError ("raw scan count does not match table");
        for (std::size_t i = 0; i < table.size (); ++i)
            if (raw_scans[table.indices[i]] <= table.ranges[i])
                return true;
        return false;
    }

}  // namespace narrownav
