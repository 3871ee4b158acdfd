#pragma once
/**
 * @file    reward.hpp
 * @brief   Waypoint-free FOMT reward terms (forward openness, obstacle gap,
 *          middle keeping, time), the FOT/FT ablations and the
 *          waypoint-guided contrastive reward.
 *
 * All terms read the safety-region observation vector in table order.
 * Neighbour slots wrap modulo the table length.
 */

#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace narrownav
{
    enum class RewardMode
    {
        fomt,
        fot,
        ft,
        wg
    };

    inline std::string to_string (RewardMode m)
    {
        switch (m)
        {
        case RewardMode::fomt: return "fomt";
        case RewardMode::fot: return "fot";
        case RewardMode::ft: return "ft";
        case RewardMode::wg: return "wg";
        }
        return "?";
    }

    inline RewardMode parse_reward_mode (const std::string &s)
    {
        if (s == "fomt")
            return RewardMode::fomt;
        if (s == "fot")
            return RewardMode::fot;
        if (s == "ft")
            return RewardMode::ft;
        if (s == "wg")
            return RewardMode::wg;
        throw ConfigError ("unknown reward mode '" + s + "' (expected fomt|fot|ft|wg)");
    }

    struct RewardParams
    {
        double collision_reward{-50.0};   // R_c
        double open_space_reward{50.0};   // R_r
        double c1{1.0}, c2{1.0}, c3{1.0}, c4{1.0};
        int n_f{5};
        int n_o{12};
        int n_m{5};
        double alpha1{0.9};  // obstacle-gap discount
        double alpha2{0.9};  // forward-neighbour discount
        double alpha3{0.9};  // middle-pair discount
        double alpha4{-1.0}; // time penalty
        double gap_floor{1e-3};
        RewardMode mode{RewardMode::fomt};
        double c5{100.0};
        double goal_reward{50.0};  // R_g
        double capture_radius{0.3};

        void validate () const
        {
            if (!(gap_floor > 0.0))
                throw ConfigError ("gap_floor must be positive");
            for (double a : {alpha1, alpha2, alpha3})
                if (!(a > 0.0 && a < 1.0))
                    throw ConfigError ("alpha1..alpha3 must lie in (0, 1)");
            if (n_f < 0 || n_o < 0 || n_m < 0)
                throw ConfigError ("neighbour counts must be non-negative");
        }

        /// Weights after masking the components the mode ablates.
        RewardParams effective () const
        {
            RewardParams p = *this;
            if (mode == RewardMode::ft)
                p.c2 = p.c3 = 0.0;
            else if (mode == RewardMode::fot)
                p.c3 = 0.0;
            return p;
        }
    };

    /// Weighted per-component contributions of one running step.
    struct RewardBreakdown
    {
        double forward{0.0};
        double obstacle{0.0};
        double middle{0.0};
        double time{0.0};
        double waypoint{0.0};

        double total () const { return forward + obstacle + middle + time + waypoint; }
    };

    namespace detail
    {
        inline std::size_t wrap_slot (std::ptrdiff_t i, std::size_t n)
        {
            const auto m = static_cast<std::ptrdiff_t> (n);
            return static_cast<std::size_t> (((i % m) + m) % m);
        }
    }  // namespace detail

    /// R_f = sum_{k=0..n_f} alpha2^k * v * (V[f+k] + V[f-k]); the k = 0 term counts V[f] twice.
    inline double reward_forward (std::span<const double> v_obs, std::size_t forward_slot, double v,
                                  const RewardParams &p)
    {
        if (v_obs.empty ())
            return 0.0;
        const auto f = static_cast<std::ptrdiff_t> (forward_slot);
        double sum = 0.0;
        double weight = 1.0;
        for (int k = 0; k <= p.n_f; ++k)
        {
            sum += weight * (v_obs[detail::wrap_slot (f + k, v_obs.size ())] + v_obs[detail::wrap_slot (f - k, v_obs.size ())]);
            weight *= p.alpha2;
        }
        return v * sum;
    }

    /// R_o = sum_{k=0..n_o} alpha1^k * ln(G[k]) over ascending gaps G = V_obs - V_range.
    inline double reward_obstacle (std::span<const double> v_obs, std::span<const double> safe_ranges,
                                   const RewardParams &p)
    {
        if (v_obs.size () != safe_ranges.size ())
            throw ConfigError ("observation and safe-range lengths differ");
        std::vector<double> gaps (v_obs.size ());
        for (std::size_t i = 0; i < gaps.size (); ++i)
            gaps[i] = v_obs[i] - safe_ranges[i];
        std::sort (gaps.begin (), gaps.end ());

        const std::size_t terms = std::min (gaps.size (), static_cast<std::size_t> (p.n_o) + 1);
        double sum = 0.0;
        double weight = 1.0;
        for (std::size_t k = 0; k < terms; ++k)
        {
            sum += weight * std::log (std::max (gaps[k], p.gap_floor));
            weight *= p.alpha1;
        }
        return sum;
    }

    /// R_m = -sum_{k=0..n_m} alpha3^k * |V[right-k] - V[left+k]|.
    inline double reward_middle (std::span<const double> v_obs, std::size_t right_slot, std::size_t left_slot,
                                 const RewardParams &p)
    {
        if (v_obs.empty ())
            return 0.0;
        const auto r = static_cast<std::ptrdiff_t> (right_slot);
        const auto l = static_cast<std::ptrdiff_t> (left_slot);
        double sum = 0.0;
        double weight = 1.0;
        for (int k = 0; k <= p.n_m; ++k)
        {
            sum += weight * std::abs (v_obs[detail::wrap_slot (r - k, v_obs.size ())] -
                                      v_obs[detail::wrap_slot (l + k, v_obs.size ())]);
            weight *= p.alpha3;
        }
        return -sum;
    }

    inline double reward_time (const RewardParams &p) { return p.alpha4; }

    /// Running-step FOMT/FOT/FT reward split into weighted components.
    inline RewardBreakdown running_reward (std::span<const double> v_obs, std::span<const double> safe_ranges,
                                           std::size_t forward_slot, std::size_t left_slot, std::size_t right_slot,
                                           double v, const RewardParams &params)
    {
        const RewardParams p = params.effective ();
        RewardBreakdown b;
        b.forward = p.c1 * reward_forward (v_obs, forward_slot, v, p);
        if (p.c2 != 0.0)
            b.obstacle = p.c2 * reward_obstacle (v_obs, safe_ranges, p);
        if (p.c3 != 0.0)
            b.middle = p.c3 * reward_middle (v_obs, right_slot, left_slot, p);
        b.time = p.c4 * reward_time (p);
        return b;
    }

    /// Tracks the active waypoint and pays c5 * (d_{t-1} - d_t) per running step.
    class WaypointTracker
    {
      public:
        WaypointTracker () = default;
        WaypointTracker (std::vector<Pose2D> waypoints, double capture_radius)
            : waypoints_ (std::move (waypoints)), capture_radius_ (capture_radius)
        {
        }

        void reset (const Pose2D &pose)
        {
            active_ = 0;
            advance_captured (pose);
        }

        bool empty () const { return waypoints_.empty (); }
        bool finished () const { return active_ >= waypoints_.size (); }
        std::size_t active_index () const { return active_; }

        /// Distance to the active waypoint, 0 once all are captured.
        double distance (const Pose2D &pose) const
        {
            if (finished ())
                return 0.0;
            return (waypoints_[active_].position () - pose.position ()).norm ();
        }

        /// Heading difference to the active waypoint's yaw.
        double yaw_difference (const Pose2D &pose) const
        {
            if (finished ())
                return 0.0;
            return normalize_angle (waypoints_[active_].theta - pose.theta);
        }

        /// Progress reward for moving from `before` to `after`; advances past captured waypoints.
        double step (const Pose2D &before, const Pose2D &after, double c5)
        {
            if (finished ())
                return 0.0;
            const double r = c5 * (distance (before) - distance (after));
            advance_captured (after);
            return r;
        }

      private:
        void advance_captured (const Pose2D &pose)
        {
            while (!finished () && distance (pose) <= capture_radius_)
                ++active_;
        }

        std::vector<Pose2D> waypoints_;
        double capture_radius_{0.3};
        std::size_t active_{0};
    };

    /// Waypoint-guided progress term for a single step toward a fixed waypoint.
    inline double reward_waypoint (const Pose2D &before, const Pose2D &after, const Pose2D &waypoint,
                                   const RewardParams &p)
    {
        return p.c5 * ((waypoint.position () - before.position ()).norm () - (waypoint.position () - after.position ()).norm ());
    }

}  // namespace narrownav
