#pragma once
/**
 * @file    env.hpp
 * @brief   Episodic narrow-space exploration environment (reset/step at a
 *          fixed control interval) with the FOMT family of rewards.
 */

#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>
#include <narrownav/reward.hpp>
#include <narrownav/safety_region.hpp>
#include <narrownav/vehicle.hpp>

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace narrownav
{
    enum class DoneReason
    {
        running,
        collision,
        open_space,
        timeout
    };

    inline std::string to_string (DoneReason r)
    {
        switch (r)
        {
        case DoneReason::running: return "running";
        case DoneReason::collision: return "collision";
        case DoneReason::open_space: return "open_space";
        case DoneReason::timeout: return "timeout";
        }
        return "?";
    }

    /// Which detector ends an episode with a collision.
    enum class CollisionCheck
    {
        safety_region,  ///< lidar-based table test only
        either          ///< table test or exact footprint overlap
    };

    struct EnvConfig
    {
        std::shared_ptr<const TrackWorld> world;
        Footprint footprint;
        std::size_t n_scans{32};
        double max_range{6.0};
        double resolution{0.095};
        double dt{0.2};
        int max_steps{1000};
        double open_space_threshold{8.0};
        double wheelbase{0.6};
        int substeps{10};
        RewardParams reward;
        /// Waypoints for the guided reward; empty means "use the world's".
        std::vector<Pose2D> waypoints;
        bool spawn_jitter{true};
        double jitter_position{0.05};
        double jitter_heading{0.05};
        CollisionCheck collision_check{CollisionCheck::either};
        std::uint64_t seed{0};

        const std::vector<Pose2D> &active_waypoints () const
        {
            return waypoints.empty () && world ? world->waypoints : waypoints;
        }

        void validate () const
        {
            if (!world)
                throw ConfigError ("environment has no world");
            world->validate ();
            footprint.validate ();
            reward.validate ();
            if (n_scans < 8)
                throw ConfigError ("n_scans must be at least 8");
            if (!(max_range > 0.0) || !(dt > 0.0) || !(wheelbase > 0.0) || substeps < 1 || max_steps < 1)
                throw ConfigError ("max_range, dt, wheelbase, substeps and max_steps must be positive");
            if (!(resolution > 0.0))
                throw ConfigError ("resolution must be positive");
            if (reward.mode == RewardMode::wg && active_waypoints ().empty ())
                throw ConfigError ("waypoint-guided reward needs waypoints but track '" + world->name + "' has none");
        }
    };

    struct StepOutcome
    {
        Observation observation;
        double reward{0.0};
        bool done{false};
        DoneReason done_reason{DoneReason::running};
        RewardBreakdown info;
    };

    class NarrowSpaceEnv
    {
      public:
        explicit NarrowSpaceEnv (EnvConfig config) : config_ (std::move (config))
        {
            config_.validate ();
            table_ = build_table (config_.footprint, config_.n_scans, config_.resolution);
            forward_slot_ = table_.forward_slot ();
            left_slot_ = table_.left_slot ();
            right_slot_ = table_.right_slot ();
            left_raw_ = nearest_scan_index (kPi / 2.0, config_.n_scans);
            right_raw_ = nearest_scan_index (-kPi / 2.0, config_.n_scans);
            rng_.seed (config_.seed);
        }

        Observation reset (std::uint64_t seed)
        {
            rng_.seed (seed);
            return reset ();
        }

        Observation reset ()
        {
            Pose2D spawn = config_.world->spawn;
            if (config_.spawn_jitter)
            {
                std::uniform_real_distribution<double> unit (-1.0, 1.0);
                const double dx = unit (rng_) * config_.jitter_position;
                const double dy = unit (rng_) * config_.jitter_position;
                const double dth = unit (rng_) * config_.jitter_heading;
                spawn = Pose2D{spawn.x + dx, spawn.y + dy, spawn.theta + dth};
            }
            state_ = AckermannState{spawn, Action{}};
            raw_scans_ = scan (*config_.world, state_.pose, config_.footprint, config_.n_scans, config_.max_range);
            if (in_collision ())
                throw ConfigError ("spawn pose of track '" + config_.world->name + "' is in collision");
            waypoints_ = WaypointTracker (config_.active_waypoints (), config_.reward.capture_radius);
            waypoints_.reset (state_.pose);
            steps_ = 0;
            done_ = false;
            started_ = true;
            return make_observation ();
        }

        StepOutcome step (const Action &action)
        {
            if (!started_)
                throw LifecycleError ("step() before reset()");
            if (done_)
                throw LifecycleError ("step() after the episode finished; call reset()");

            const Pose2D before = state_.pose;
            state_ = step_kinematics (state_, action, config_.dt, config_.wheelbase, config_.substeps);
            raw_scans_ = scan (*config_.world, state_.pose, config_.footprint, config_.n_scans, config_.max_range);
            ++steps_;

            StepOutcome out;
            out.observation = make_observation ();
            const RewardParams &p = config_.reward;
            const bool guided = p.mode == RewardMode::wg;
            double progress = 0.0;
            if (guided)
                progress = waypoints_.step (before, state_.pose, p.c5);

            if (in_collision ())
            {
                out.done_reason = DoneReason::collision;
                out.reward = p.collision_reward;
            }
            else if (reached_open_space () || (guided && waypoints_.finished ()))
            {
                out.done_reason = DoneReason::open_space;
                out.reward = guided ? p.goal_reward : p.open_space_reward;
            }
            else
            {
                if (guided)
                    out.info.waypoint = progress;
                else
                    out.info = running_reward (out.observation.v_obs, table_.ranges, forward_slot_, left_slot_,
                                               right_slot_, state_.last_action.v, p);
                out.reward = out.info.total ();
                if (steps_ >= config_.max_steps)
                    out.done_reason = DoneReason::timeout;
            }
            out.done = out.done_reason != DoneReason::running;
            done_ = out.done;
            return out;
        }

        const EnvConfig &config () const { return config_; }
        const SafetyRegionTable &table () const { return table_; }
        const AckermannState &state () const { return state_; }
        const std::vector<double> &raw_scans () const { return raw_scans_; }
        int steps () const { return steps_; }
        bool done () const { return done_; }
        std::size_t observation_dimension () const
        {
            return table_.size () + (config_.reward.mode == RewardMode::wg ? 2 : 0);
        }
        std::size_t forward_slot () const { return forward_slot_; }
        std::size_t left_slot () const { return left_slot_; }
        std::size_t right_slot () const { return right_slot_; }

      private:
        bool in_collision () const
        {
            if (detect_collision (table_, raw_scans_))
                return true;
            return config_.collision_check == CollisionCheck::either &&
                   oracle_collides (*config_.world, state_.pose, config_.footprint);
        }

        bool reached_open_space () const
        {
            return raw_scans_[left_raw_] + raw_scans_[right_raw_] > config_.open_space_threshold;
        }

        Observation make_observation () const
        {
            Observation obs = observe (table_, raw_scans_);
            if (config_.reward.mode == RewardMode::wg)
                obs.extras = {waypoints_.distance (state_.pose), waypoints_.yaw_difference (state_.pose)};
            return obs;
        }

        EnvConfig config_;
        SafetyRegionTable table_;
        std::size_t forward_slot_{0}, left_slot_{0}, right_slot_{0};
        std::size_t left_raw_{0}, right_raw_{0};
        std::mt19937_64 rng_;
        AckermannState state_;
        std::vector<double> raw_scans_;
        WaypointTracker waypoints_;
        int steps_{0};
        bool done_{false};
        bool started_{false};
    };

    /// One line of the episode trace log.
    inline nlohmann::json trace_record (int step, const Pose2D &pose, const Action &action, const StepOutcome &out)
    {
        return {{"step", step},
                {"pose", {pose.x, pose.y, pose.theta}},
                {"action", {action.v, action.w}},
                {"reward", out.reward},
                {"reward_components",
                 {{"f", out.info.forward}, {"o", out.info.obstacle}, {"m", out.info.middle}, {"t", out.info.time},
                  {"wp", out.info.waypoint}}},
                {"done_reason", to_string (out.done_reason)}};
    }

    /// Line-delimited JSON trace sink.
    class TraceWriter
    {
      public:
        explicit TraceWriter (std::ostream &out) : out_ (&out) {}

        void write (const NarrowSpaceEnv &env, const StepOutcome &out)
        {
            *out_ << trace_record (env.steps (), env.state ().pose, env.state ().last_action, out).dump () << '\n';
        }

      private:
        std::ostream *out_;
    };

}  // namespace narrownav
