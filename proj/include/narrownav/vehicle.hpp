#pragma once
/**
 * @file    vehicle.hpp
 * @brief   Kinematic bicycle (Ackermann) model for the body-center pose.
 *
 *   x' = v cos(theta),  y' = v sin(theta),  theta' = (v / L) tan(w)
 *
 * w is the front steering angle. Each control interval is split into
 * substeps; a substep advances the position along the mid-substep heading,
 * which keeps the scheme exactly time-reversible under v -> -v.
 */

#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>

#include <algorithm>
#include <cmath>

namespace narrownav
{
    inline constexpr double kActionLimit = 0.6;

    struct Action
    {
        double v{0.0};  ///< linear speed, m/s
        double w{0.0};  ///< steering angle, rad

        Action clamped () const
        {
            return {std::clamp (v, -kActionLimit, kActionLimit), std::clamp (w, -kActionLimit, kActionLimit)};
        }

        bool operator== (const Action &) const = default;
    };

    struct AckermannState
    {
        Pose2D pose;
        Action last_action;
    };

    inline AckermannState step_kinematics (const AckermannState &state, const Action &action, double dt,
                                           double wheelbase, int substeps)
    {
        if (!(dt > 0.0) || !(wheelbase > 0.0) || substeps < 1)
            throw ConfigError ("step_kinematics needs dt > 0, wheelbase > 0, substeps >= 1");

        const Action a = action.clamped ();
        const double h = dt / substeps;
        const double yaw_rate = a.v / wheelbase * std::tan (a.w);

        double x = state.pose.x;
        double y = state.pose.y;
        double theta = state.pose.theta;
        for (int i = 0; i < substeps; ++i)
        {
            const double mid = theta + 0.5 * h * yaw_rate;
            x += h * a.v * std::cos (mid);
            y += h * a.v * std::sin (mid);
            theta += h * yaw_rate;
        }
        return {Pose2D{x, y, theta}, a};
    }

    inline double min_turning_radius (double wheelbase, double max_steer)
    {
        if (!(max_steer > 0.0 && max_steer < kPi / 2.0))
            throw ConfigError ("max steering angle must be in (0, pi/2)");
        return wheelbase / std::tan (max_steer);
    }

}  // namespace narrownav
