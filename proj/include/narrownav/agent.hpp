#pragma once
/**
 * @file    agent.hpp
 * @brief   Policy/learner interface, state encoding, discrete action set
 *          and the uniform replay buffer.
 */

#include <narrownav/errors.hpp>
#include <narrownav/geometry.hpp>
#include <narrownav/safety_region.hpp>
#include <narrownav/vehicle.hpp>

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace narrownav
{
    /// Learner input: ranges scaled by 1/max_range, waypoint distance by
    /// 1/max_range, yaw difference by 1/pi, previous action by 1/0.6.
    struct StateEncoder
    {
        double max_range{6.0};

        std::vector<double> encode (const Observation &obs, const Action &last_action) const
        {
            std::vector<double> s;
            s.reserve (obs.dimension () + 2);
            for (double r : obs.v_obs)
                s.push_back (r / max_range);
            if (obs.extras.size () == 2)
            {
                s.push_back (obs.extras[0] / max_range);
                s.push_back (obs.extras[1] / kPi);
            }
            else
            {
                for (double e : obs.extras)
                    s.push_back (e);
            }
            s.push_back (last_action.v / kActionLimit);
            s.push_back (last_action.w / kActionLimit);
            return s;
        }

        static std::size_t state_dimension (std::size_t observation_dimension) { return observation_dimension + 2; }
    };

    /// Discrete action ids 0..5 <-> {-0.6, 0.6} x {-0.6, 0, 0.6}.
    inline constexpr int kDiscreteActions = 6;

    inline Action decode_discrete_action (int id)
    {
        if (id < 0 || id >= kDiscreteActions)
            throw ConfigError ("discrete action id out of range");
        static constexpr std::array<double, 2> speeds{-kActionLimit, kActionLimit};
        static constexpr std::array<double, 3> steers{-kActionLimit, 0.0, kActionLimit};
        return {speeds[static_cast<std::size_t> (id / 3)], steers[static_cast<std::size_t> (id % 3)]};
    }

    inline int encode_discrete_action (const Action &a)
    {
        const int vi = a.v > 0.0 ? 1 : 0;
        const int wi = a.w < 0.0 ? 0 : (a.w > 0.0 ? 2 : 1);
        return vi * 3 + wi;
    }

    struct Transition
    {
        std::vector<double> state;
        Action action;
        int action_id{-1};  ///< discrete id, -1 for continuous actions
        double reward{0.0};
        std::vector<double> next_state;
        bool done{false};
    };

    struct Decision
    {
        Action action;
        int action_id{-1};
    };

    /// A policy that may also learn from its own experience. Continuous,
    /// discrete, on- and off-policy learners all fit behind record().
    class Agent
    {
      public:
        virtual ~Agent () = default;

        virtual std::string algorithm () const = 0;
        virtual std::size_t state_dimension () const = 0;
        virtual Decision act (std::span<const double> state, bool explore) = 0;
        /// Feeds one environment transition; learners update here.
        virtual void record (const Transition &) {}
        virtual void end_episode () {}
        virtual nlohmann::json checkpoint () const = 0;
        /// Reloads network parameters from checkpoint(); experience and exploration state are kept.
        virtual void restore (const nlohmann::json &checkpoint) = 0;
        virtual std::unique_ptr<Agent> clone () const = 0;
    };

    template <typename Scalar>
    struct Batch
    {
        using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        Matrix states;       // dim x B
        Matrix actions;      // 2 x B
        std::vector<int> action_ids;
        Matrix rewards;      // 1 x B
        Matrix next_states;  // dim x B
        Matrix dones;        // 1 x B, 1 when terminal

        Eigen::Index size () const { return states.cols (); }
    };

    namespace detail
    {
        template <typename Scalar>
        void fill_batch_column (Batch<Scalar> &b, Eigen::Index c, const Transition &t)
        {
            const Eigen::Index dim = b.states.rows ();
            if (static_cast<Eigen::Index> (t.state.size ()) != dim || static_cast<Eigen::Index> (t.next_state.size ()) != dim)
                throw ConfigError ("transition state dimensions differ");
            for (Eigen::Index r = 0; r < dim; ++r)
            {
                b.states (r, c) = static_cast<Scalar> (t.state[static_cast<std::size_t> (r)]);
                b.next_states (r, c) = static_cast<Scalar> (t.next_state[static_cast<std::size_t> (r)]);
            }
            b.actions (0, c) = static_cast<Scalar> (t.action.v);
            b.actions (1, c) = static_cast<Scalar> (t.action.w);
            b.rewards (0, c) = static_cast<Scalar> (t.reward);
            b.dones (0, c) = t.done ? Scalar (1) : Scalar (0);
            b.action_ids[static_cast<std::size_t> (c)] = t.action_id;
        }

        template <typename Scalar>
        Batch<Scalar> allocate_batch (Eigen::Index dim, Eigen::Index n)
        {
            Batch<Scalar> b;
            b.states.resize (dim, n);
            b.next_states.resize (dim, n);
            b.actions.resize (2, n);
            b.rewards.resize (1, n);
            b.dones.resize (1, n);
            b.action_ids.resize (static_cast<std::size_t> (n));
            return b;
        }
    }  // namespace detail

    template <typename Scalar>
    Batch<Scalar> make_batch (std::span<const Transition> transitions)
    {
        if (transitions.empty ())
            throw ConfigError ("batch must not be empty");
        auto b = detail::allocate_batch<Scalar> (static_cast<Eigen::Index> (transitions.front ().state.size ()),
                                                 static_cast<Eigen::Index> (transitions.size ()));
        for (std::size_t c = 0; c < transitions.size (); ++c)
            detail::fill_batch_column (b, static_cast<Eigen::Index> (c), transitions[c]);
        return b;
    }

    /// Fixed-capacity ring of transitions with seeded uniform sampling.
    class ReplayBuffer
    {
      public:
        explicit ReplayBuffer (std::size_t capacity = 200'000, std::uint64_t seed = 0) : capacity_ (capacity), rng_ (seed)
        {
            if (capacity == 0)
                throw ConfigError ("replay capacity must be positive");
        }

        std::size_t capacity () const { return capacity_; }
        std::size_t size () const { return storage_.size (); }
        bool empty () const { return storage_.empty (); }

        void push (Transition t)
        {
            if (storage_.size () < capacity_)
                storage_.push_back (std::move (t));
            else
                storage_[head_] = std::move (t);
            head_ = (head_ + 1) % capacity_;
        }

        /// i-th stored transition, oldest first.
        const Transition &at (std::size_t i) const
        {
            if (i >= storage_.size ())
                throw std::out_of_range ("replay index");
            const std::size_t start = storage_.size () < capacity_ ? 0 : head_;
            return storage_[(start + i) % storage_.size ()];
        }

        template <typename Scalar>
        Batch<Scalar> sample (std::size_t batch_size)
        {
            if (storage_.empty ())
                throw ConfigError ("cannot sample an empty replay buffer");
            std::uniform_int_distribution<std::size_t> pick (0, storage_.size () - 1);
            auto b = detail::allocate_batch<Scalar> (static_cast<Eigen::Index> (storage_.front ().state.size ()),
                                                     static_cast<Eigen::Index> (batch_size));
            for (std::size_t c = 0; c < batch_size; ++c)
                detail::fill_batch_column (b, static_cast<Eigen::Index> (c), storage_[pick (rng_)]);
            return b;
        }

      private:
        std::size_t capacity_;
        std::vector<Transition> storage_;
        std::size_t head_{0};
        std::mt19937_64 rng_;
    };

}  // namespace narrownav
