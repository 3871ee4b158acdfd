#pragma once
/**
 * @file    dqn.hpp
 * @brief   Value-based learner over the six discrete (v, w) pairs.
 */

#include <narrownav/agent.hpp>
#include <narrownav/ddpg.hpp>
#include <narrownav/learner_config.hpp>
#include <narrownav/nn.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace narrownav
{
    /// y = r + gamma * max_a Q_target(s', a), or y = r on terminal transitions.
    template <typename Scalar>
    MatrixX<Scalar> dqn_targets (const Batch<Scalar> &batch, const Mlp<Scalar> &target_net, Scalar gamma)
    {
        const MatrixX<Scalar> next_q = target_net.forward (batch.next_states);
        const MatrixX<Scalar> best = next_q.colwise ().maxCoeff ();
        return (batch.rewards.array () + gamma * (Scalar (1) - batch.dones.array ()) * best.array ()).matrix ();
    }

    /// Mean squared TD error on the taken actions and its gradient w.r.t. the online net.
    template <typename Scalar>
    LossGradient<Scalar> dqn_loss (const Batch<Scalar> &batch, const Mlp<Scalar> &online, const MatrixX<Scalar> &targets)
    {
        typename Mlp<Scalar>::Cache cache;
        const MatrixX<Scalar> q = online.forward (batch.states, cache);
        const auto n = static_cast<Scalar> (batch.size ());
        MatrixX<Scalar> grad = MatrixX<Scalar>::Zero (q.rows (), q.cols ());
        LossGradient<Scalar> out;
        for (Eigen::Index c = 0; c < batch.size (); ++c)
        {
            const int id = batch.action_ids[static_cast<std::size_t> (c)];
            if (id < 0 || id >= q.rows ())
                throw ConfigError ("transition has no valid discrete action id");
            const Scalar err = q (id, c) - targets (0, c);
            out.loss += err * err / n;
            grad (id, c) = Scalar (2) * err / n;
        }
        online.backward (cache, grad, out.grads);
        return out;
    }

    template <typename Scalar = float>
    class DqnAgent : public Agent
    {
      public:
        using Net = Mlp<Scalar>;

        DqnAgent (std::size_t state_dim, LearnerConfig config)
            : config_ (config), state_dim_ (state_dim), rng_ (config.seed),
              buffer_ (config.buffer_capacity, config.seed ^ 0x9e3779b97f4a7c15ULL), epsilon_ (config.epsilon_start)
        {
            config_.validate ();
            const int h = config_.hidden;
            online_ = Net ({static_cast<int> (state_dim), h, h, kDiscreteActions}, OutputActivation::identity, Scalar (1),
                           rng_);
            target_ = online_;
            opt_ = Adam<Scalar> (online_, config_.lr_q);
        }

        std::string algorithm () const override { return "dqn"; }
        std::size_t state_dimension () const override { return state_dim_; }

        Decision act (std::span<const double> state, bool explore) override
        {
            if (state.size () != state_dim_)
                throw ConfigError ("state dimension mismatch");
            int id = 0;
            if (explore && epsilon_ > 0.0 && std::uniform_real_distribution<double> (0.0, 1.0) (rng_) < epsilon_)
            {
                id = std::uniform_int_distribution<int> (0, kDiscreteActions - 1) (rng_);
            }
            else
            {
                MatrixX<Scalar> x (static_cast<Eigen::Index> (state_dim_), 1);
                for (std::size_t i = 0; i < state_dim_; ++i)
                    x (static_cast<Eigen::Index> (i), 0) = static_cast<Scalar> (state[i]);
                const MatrixX<Scalar> q = online_.forward (x);
                Eigen::Index best = 0;
                q.col (0).maxCoeff (&best);
                id = static_cast<int> (best);
            }
            return {decode_discrete_action (id), id};
        }

        void record (const Transition &t) override
        {
            buffer_.push (t);
            if (buffer_.size () < std::max (config_.warmup, config_.batch_size))
                return;
            for (int i = 0; i < config_.updates_per_step; ++i)
                last_loss_ = update (buffer_.sample<Scalar> (config_.batch_size));
        }

        /// Linear epsilon decay per finished episode.
        void end_episode () override
        {
            ++episodes_;
            const double frac = std::min (1.0, static_cast<double> (episodes_) / config_.epsilon_decay_episodes);
            epsilon_ = config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
        }

        double update (const Batch<Scalar> &batch)
        {
            const MatrixX<Scalar> targets = dqn_targets (batch, target_, static_cast<Scalar> (config_.gamma));
            const auto lg = dqn_loss (batch, online_, targets);
            if (!std::isfinite (static_cast<double> (lg.loss)))
                throw TrainingFault ("non-finite DQN loss");
            opt_.step (online_, lg.grads);
            target_.soft_update_from (online_, static_cast<Scalar> (config_.tau));
            return static_cast<double> (lg.loss);
        }

        nlohmann::json checkpoint () const override
        {
            return {{"algorithm", "dqn"}, {"state_dim", state_dim_}, {"learner", config_}, {"q", online_.to_json ()}};
        }

        void restore (const nlohmann::json &j) override
        {
            online_ = Net::from_json (j.at ("q"));
            if (static_cast<std::size_t> (online_.input_size ()) != state_dim_)
                throw ConfigError ("checkpoint state dimension does not match the agent");
            target_ = online_;
            opt_ = Adam<Scalar> (online_, config_.lr_q);
        }

        static std::unique_ptr<DqnAgent> from_checkpoint (const nlohmann::json &j)
        {
            LearnerConfig cfg = j.at ("learner").get<LearnerConfig> ();
            cfg.buffer_capacity = 1;
            auto agent = std::make_unique<DqnAgent> (j.at ("state_dim").get<std::size_t> (), cfg);
            agent->restore (j);
            return agent;
        }

        std::unique_ptr<Agent> clone () const override { return std::make_unique<DqnAgent> (*this); }

        const Net &online () const { return online_; }
        double epsilon () const { return epsilon_; }
        void set_epsilon (double e) { epsilon_ = e; }
        double last_loss () const { return last_loss_; }

      private:
        LearnerConfig config_;
        std::size_t state_dim_;
        std::mt19937_64 rng_;
        Net online_, target_;
        Adam<Scalar> opt_;
        ReplayBuffer buffer_;
        double epsilon_;
        int episodes_{0};
        double last_loss_{0.0};
    };

}  // namespace narrownav
