#pragma once
/**
 * @file    ddpg.hpp
 * @brief   Deterministic actor-critic learner for the continuous (v, w) action.
 *
 * Critic input is [state; action]. The critic regresses onto
 * r + gamma * (1 - done) * Q'(s', pi'(s')); the actor follows
 * grad_a Q(s, a)|a=pi(s) * grad_theta pi(s). Targets track the online
 * networks with factor tau.
 */

#include <narrownav/agent.hpp>
#include <narrownav/learner_config.hpp>
#include <narrownav/nn.hpp>

#include <cmath>
#include <memory>
#include <random>
#include <string>

namespace narrownav
{
    template <typename Scalar>
    using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    template <typename Scalar>
    struct LossGradient
    {
        Scalar loss{0};
        typename Mlp<Scalar>::Gradients grads;
    };

    template <typename Scalar>
    MatrixX<Scalar> stack_state_action (const MatrixX<Scalar> &states, const MatrixX<Scalar> &actions)
    {
        MatrixX<Scalar> x (states.rows () + actions.rows (), states.cols ());
        x.topRows (states.rows ()) = states;
        x.bottomRows (actions.rows ()) = actions;
        return x;
    }

    /// Bellman targets from the target networks; terminal rows keep the reward only.
    template <typename Scalar>
    MatrixX<Scalar> ddpg_critic_targets (const Batch<Scalar> &batch, const Mlp<Scalar> &target_actor,
                                         const Mlp<Scalar> &target_critic, Scalar gamma)
    {
        const MatrixX<Scalar> next_actions = target_actor.forward (batch.next_states);
        const MatrixX<Scalar> next_q = target_critic.forward (stack_state_action<Scalar> (batch.next_states, next_actions));
        return (batch.rewards.array () + gamma * (Scalar (1) - batch.dones.array ()) * next_q.array ()).matrix ();
    }

    /// Mean squared Bellman error and its gradient w.r.t. the critic.
    template <typename Scalar>
    LossGradient<Scalar> ddpg_critic_loss (const Batch<Scalar> &batch, const Mlp<Scalar> &critic,
                                           const MatrixX<Scalar> &targets)
    {
        typename Mlp<Scalar>::Cache cache;
        const MatrixX<Scalar> q = critic.forward (stack_state_action<Scalar> (batch.states, batch.actions), cache);
        const MatrixX<Scalar> err = q - targets;
        const auto n = static_cast<Scalar> (batch.size ());
        LossGradient<Scalar> out;
        out.loss = err.array ().square ().sum () / n;
        const MatrixX<Scalar> grad_q = (Scalar (2) / n) * err;
        critic.backward (cache, grad_q, out.grads);
        return out;
    }

    /// Actor loss -mean Q(s, pi(s)) and its gradient w.r.t. the actor.
    template <typename Scalar>
    LossGradient<Scalar> ddpg_actor_loss (const Batch<Scalar> &batch, const Mlp<Scalar> &actor, const Mlp<Scalar> &critic)
    {
        typename Mlp<Scalar>::Cache actor_cache, critic_cache;
        const MatrixX<Scalar> actions = actor.forward (batch.states, actor_cache);
        const MatrixX<Scalar> q = critic.forward (stack_state_action<Scalar> (batch.states, actions), critic_cache);
        const auto n = static_cast<Scalar> (batch.size ());

        LossGradient<Scalar> out;
        out.loss = -q.sum () / n;
        typename Mlp<Scalar>::Gradients critic_grads;
        const MatrixX<Scalar> grad_q = MatrixX<Scalar>::Constant (1, batch.size (), Scalar (-1) / n);
        const MatrixX<Scalar> grad_input = critic.backward (critic_cache, grad_q, critic_grads);
        const MatrixX<Scalar> grad_actions = grad_input.bottomRows (actions.rows ());
        actor.backward (actor_cache, grad_actions, out.grads);
        return out;
    }

    struct DdpgLosses
    {
        double actor_loss{0.0};
        double critic_loss{0.0};
    };

    template <typename Scalar = float>
    class DdpgAgent : public Agent
    {
      public:
        using Net = Mlp<Scalar>;

        DdpgAgent (std::size_t state_dim, LearnerConfig config)
            : config_ (config), state_dim_ (state_dim), rng_ (config.seed),
              buffer_ (config.buffer_capacity, config.seed ^ 0x9e3779b97f4a7c15ULL), sigma_ (config.sigma_start)
        {
            config_.validate ();
            const int h = config_.hidden;
            const int dim = static_cast<int> (state_dim);
            actor_ = Net ({dim, h, h, 2}, OutputActivation::tanh, static_cast<Scalar> (kActionLimit), rng_, 3e-3);
            critic_ = Net ({dim + 2, h, h, 1}, OutputActivation::identity, Scalar (1), rng_, 3e-3);
            target_actor_ = actor_;
            target_critic_ = critic_;
            actor_opt_ = Adam<Scalar> (actor_, config_.lr_actor);
            critic_opt_ = Adam<Scalar> (critic_, config_.lr_critic);
        }

        std::string algorithm () const override { return "ddpg"; }
        std::size_t state_dimension () const override { return state_dim_; }

        Decision act (std::span<const double> state, bool explore) override
        {
            if (state.size () != state_dim_)
                throw ConfigError ("state dimension mismatch");
            MatrixX<Scalar> x (static_cast<Eigen::Index> (state_dim_), 1);
            for (std::size_t i = 0; i < state_dim_; ++i)
                x (static_cast<Eigen::Index> (i), 0) = static_cast<Scalar> (state[i]);
            const MatrixX<Scalar> a = actor_.forward (x);
            Action action{static_cast<double> (a (0, 0)), static_cast<double> (a (1, 0))};
            if (explore && sigma_ > 0.0)
            {
                std::normal_distribution<double> noise (0.0, sigma_);
                action.v += noise (rng_);
                action.w += noise (rng_);
            }
            return {action.clamped (), -1};
        }

        void record (const Transition &t) override
        {
            buffer_.push (t);
            if (buffer_.size () < std::max (config_.warmup, config_.batch_size))
                return;
            for (int i = 0; i < config_.updates_per_step; ++i)
                last_losses_ = update (buffer_.sample<Scalar> (config_.batch_size));
        }

        void end_episode () override { sigma_ = std::max (config_.sigma_min, sigma_ * config_.sigma_decay); }

        /// One critic step, one actor step (against the updated critic), then soft target updates.
        DdpgLosses update (const Batch<Scalar> &batch)
        {
            const auto gamma = static_cast<Scalar> (config_.gamma);
            const MatrixX<Scalar> targets = ddpg_critic_targets (batch, target_actor_, target_critic_, gamma);
            const auto critic = ddpg_critic_loss (batch, critic_, targets);
            if (!std::isfinite (static_cast<double> (critic.loss)))
                throw TrainingFault ("non-finite critic loss");
            critic_opt_.step (critic_, critic.grads);

            const auto actor = ddpg_actor_loss (batch, actor_, critic_);
            if (!std::isfinite (static_cast<double> (actor.loss)))
                throw TrainingFault ("non-finite actor loss");
            actor_opt_.step (actor_, actor.grads);

            const auto tau = static_cast<Scalar> (config_.tau);
            target_actor_.soft_update_from (actor_, tau);
            target_critic_.soft_update_from (critic_, tau);
            return {static_cast<double> (actor.loss), static_cast<double> (critic.loss)};
        }

        nlohmann::json checkpoint () const override
        {
            return {{"algorithm", "ddpg"}, {"state_dim", state_dim_}, {"learner", config_},
                    {"actor", actor_.to_json ()}, {"critic", critic_.to_json ()}};
        }

        void restore (const nlohmann::json &j) override
        {
            actor_ = Net::from_json (j.at ("actor"));
            critic_ = Net::from_json (j.at ("critic"));
            if (static_cast<std::size_t> (actor_.input_size ()) != state_dim_)
                throw ConfigError ("checkpoint state dimension does not match the agent");
            target_actor_ = actor_;
            target_critic_ = critic_;
            actor_opt_ = Adam<Scalar> (actor_, config_.lr_actor);
            critic_opt_ = Adam<Scalar> (critic_, config_.lr_critic);
        }

        static std::unique_ptr<DdpgAgent> from_checkpoint (const nlohmann::json &j)
        {
            LearnerConfig cfg = j.at ("learner").get<LearnerConfig> ();
            cfg.buffer_capacity = 1;
            auto agent = std::make_unique<DdpgAgent> (j.at ("state_dim").get<std::size_t> (), cfg);
            agent->restore (j);
            return agent;
        }

        std::unique_ptr<Agent> clone () const override { return std::make_unique<DdpgAgent> (*this); }

        const Net &actor () const { return actor_; }
        const Net &critic () const { return critic_; }
        const Net &target_actor () const { return target_actor_; }
        const Net &target_critic () const { return target_critic_; }
        Net &actor () { return actor_; }
        Net &critic () { return critic_; }
        double sigma () const { return sigma_; }
        void set_sigma (double s) { sigma_ = s; }
        const ReplayBuffer &buffer () const { return buffer_; }
        DdpgLosses last_losses () const { return last_losses_; }

      private:
        LearnerConfig config_;
        std::size_t state_dim_;
        std::mt19937_64 rng_;
        Net actor_, critic_, target_actor_, target_critic_;
        Adam<Scalar> actor_opt_, critic_opt_;
        ReplayBuffer buffer_;
        double sigma_;
        DdpgLosses last_losses_;
    };

}  // namespace narrownav
