#pragma once

#include <narrownav/errors.hpp>

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>

namespace narrownav
{
    /// Hyperparameters shared by the value-based and actor-critic learners.
    struct LearnerConfig
    {
        int hidden{512};
        double gamma{0.99};
        double tau{0.005};
        std::size_t batch_size{128};
        std::size_t buffer_capacity{200'000};
        std::size_t warmup{1000};
        int updates_per_step{1};

        double lr_actor{1e-4};
        double lr_critic{2e-4};
        double lr_q{1e-4};

        double sigma_start{0.3};
        double sigma_decay{0.999};  // per episode
        double sigma_min{0.0};

        double epsilon_start{1.0};
        double epsilon_end{0.05};
        int epsilon_decay_episodes{500};

        std::uint64_t seed{0};

        void validate () const
        {
            if (hidden < 1 || batch_size < 1 || buffer_capacity < 1 || updates_per_step < 0)
                throw ConfigError ("hidden, batch_size and buffer_capacity must be positive");
            if (!(gamma >= 0.0 && gamma <= 1.0) || !(tau > 0.0 && tau <= 1.0))
                throw ConfigError ("gamma must be in [0,1] and tau in (0,1]");
            if (!(lr_actor > 0.0 && lr_critic > 0.0 && lr_q > 0.0))
                throw ConfigError ("learning rates must be positive");
            if (epsilon_decay_episodes < 1)
                throw ConfigError ("epsilon_decay_episodes must be positive");
        }
    };

    inline void to_json (nlohmann::json &j, const LearnerConfig &c)
    {
        j = {{"hidden", c.hidden},
             {"gamma", c.gamma},
             {"tau", c.tau},
             {"batch_size", c.batch_size},
             {"buffer_capacity", c.buffer_capacity},
             {"warmup", c.warmup},
             {"updates_per_step", c.updates_per_step},
             {"lr_actor", c.lr_actor},
             {"lr_critic", c.lr_critic},
             {"lr_q", c.lr_q},
             {"sigma_start", c.sigma_start},
             {"sigma_decay", c.sigma_decay},
             {"sigma_min", c.sigma_min},
             {"epsilon_start", c.epsilon_start},
             {"epsilon_end", c.epsilon_end},
             {"epsilon_decay_episodes", c.epsilon_decay_episodes},
             {"seed", c.seed}};
    }

    inline void from_json (const nlohmann::json &j, LearnerConfig &c)
    {
        const LearnerConfig d;
        c.hidden = j.value ("hidden", d.hidden);
        c.gamma = j.value ("gamma", d.gamma);
        c.tau = j.value ("tau", d.tau);
        c.batch_size = j.value ("batch_size", d.batch_size);
        c.buffer_capacity = j.value ("buffer_capacity", d.buffer_capacity);
        c.warmup = j.value ("warmup", d.warmup);
        c.updates_per_step = j.value ("updates_per_step", d.updates_per_step);
        c.lr_actor = j.value ("lr_actor", d.lr_actor);
        c.lr_critic = j.value ("lr_critic", d.lr_critic);
        c.lr_q = j.value ("lr_q", d.lr_q);
        c.sigma_start = j.value ("sigma_start", d.sigma_start);
        c.sigma_decay = j.value ("sigma_decay", d.sigma_decay);
        c.sigma_min = j.value ("sigma_min", d.sigma_min);
        c.epsilon_start = j.value ("epsilon_start", d.epsilon_start);
        c.epsilon_end = j.value ("epsilon_end", d.epsilon_end);
        c.epsilon_decay_episodes = j.value ("epsilon_decay_episodes", d.epsilon_decay_episodes);
        c.seed = j.value ("seed", d.seed);
    }

    /// Small-network settings for short (~150 episode) runs on a laptop:
    /// more updates per step and faster critics compensate for the budget.
    inline LearnerConfig desk_learner_config ()
    {
        LearnerConfig c;
        c.hidden = 64;
        c.warmup = 500;
        c.updates_per_step = 4;
        c.lr_critic = 1e-3;
        c.lr_q = 1e-3;
        c.epsilon_decay_episodes = 100;
        return c;
    }

    inline LearnerConfig learner_profile (const std::string &name)
    {
        if (name == "full")
            return {};
        if (name == "desk")
            return desk_learner_config ();
        throw ConfigError ("unknown learner profile '" + name + "' (expected full|desk)");
    }

}  // namespace narrownav
