#pragma once
/**
 * @file    behavior_cloning.hpp
 * @brief   Supervised imitation of recorded (state, action) pairs.
 */

#include <narrownav/agent.hpp>
#include <narrownav/ddpg.hpp>
#include <narrownav/demo_io.hpp>
#include <narrownav/nn.hpp>

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

namespace narrownav
{
    struct CloneReport
    {
        double final_loss{0.0};
        std::vector<double> epoch_losses;  ///< full-dataset MSE after each epoch
    };

    struct CloneOptions
    {
        int epochs{50};
        double lr{1e-3};
        std::size_t batch_size{64};
        std::uint64_t seed{0};
    };

    /// Deterministic policy net trained on demonstrations.
    template <typename Scalar = float>
    class ClonedPolicy : public Agent
    {
      public:
        using Net = Mlp<Scalar>;

        ClonedPolicy (std::size_t state_dim, int hidden, std::uint64_t seed) : state_dim_ (state_dim)
        {
            std::mt19937_64 rng (seed);
            const int dim = static_cast<int> (state_dim);
            net_ = Net ({dim, hidden, hidden, 2}, OutputActivation::tanh, static_cast<Scalar> (kActionLimit), rng);
        }

        std::string algorithm () const override { return "bc"; }
        std::size_t state_dimension () const override { return state_dim_; }

        Decision act (std::span<const double> state, bool) override
        {
            if (state.size () != state_dim_)
                throw ConfigError ("state dimension mismatch");
            MatrixX<Scalar> x (static_cast<Eigen::Index> (state_dim_), 1);
            for (std::size_t i = 0; i < state_dim_; ++i)
                x (static_cast<Eigen::Index> (i), 0) = static_cast<Scalar> (state[i]);
            const MatrixX<Scalar> a = net_.forward (x);
            return {Action{static_cast<double> (a (0, 0)), static_cast<double> (a (1, 0))}.clamped (), -1};
        }

        nlohmann::json checkpoint () const override
        {
            return {{"algorithm", "bc"}, {"state_dim", state_dim_}, {"policy", net_.to_json ()}};
        }

        void restore (const nlohmann::json &j) override
        {
            net_ = Net::from_json (j.at ("policy"));
            if (static_cast<std::size_t> (net_.input_size ()) != state_dim_)
                throw ConfigError ("checkpoint state dimension does not match the policy");
        }

        static std::unique_ptr<ClonedPolicy> from_checkpoint (const nlohmann::json &j)
        {
            const auto policy = Net::from_json (j.at ("policy"));
            auto agent = std::make_unique<ClonedPolicy> (j.at ("state_dim").get<std::size_t> (), policy.sizes ()[1], 0);
            agent->net_ = policy;
            return agent;
        }

        std::unique_ptr<Agent> clone () const override { return std::make_unique<ClonedPolicy> (*this); }

        Net &net () { return net_; }
        const Net &net () const { return net_; }

      private:
        std::size_t state_dim_;
        Net net_;
    };

    namespace detail
    {
        template <typename Scalar>
        void demo_matrices (const std::vector<DemoSample> &demos, std::span<const std::size_t> rows, MatrixX<Scalar> &x,
                            MatrixX<Scalar> &y)
        {
            const auto dim = static_cast<Eigen::Index> (demos.front ().state.size ());
            x.resize (dim, static_cast<Eigen::Index> (rows.size ()));
            y.resize (2, static_cast<Eigen::Index> (rows.size ()));
            for (std::size_t c = 0; c < rows.size (); ++c)
            {
                const auto &d = demos[rows[c]];
                if (static_cast<Eigen::Index> (d.state.size ()) != dim)
                    throw ConfigError ("demonstration states have inconsistent dimensions");
                for (Eigen::Index r = 0; r < dim; ++r)
                    x (r, static_cast<Eigen::Index> (c)) = static_cast<Scalar> (d.state[static_cast<std::size_t> (r)]);
                y (0, static_cast<Eigen::Index> (c)) = static_cast<Scalar> (d.action.v);
                y (1, static_cast<Eigen::Index> (c)) = static_cast<Scalar> (d.action.w);
            }
        }
    }  // namespace detail

    /// Mean squared action error over all demos (averaged over both action components).
    template <typename Scalar>
    double clone_loss (const std::vector<DemoSample> &demos, const Mlp<Scalar> &net)
    {
        std::vector<std::size_t> all (demos.size ());
        std::iota (all.begin (), all.end (), 0);
        MatrixX<Scalar> x, y;
        detail::demo_matrices<Scalar> (demos, all, x, y);
        return static_cast<double> ((net.forward (x) - y).array ().square ().sum ()) / static_cast<double> (y.size ());
    }

    template <typename Scalar>
    CloneReport behavior_clone (const std::vector<DemoSample> &demos, ClonedPolicy<Scalar> &policy,
                                const CloneOptions &opts)
    {
        if (demos.empty ())
            throw ConfigError ("behavior cloning needs at least one demonstration");
        if (demos.front ().state.size () != policy.state_dimension ())
            throw ConfigError ("demonstration state dimension does not match the policy");

        auto &net = policy.net ();
        Adam<Scalar> opt (net, opts.lr);
        std::mt19937_64 rng (opts.seed);
        std::vector<std::size_t> order (demos.size ());
        std::iota (order.begin (), order.end (), 0);
        const std::size_t batch = std::max<std::size_t> (1, std::min (opts.batch_size, demos.size ()));

        CloneReport report;
        MatrixX<Scalar> x, y;
        typename Mlp<Scalar>::Cache cache;
        typename Mlp<Scalar>::Gradients grads;
        for (int epoch = 0; epoch < opts.epochs; ++epoch)
        {
            std::shuffle (order.begin (), order.end (), rng);
            for (std::size_t start = 0; start < order.size (); start += batch)
            {
                const std::size_t n = std::min (batch, order.size () - start);
                detail::demo_matrices<Scalar> (demos, std::span<const std::size_t> (order.data () + start, n), x, y);
                const MatrixX<Scalar> pred = net.forward (x, cache);
                const MatrixX<Scalar> grad = (Scalar (2) / static_cast<Scalar> (y.size ())) * (pred - y);
                net.backward (cache, grad, grads);
                opt.step (net, grads);
            }
            report.epoch_losses.push_back (clone_loss (demos, net));
        }
        report.final_loss = report.epoch_losses.empty () ? clone_loss (demos, net) : report.epoch_losses.back ();
        return report;
    }

}  // namespace narrownav
