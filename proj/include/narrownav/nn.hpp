#pragma once
/**
 * @file    nn.hpp
 * @brief   Small fully connected networks with hand-written backprop and
 *          an Adam optimizer, templated on the scalar type.
 *
 * Batches are column-major: one sample per column. Hidden layers use ReLU;
 * the output layer is linear or a tanh scaled to +/- output_scale.
 */

#include <narrownav/errors.hpp>

#include <Eigen/Core>
#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace narrownav
{
    enum class OutputActivation
    {
        identity,
        tanh
    };

    template <typename Scalar>
    class Mlp
    {
      public:
        using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

        struct Layer
        {
            Matrix weight;  // out x in
            Vector bias;
        };
        using Gradients = std::vector<Layer>;

        /// Per-layer inputs kept for the backward pass, plus the output.
        struct Cache
        {
            std::vector<Matrix> inputs;
            Matrix output;
        };

        Mlp () = default;

        /// `sizes` lists every layer width including input and output.
        /// Weights start U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the last layer
        /// uses U(-final_init, final_init) when final_init > 0.
        Mlp (std::vector<int> sizes, OutputActivation activation, Scalar output_scale, std::mt19937_64 &rng,
             double final_init = 0.0)
            : sizes_ (std::move (sizes)), activation_ (activation), output_scale_ (output_scale)
        {
            if (sizes_.size () < 2)
                throw ConfigError ("network needs at least an input and an output layer");
            for (int s : sizes_)
                if (s <= 0)
                    throw ConfigError ("layer widths must be positive");
            for (std::size_t l = 0; l + 1 < sizes_.size (); ++l)
            {
                const int in = sizes_[l], out = sizes_[l + 1];
                const bool last = l + 2 == sizes_.size ();
                const double bound = (last && final_init > 0.0) ? final_init : 1.0 / std::sqrt (static_cast<double> (in));
                std::uniform_real_distribution<double> dist (-bound, bound);
                Layer layer{Matrix (out, in), Vector (out)};
                for (int c = 0; c < in; ++c)
                    for (int r = 0; r < out; ++r)
                        layer.weight (r, c) = static_cast<Scalar> (dist (rng));
                for (int r = 0; r < out; ++r)
                    layer.bias (r) = static_cast<Scalar> (dist (rng));
                layers_.push_back (std::move (layer));
            }
        }

        int input_size () const { return sizes_.front (); }
        int output_size () const { return sizes_.back (); }
        const std::vector<int> &sizes () const { return sizes_; }
        OutputActivation activation () const { return activation_; }
        Scalar output_scale () const { return output_scale_; }
        const std::vector<Layer> &layers () const { return layers_; }
        std::vector<Layer> &layers () { return layers_; }

        std::size_t parameter_count () const
        {
            std::size_t n = 0;
            for (std::size_t l = 0; l + 1 < sizes_.size (); ++l)
                n += static_cast<std::size_t> (sizes_[l + 1]) * (sizes_[l] + 1);
            return n;
        }

        Matrix forward (const Matrix &input) const
        {
            Matrix a = input;
            for (std::size_t l = 0; l < layers_.size (); ++l)
            {
                Matrix z = layers_[l].weight * a;
                z.colwise () += layers_[l].bias;
                if (l + 1 < layers_.size ())
                    a = z.cwiseMax (Scalar (0));
                else
                    a = apply_output (z);
            }
            return a;
        }

        Matrix forward (const Matrix &input, Cache &cache) const
        {
            cache.inputs.clear ();
            cache.inputs.reserve (layers_.size ());
            Matrix a = input;
            for (std::size_t l = 0; l < layers_.size (); ++l)
            {
                cache.inputs.push_back (a);
                Matrix z = layers_[l].weight * a;
                z.colwise () += layers_[l].bias;
                if (l + 1 < layers_.size ())
                    a = z.cwiseMax (Scalar (0));
                else
                    a = apply_output (z);
            }
            cache.output = a;
            return a;
        }

        /// Writes parameter gradients of sum(grad_output . output) into `grads`
        /// and returns the gradient with respect to the input batch.
        Matrix backward (const Cache &cache, const Matrix &grad_output, Gradients &grads) const
        {
            grads.resize (layers_.size ());
            Matrix delta = grad_output;
            if (activation_ == OutputActivation::tanh)
            {
                // d(s*tanh(z))/dz = s - out^2 / s
                delta.array () *= output_scale_ - cache.output.array ().square () / output_scale_;
            }
            for (std::size_t l = layers_.size (); l-- > 0;)
            {
                const Matrix &in = cache.inputs[l];
                grads[l].weight.noalias () = delta * in.transpose ();
                grads[l].bias = delta.rowwise ().sum ();
                Matrix upstream = layers_[l].weight.transpose () * delta;
                if (l > 0)
                    upstream.array () *= (in.array () > Scalar (0)).template cast<Scalar> ();
                delta = std::move (upstream);
            }
            return delta;
        }

        Gradients zero_gradients () const
        {
            Gradients g;
            for (const auto &layer : layers_)
                g.push_back ({Matrix::Zero (layer.weight.rows (), layer.weight.cols ()), Vector::Zero (layer.bias.size ())});
            return g;
        }

        /// target = tau * source + (1 - tau) * target
        void soft_update_from (const Mlp &source, Scalar tau)
        {
            for (std::size_t l = 0; l < layers_.size (); ++l)
            {
                layers_[l].weight = tau * source.layers_[l].weight + (Scalar (1) - tau) * layers_[l].weight;
                layers_[l].bias = tau * source.layers_[l].bias + (Scalar (1) - tau) * layers_[l].bias;
            }
        }

        std::vector<Scalar> flat_parameters () const
        {
            std::vector<Scalar> flat;
            flat.reserve (parameter_count ());
            for (const auto &layer : layers_)
            {
                flat.insert (flat.end (), layer.weight.data (), layer.weight.data () + layer.weight.size ());
                flat.insert (flat.end (), layer.bias.data (), layer.bias.data () + layer.bias.size ());
            }
            return flat;
        }

        void set_flat_parameters (std::span<const Scalar> flat)
        {
            if (flat.size () != parameter_count ())
                throw ConfigError ("parameter vector has the wrong length");
            std::size_t pos = 0;
            for (auto &layer : layers_)
            {
                std::copy_n (flat.data () + pos, layer.weight.size (), layer.weight.data ());
                pos += static_cast<std::size_t> (layer.weight.size ());
                std::copy_n (flat.data () + pos, layer.bias.size (), layer.bias.data ());
                pos += static_cast<std::size_t> (layer.bias.size ());
            }
        }

        static std::vector<Scalar> flatten (const Gradients &grads)
        {
            std::vector<Scalar> flat;
            for (const auto &g : grads)
            {
                flat.insert (flat.end (), g.weight.data (), g.weight.data () + g.weight.size ());
                flat.insert (flat.end (), g.bias.data (), g.bias.data () + g.bias.size ());
            }
            return flat;
        }

        nlohmann::json to_json () const
        {
            const auto params = flat_parameters ();
            std::vector<double> as_double (params.begin (), params.end ());
            return {{"sizes", sizes_},
                    {"activation", activation_ == OutputActivation::tanh ? "tanh" : "identity"},
                    {"output_scale", static_cast<double> (output_scale_)},
                    {"parameters", as_double}};
        }

        static Mlp from_json (const nlohmann::json &j)
        {
            Mlp net;
            net.sizes_ = j.at ("sizes").get<std::vector<int>> ();
            net.activation_ = j.at ("activation").get<std::string> () == "tanh" ? OutputActivation::tanh : OutputActivation::identity;
            net.output_scale_ = static_cast<Scalar> (j.at ("output_scale").get<double> ());
            for (std::size_t l = 0; l + 1 < net.sizes_.size (); ++l)
                net.layers_.push_back ({Matrix::Zero (net.sizes_[l + 1], net.sizes_[l]), Vector::Zero (net.sizes_[l + 1])});
            const auto raw = j.at ("parameters").get<std::vector<double>> ();
            std::vector<Scalar> params (raw.begin (), raw.end ());
            net.set_flat_parameters (params);
            return net;
        }

      private:
        Matrix apply_output (const Matrix &z) const
        {
            if (activation_ == OutputActivation::tanh)
                return (z.array ().tanh () * output_scale_).matrix ();
            return z;
        }

        std::vector<int> sizes_;
        OutputActivation activation_{OutputActivation::identity};
        Scalar output_scale_{1};
        std::vector<Layer> layers_;
    };

    /// Adam with bias correction.
    template <typename Scalar>
    class Adam
    {
      public:
        using Net = Mlp<Scalar>;

        Adam () = default;
        Adam (const Net &net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
            : lr_ (lr), beta1_ (beta1), beta2_ (beta2), eps_ (eps), m_ (net.zero_gradients ()), v_ (net.zero_gradients ())
        {
        }

        double learning_rate () const { return lr_; }

        void step (Net &net, const typename Net::Gradients &grads)
        {
            ++t_;
            const auto b1 = static_cast<Scalar> (beta1_), b2 = static_cast<Scalar> (beta2_);
            const auto c1 = static_cast<Scalar> (1.0 - std::pow (beta1_, static_cast<double> (t_)));
            const auto c2 = static_cast<Scalar> (1.0 - std::pow (beta2_, static_cast<double> (t_)));
            const auto lr = static_cast<Scalar> (lr_), eps = static_cast<Scalar> (eps_);
            auto &layers = net.layers ();
            for (std::size_t l = 0; l < layers.size (); ++l)
            {
                update (layers[l].weight.array (), grads[l].weight.array (), m_[l].weight.array (), v_[l].weight.array (),
                        b1, b2, c1, c2, lr, eps);
                update (layers[l].bias.array (), grads[l].bias.array (), m_[l].bias.array (), v_[l].bias.array (), b1,
                        b2, c1, c2, lr, eps);
            }
        }

      private:
        template <typename P, typename G, typename M, typename V>
        static void update (P &&p, const G &g, M &&m, V &&v, Scalar b1, Scalar b2, Scalar c1, Scalar c2, Scalar lr,
                            Scalar eps)
        {
            m = b1 * m + (Scalar (1) - b1) * g;
            v = b2 * v + (Scalar (1) - b2) * g.square ();
            p -= lr * (m / c1) / ((v / c2).sqrt () + eps);
        }

        double lr_{1e-3};
        double beta1_{0.9};
        double beta2_{0.999};
        double eps_{1e-8};
        long long t_{0};
        typename Net::Gradients m_;
        typename Net::Gradients v_;
    };

}  // namespace narrownav
