#pragma once

#include "lpcasrc/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace lpcasrc::synth {

/// Sinusoids on the unit sphere, embedded in R^(3 + noise_dims) with
/// isotropic Gaussian noise. Class l (1-based) has phase 2 pi / (3 l).
struct SynthConfig
{
    int classes = 4;
    /// Samples per class, in both the training and the test set.
    int per_class = 25;
    double eta = 0.001;
    double amplitude = 0.5;
    double frequency = 3.0;
    int noise_dims = 50;
    std::uint64_t seed = 0;

    [[nodiscard]] int dim() const { return 3 + noise_dims; }
    /// Throws DimensionMismatch on invalid settings.
    void validate() const;
};

struct SynthData
{
    Dataset train;
    Dataset test;
    /// Unit-norm training points before noise was added.
    Eigen::MatrixXd clean_train;
    /// Noisy training points before the final re-normalization.
    Eigen::MatrixXd noisy_train_unnormalized;
};

/// Train and test share the regular grid t_j = 2 pi j / per_class and draw
/// independent noise. Labels are 1..classes.
SynthData generate(const SynthConfig& config);

/// Noise-free unit point of class `label` (1-based) at parameter t, padded with zeros.
Eigen::VectorXd manifold_point(const SynthConfig& config, int label, double t);

struct Snr
{
    /// Mean over samples of 10 log10(||clean||^2 / ||noisy - clean||^2).
    double decibels = 0.0;
    /// Set when some sample carries no noise at all; decibels is then +inf.
    bool infinite = false;
};

/// Throws DimensionMismatch on unequal shapes.
Snr mean_snr(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& noisy);

} // namespace lpcasrc::synth
