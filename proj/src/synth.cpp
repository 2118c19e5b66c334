#include "lpcasrc/synth.hpp"

#include "lpcasrc/error.hpp"
#include "lpcasrc/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace lpcasrc::synth {

void SynthConfig::validate() const
{
    if (classes < 1)
        throw DimensionMismatch("need at least one class");
    if (per_class < 3)
        throw DimensionMismatch("per-class size must be at least 3");
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw DimensionMismatch("noise level must be finite and nonnegative");
    if (noise_dims < 0)
        throw DimensionMismatch("noise dimensions must be nonnegative");
}

Eigen::VectorXd manifold_point(const SynthConfig& config, int label, double t)
{
    const double phase = 2.0 * std::numbers::pi / (3.0 * label);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(config.dim());
    p(0) = std::cos(t + phase);
    p(1) = std::sin(t + phase);
    p(2) = config.amplitude * std::sin(config.frequency * t);
    p.head<3>() /= p.head<3>().norm();
    return p;
}

namespace {

struct Draw
{
    Dataset data;
    Eigen::MatrixXd clean;
    Eigen::MatrixXd noisy;
};

Draw draw(const SynthConfig& config, std::uint64_t split)
{
    const int total = config.classes * config.per_class;
    Draw out;
    out.clean.resize(config.dim(), total);
    out.noisy.resize(config.dim(), total);
    out.data.labels.reserve(static_cast<std::size_t>(total));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int l = 1; l <= config.classes; ++l) {
        auto stream = make_stream(config.seed, {split, static_cast<std::uint64_t>(l)});
        for (int j = 0; j < config.per_class; ++j) {
            const int col = (l - 1) * config.per_class + j;
            const double t = 2.0 * std::numbers::pi * j / config.per_class;
            out.clean.col(col) = manifold_point(config, l, t);
            for (Eigen::Index i = 0; i < config.dim(); ++i)
                out.noisy(i, col) = out.clean(i, col) + config.eta * noise(stream);
            out.data.labels.push_back(l);
        }
    }
    out.data.samples = normalize_columns(out.noisy);
    return out;
}

} // namespace

SynthData generate(const SynthConfig& config)
{
    config.validate();
    auto train = draw(config, 0);
    auto test = draw(config, 1);
    SynthData out;
    out.train = std::move(train.data);
    out.test = std::move(test.data);
    out.clean_train = std::move(train.clean);
    out.noisy_train_unnormalized = std::move(train.noisy);
    return out;
}

Snr mean_snr(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& noisy)
{
    if (clean.rows() != noisy.rows() || clean.cols() != noisy.cols())
        throw DimensionMismatch("SNR needs matrices of equal shape");
    if (clean.cols() == 0)
        throw DimensionMismatch("SNR of an empty set");
    Snr out;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < clean.cols(); ++j) {
        const double noise_power = (noisy.col(j) - clean.col(j)).squaredNorm();
        if (noise_power == 0.0) {
            out.infinite = true;
            continue;
        }
        sum += 10.0 * std::log10(clean.col(j).squaredNorm() / noise_power);
    }
    out.decibels = out.infinite ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(clean.cols());
    return out;
}

} // namespace lpcasrc::synth
