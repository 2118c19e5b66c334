#pragma once

#include "lpcasrc/classify.hpp"
#include "lpcasrc/dataset.hpp"
#include "lpcasrc/synth.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lpcasrc::eval {

struct Split
{
    Dataset train;
    Dataset test;
};

/// Exactly `per_class_train` random samples of every class go to training,
/// the rest to testing. Throws ClassTooSmall unless every class is larger.
Split stratified_split(const Dataset& data, std::size_t per_class_train, std::uint64_t seed);

/// Column indices of each of `folds` stratified folds. Every class is
/// shuffled and dealt round-robin, so fold sizes per class differ by at most one.
std::vector<std::vector<Eigen::Index>> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed);

/// Candidate values. Empty n or d grids mean "every value allowed by
/// 1 <= d <= n < (smallest class) - 1".
struct Grids
{
    std::vector<int> n;
    std::vector<double> lambda{1e-4, 1e-3, 1e-2};
    std::vector<int> d;
    std::vector<int> k{1, 3, 5};
};

struct CvOptions
{
    Grids grids;
    std::size_t folds = 5;
    /// Values held while a parameter is still undetermined.
    classify::Params hold{1, 1, 1e-3, 1};
};

struct SelectedParams
{
    classify::Params params;
    /// Fold accuracy of the final selection (1.0 when nothing was searched).
    double cv_accuracy = 1.0;
    std::size_t folds_used = 0;
};

/// Tune the parameters `method` uses one at a time in the order n, lambda,
/// d, k. Each candidate is scored by stratified K-fold accuracy on `train`;
/// ties go to the smaller value. Infeasible n and d candidates are dropped.
/// The fold count shrinks when classes are too small for it.
SelectedParams cross_validate(const Dataset& train, classify::Method method, const CvOptions& options,
                              std::uint64_t seed, const solver::SolverOptions& solver_opts = {});

struct DataSource
{
    /// Regenerated with a fresh seed on every trial when set.
    std::optional<synth::SynthConfig> synthetic;
    /// Otherwise split into train/test per trial.
    Dataset dataset;
    std::string dataset_name;
    std::size_t per_class_train = 0;
    /// Global (uncentered) PCA fitted on each training split when set.
    std::optional<Eigen::Index> m_pca;
    bool pca_centered = false;
};

struct ExperimentConfig
{
    std::string name = "experiment";
    std::vector<classify::Method> methods{classify::Method::LpcaSrc, classify::Method::Src};
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    DataSource source;
    bool cross_validate = true;
    CvOptions cv;
    /// Used as-is when cross_validate is false.
    classify::Params fixed;
    /// 0 selects the number of hardware threads.
    std::size_t threads = 0;
    /// A trial aborts when more than this fraction of its test samples fail.
    double max_failure_fraction = 0.01;
};

struct TrialResult
{
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    std::size_t correct = 0;
    std::size_t evaluated = 0;
    std::size_t failures = 0;
    bool aborted = false;
    std::string abort_reason;
    classify::Params params;
    double cv_accuracy = 1.0;
    double mean_dictionary_size = 0.0;
    std::optional<double> mean_kappa;
    std::optional<double> pca_energy;
    std::size_t rank_shortfall = 0;
    std::size_t fallback_count = 0;
    /// Offline plus online time; cross-validation excluded.
    double runtime_ms = 0.0;
    double offline_ms = 0.0;
    double online_ms = 0.0;
    std::vector<int> predicted;
    std::vector<int> truth;
};

struct MethodReport
{
    classify::Method method = classify::Method::Src;
    std::vector<TrialResult> trials;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_runtime_ms = 0.0;
    double mean_dictionary_size = 0.0;
    std::optional<double> mean_kappa;
    std::size_t aborted_trials = 0;

    /// Accuracies of the non-aborted trials, in trial order.
    [[nodiscard]] std::vector<double> accuracies() const;
};

struct ExperimentReport
{
    ExperimentConfig config;
    std::vector<MethodReport> methods;

    [[nodiscard]] bool any_aborted() const;
    [[nodiscard]] const MethodReport& at(classify::Method m) const;
};

/// Runs trials in parallel; each trial derives its own seed from the master seed.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Fill the aggregate fields of a method report from its trials.
void summarize(MethodReport& report);

/// Correct predictions / total, recomputed from stored labels.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// Serialization.

nlohmann::json to_json(const classify::Params& p);
nlohmann::json to_json(const Grids& g);
nlohmann::json to_json(const ExperimentConfig& c);
/// {"config", "results", "timing"}. Only "timing" varies between identical runs.
nlohmann::json to_json(const ExperimentReport& r);
/// One row per (method, trial).
std::string to_csv(const ExperimentReport& r);

} // namespace lpcasrc::eval
