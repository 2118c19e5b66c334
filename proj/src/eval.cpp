#include "lpcasrc/eval.hpp"

#include "lpcasrc/error.hpp"
#include "lpcasrc/io.hpp"
#include "lpcasrc/preprocess.hpp"
#include "lpcasrc/rng.hpp"
#include "lpcasrc/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

namespace lpcasrc::eval {

namespace {

using classify::Method;
using classify::Params;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from, Clock::time_point to)
{
    return std::chrono::duration<double, std::milli>(to - from).count();
}

std::vector<Eigen::Index> complement(std::size_t total, const std::vector<Eigen::Index>& excluded)
{
    std::vector<bool> skip(total, false);
    for (const auto j : excluded)
        skip[static_cast<std::size_t>(j)] = true;
    std::vector<Eigen::Index> out;
    out.reserve(total - excluded.size());
    for (std::size_t j = 0; j < total; ++j)
        if (!skip[j])
            out.push_back(static_cast<Eigen::Index>(j));
    return out;
}

/// Fold scorer with a cache, since the final selection is usually scored twice.
class FoldScorer
{
public:
    FoldScorer(const Dataset& train, Method method, std::size_t folds, std::uint64_t seed,
               const solver::SolverOptions& opts)
        : method_(method), seed_(seed), opts_(opts)
    {
        const auto fold_sets = stratified_folds(train, folds, seed);
        for (const auto& held : fold_sets) {
            test_.push_back(train.subset(held));
            train_.push_back(train.subset(complement(train.size(), held)));
        }
    }

    [[nodiscard]] std::size_t smallest_fold_class() const
    {
        std::size_t s = std::numeric_limits<std::size_t>::max();
        for (const auto& t : train_)
            s = std::min(s, t.smallest_class_size());
        return s;
    }

    [[nodiscard]] std::size_t folds() const { return train_.size(); }

    double score(const Params& p)
    {
        const auto key = std::make_tuple(p.n, p.d, p.lambda, p.k);
        if (const auto it = cache_.find(key); it != cache_.end())
            return it->second;
        std::size_t correct = 0;
        std::size_t total = 0;
        for (std::size_t f = 0; f < train_.size(); ++f) {
            total += test_[f].size();
            std::unique_ptr<classify::Classifier> clf;
            try {
                clf = classify::fit(method_, train_[f], p, stream_key(seed_, {f}), opts_);
            } catch (const Error&) {
                continue;
            }
            for (std::size_t i = 0; i < test_[f].size(); ++i) {
                try {
                    const auto pred = clf->predict(test_[f].samples.col(static_cast<Eigen::Index>(i)));
                    if (pred.label == test_[f].labels[i])
                        ++correct;
                } catch (const Error&) {
                }
            }
        }
        const double acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
        cache_.emplace(key, acc);
        return acc;
    }

private:
    Method method_;
    std::uint64_t seed_;
    solver::SolverOptions opts_;
    std::vector<Dataset> train_;
    std::vector<Dataset> test_;
    std::map<std::tuple<int, int, double, int>, double> cache_;
};

/// Best candidate by score; candidates are sorted so the first maximum is the smallest value.
template <class T, class Set>
T pick(std::vector<T> candidates, FoldScorer& scorer, Params base, Set set)
{
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    T best = candidates.front();
    if (candidates.size() == 1)
        return best;
    double best_score = -1.0;
    for (const auto& c : candidates) {
        set(base, c);
        const double s = scorer.score(base);
        if (s > best_score) {
            best_score = s;
            best = c;
        }
    }
    return best;
}

std::vector<int> int_range(int lo, int hi)
{
    std::vector<int> out;
    for (int v = lo; v <= hi; ++v)
        out.push_back(v);
    return out;
}

std::vector<int> clamp_grid(const std::vector<int>& grid, int lo, int hi)
{
    if (grid.empty())
        return int_range(lo, hi);
    std::vector<int> out;
    std::copy_if(grid.begin(), grid.end(), std::back_inserter(out), [&](int v) { return v >= lo && v <= hi; });
    return out;
}

struct TrialData
{
    Dataset train;
    Dataset test;
    std::optional<double> pca_energy;
};

TrialData prepare(const DataSource& src, std::uint64_t trial_seed)
{
    TrialData out;
    if (src.synthetic) {
        auto cfg = *src.synthetic;
        cfg.seed = trial_seed;
        auto data = synth::generate(cfg);
        out.train = std::move(data.train);
        out.test = std::move(data.test);
    } else {
        auto split = stratified_split(src.dataset, src.per_class_train, stream_key(trial_seed, {1}));
        out.train = std::move(split.train);
        out.test = std::move(split.test);
    }
    if (src.m_pca) {
        const auto model = preprocess::pca_fit(out.train.samples, *src.m_pca, src.pca_centered);
        out.train.samples = preprocess::pca_project(model, out.train.samples);
        out.test.samples = preprocess::pca_project(model, out.test.samples);
        out.pca_energy = model.retained_energy;
    }
    return out;
}

TrialResult run_method(const ExperimentConfig& config, const TrialData& data, Method method, std::size_t trial,
                       std::uint64_t trial_seed)
{
    TrialResult r;
    r.trial = trial;
    r.seed = trial_seed;
    r.pca_energy = data.pca_energy;
    r.truth = data.test.labels;
    r.predicted.assign(data.test.size(), std::numeric_limits<int>::min());

    try {
        if (config.cross_validate) {
            const auto sel = cross_validate(data.train, method, config.cv,
                                            stream_key(trial_seed, {2, static_cast<std::uint64_t>(method)}));
            r.params = sel.params;
            r.cv_accuracy = sel.cv_accuracy;
        } else {
            r.params = config.fixed;
        }

        const auto t0 = Clock::now();
        const auto clf = classify::fit(method, data.train, r.params, stream_key(trial_seed, {3}));
        const auto t1 = Clock::now();
        r.rank_shortfall = clf->rank_shortfall();

        double size_sum = 0.0;
        double kappa_sum = 0.0;
        std::size_t kappa_count = 0;
        for (std::size_t i = 0; i < data.test.size(); ++i) {
            try {
                const auto p = clf->predict(data.test.samples.col(static_cast<Eigen::Index>(i)));
                r.predicted[i] = p.label;
                size_sum += p.dictionary_size;
                if (p.kappa) {
                    kappa_sum += static_cast<double>(*p.kappa);
                    ++kappa_count;
                }
                if (p.fallback_used)
                    ++r.fallback_count;
                if (p.label == data.test.labels[i])
                    ++r.correct;
            } catch (const Error&) {
                ++r.failures;
            }
        }
        const auto t2 = Clock::now();
        r.offline_ms = elapsed_ms(t0, t1);
        r.online_ms = elapsed_ms(t1, t2);
        r.runtime_ms = r.offline_ms + r.online_ms;

        r.evaluated = data.test.size() - r.failures;
        if (r.evaluated > 0) {
            r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.evaluated);
            r.mean_dictionary_size = size_sum / static_cast<double>(r.evaluated);
        }
        if (kappa_count > 0)
            r.mean_kappa = kappa_sum / static_cast<double>(kappa_count);
        if (static_cast<double>(r.failures) > config.max_failure_fraction * static_cast<double>(data.test.size())) {
            r.aborted = true;
            r.abort_reason = std::to_string(r.failures) + " of " + std::to_string(data.test.size())
                             + " test samples failed";
        }
    } catch (const Error& e) {
        r.aborted = true;
        r.abort_reason = e.what();
    }
    return r;
}

nlohmann::json to_json(const synth::SynthConfig& s)
{
    return {{"classes", s.classes},       {"per_class", s.per_class}, {"eta", s.eta},
            {"amplitude", s.amplitude},   {"frequency", s.frequency}, {"noise_dims", s.noise_dims}};
}

nlohmann::json optional_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

Split stratified_split(const Dataset& data, std::size_t per_class_train, std::uint64_t seed)
{
    data.validate();
    const auto members = data.class_members();
    const auto ids = data.class_ids();
    std::vector<Eigen::Index> train_cols;
    std::vector<Eigen::Index> test_cols;
    for (std::size_t l = 0; l < members.size(); ++l) {
        if (members[l].size() <= per_class_train)
            throw ClassTooSmall("class " + std::to_string(ids[l]) + " has " + std::to_string(members[l].size())
                                + " samples, needs more than " + std::to_string(per_class_train));
        auto cols = members[l];
        auto rng = make_stream(seed, {l});
        std::shuffle(cols.begin(), cols.end(), rng);
        train_cols.insert(train_cols.end(), cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(per_class_train));
        test_cols.insert(test_cols.end(), cols.begin() + static_cast<std::ptrdiff_t>(per_class_train), cols.end());
    }
    std::sort(train_cols.begin(), train_cols.end());
    std::sort(test_cols.begin(), test_cols.end());
    return {data.subset(train_cols), data.subset(test_cols)};
}

std::vector<std::vector<Eigen::Index>> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed)
{
    if (folds < 2)
        throw DimensionMismatch("need at least two folds");
    std::vector<std::vector<Eigen::Index>> out(folds);
    const auto members = data.class_members();
    std::size_t next = 0;
    for (std::size_t l = 0; l < members.size(); ++l) {
        auto cols = members[l];
        auto rng = make_stream(seed, {l});
        std::shuffle(cols.begin(), cols.end(), rng);
        for (const auto c : cols) {
            out[next].push_back(c);
            next = (next + 1) % folds;
        }
    }
    for (auto& f : out)
        std::sort(f.begin(), f.end());
    return out;
}

SelectedParams cross_validate(const Dataset& train, Method method, const CvOptions& options, std::uint64_t seed,
                              const solver::SolverOptions& solver_opts)
{
    const auto use = classify::uses(method);
    const std::size_t smallest = train.smallest_class_size();
    if (smallest < 2)
        throw ClassTooSmall("cross-validation needs at least two samples per class");
    const std::size_t folds = std::clamp<std::size_t>(options.folds, 2, smallest);

    FoldScorer scorer(train, method, folds, seed, solver_opts);
    SelectedParams out;
    out.params = options.hold;
    out.folds_used = scorer.folds();

    bool searched = false;
    if (use.n) {
        const int n_max = static_cast<int>(scorer.smallest_fold_class()) - 2;
        const auto grid = clamp_grid(options.grids.n, 1, n_max);
        if (grid.empty())
            throw Eq7Violation("no feasible n: smallest cross-validation class has "
                               + std::to_string(scorer.smallest_fold_class()) + " samples");
        out.params.n = pick(grid, scorer, out.params, [](Params& p, int v) { p.n = v; });
        searched = searched || grid.size() > 1;
        out.params.d = std::min(out.params.d, out.params.n);
    }
    if (use.lambda) {
        if (options.grids.lambda.empty())
            throw DimensionMismatch("empty lambda grid");
        out.params.lambda = pick(options.grids.lambda, scorer, out.params, [](Params& p, double v) { p.lambda = v; });
        searched = searched || options.grids.lambda.size() > 1;
    }
    if (use.d) {
        const auto grid = clamp_grid(options.grids.d, 1, out.params.n);
        if (grid.empty())
            throw Eq7Violation("no feasible d for n = " + std::to_string(out.params.n));
        out.params.d = pick(grid, scorer, out.params, [](Params& p, int v) { p.d = v; });
        searched = searched || grid.size() > 1;
    }
    if (use.k) {
        std::vector<int> grid;
        std::copy_if(options.grids.k.begin(), options.grids.k.end(), std::back_inserter(grid),
                     [](int v) { return v >= 1 && v % 2 == 1; });
        if (grid.empty())
            throw DimensionMismatch("k grid holds no positive odd value");
        out.params.k = pick(grid, scorer, out.params, [](Params& p, int v) { p.k = v; });
        searched = searched || grid.size() > 1;
    }
    out.cv_accuracy = searched ? scorer.score(out.params) : 1.0;
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config)
{
    if (config.methods.empty())
        throw DimensionMismatch("no methods to run");
    if (config.trials == 0)
        throw DimensionMismatch("need at least one trial");
    if (config.source.synthetic)
        config.source.synthetic->validate();

    const std::size_t n_methods = config.methods.size();
    std::vector<std::vector<TrialResult>> results(config.trials, std::vector<TrialResult>(n_methods));

    auto run_trial = [&](std::size_t t) {
        const auto trial_seed = stream_key(config.seed, {t});
        TrialData data;
        try {
            data = prepare(config.source, trial_seed);
        } catch (const Error& e) {
            for (std::size_t m = 0; m < n_methods; ++m) {
                results[t][m].trial = t;
                results[t][m].seed = trial_seed;
                results[t][m].aborted = true;
                results[t][m].abort_reason = e.what();
            }
            return;
        }
        for (std::size_t m = 0; m < n_methods; ++m)
            results[t][m] = run_method(config, data, config.methods[m], t, trial_seed);
    };

    std::size_t threads = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, config.trials);
    if (threads <= 1) {
        for (std::size_t t = 0; t < config.trials; ++t)
            run_trial(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < config.trials; t = next++)
                    run_trial(t);
            });
    }

    ExperimentReport report;
    report.config = config;
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodReport mr;
        mr.method = config.methods[m];
        for (std::size_t t = 0; t < config.trials; ++t)
            mr.trials.push_back(std::move(results[t][m]));
        summarize(mr);
        report.methods.push_back(std::move(mr));
    }
    return report;
}

std::vector<double> MethodReport::accuracies() const
{
    std::vector<double> out;
    for (const auto& t : trials)
        if (!t.aborted)
            out.push_back(t.accuracy);
    return out;
}

void summarize(MethodReport& report)
{
    std::vector<double> acc;
    std::vector<double> runtime;
    std::vector<double> size;
    std::vector<double> kappa;
    report.aborted_trials = 0;
    for (const auto& t : report.trials) {
        if (t.aborted) {
            ++report.aborted_trials;
            continue;
        }
        acc.push_back(t.accuracy);
        runtime.push_back(t.runtime_ms);
        size.push_back(t.mean_dictionary_size);
        if (t.mean_kappa)
            kappa.push_back(*t.mean_kappa);
    }
    report.mean_accuracy = acc.empty() ? 0.0 : stats::mean(acc);
    report.std_accuracy = acc.size() < 2 ? 0.0 : stats::sample_std(acc);
    report.mean_runtime_ms = runtime.empty() ? 0.0 : stats::mean(runtime);
    report.mean_dictionary_size = size.empty() ? 0.0 : stats::mean(size);
    report.mean_kappa = kappa.empty() ? std::nullopt : std::optional<double>(stats::mean(kappa));
}

bool ExperimentReport::any_aborted() const
{
    return std::any_of(methods.begin(), methods.end(), [](const MethodReport& m) { return m.aborted_trials > 0; });
}

const MethodReport& ExperimentReport::at(Method m) const
{
    for (const auto& r : methods)
        if (r.method == m)
            return r;
    throw DimensionMismatch("method " + std::string(classify::to_string(m)) + " not in report");
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth)
{
    if (predicted.size() != truth.size())
        throw DimensionMismatch("prediction and truth lengths differ");
    if (truth.empty())
        return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        correct += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

nlohmann::json to_json(const Params& p)
{
    return {{"n", p.n}, {"d", p.d}, {"lambda", p.lambda}, {"k", p.k}};
}

nlohmann::json to_json(const Grids& g)
{
    return {{"n", g.n}, {"lambda", g.lambda}, {"d", g.d}, {"k", g.k}};
}

nlohmann::json to_json(const ExperimentConfig& c)
{
    nlohmann::json methods = nlohmann::json::array();
    for (const auto m : c.methods)
        methods.push_back(std::string(classify::to_string(m)));

    nlohmann::json source;
    if (c.source.synthetic) {
        source["synthetic"] = to_json(*c.source.synthetic);
    } else {
        source["dataset"] = {{"name", c.source.dataset_name},
                             {"samples", c.source.dataset.size()},
                             {"dim", c.source.dataset.dim()},
                             {"per_class_train", c.source.per_class_train}};
    }
    source["m_pca"] = c.source.m_pca ? nlohmann::json(*c.source.m_pca) : nlohmann::json(nullptr);
    source["pca_centered"] = c.source.pca_centered;

    return {{"name", c.name},
            {"methods", methods},
            {"trials", c.trials},
            {"seed", c.seed},
            {"source", source},
            {"cross_validate", c.cross_validate},
            {"cv", {{"folds", c.cv.folds}, {"grids", to_json(c.cv.grids)}, {"hold", to_json(c.cv.hold)}}},
            {"fixed", to_json(c.fixed)},
            {"max_failure_fraction", c.max_failure_fraction}};
}

nlohmann::json to_json(const ExperimentReport& r)
{
    nlohmann::json results = nlohmann::json::array();
    nlohmann::json timing = nlohmann::json::array();
    for (const auto& m : r.methods) {
        nlohmann::json trials = nlohmann::json::array();
        nlohmann::json trial_times = nlohmann::json::array();
        for (const auto& t : m.trials) {
            trials.push_back({{"trial", t.trial},
                              {"seed", t.seed},
                              {"accuracy", t.accuracy},
                              {"correct", t.correct},
                              {"evaluated", t.evaluated},
                              {"failures", t.failures},
                              {"aborted", t.aborted},
                              {"abort_reason", t.abort_reason},
                              {"params", to_json(t.params)},
                              {"cv_accuracy", t.cv_accuracy},
                              {"dictionary_size", t.mean_dictionary_size},
                              {"kappa", optional_json(t.mean_kappa)},
                              {"pca_energy", optional_json(t.pca_energy)},
                              {"rank_shortfall", t.rank_shortfall},
                              {"fallback_count", t.fallback_count}});
            trial_times.push_back({{"trial", t.trial},
                                   {"runtime_ms", t.runtime_ms},
                                   {"offline_ms", t.offline_ms},
                                   {"online_ms", t.online_ms}});
        }
        const std::string name(classify::to_string(m.method));
        results.push_back({{"method", name},
                           {"mean_accuracy", m.mean_accuracy},
                           {"std_accuracy", m.std_accuracy},
                           {"mean_dictionary_size", m.mean_dictionary_size},
                           {"mean_kappa", optional_json(m.mean_kappa)},
                           {"aborted_trials", m.aborted_trials},
                           {"trials", trials}});
        timing.push_back({{"method", name}, {"mean_runtime_ms", m.mean_runtime_ms}, {"trials", trial_times}});
    }
    return {{"config", to_json(r.config)}, {"results", results}, {"timing", timing}};
}

std::string to_csv(const ExperimentReport& r)
{
    std::ostringstream out;
    out << "method,trial,seed,accuracy,correct,evaluated,failures,aborted,n,d,lambda,k,cv_accuracy,"
           "dictionary_size,kappa,runtime_ms\n";
    for (const auto& m : r.methods) {
        for (const auto& t : m.trials) {
            out << classify::to_string(m.method) << ',' << t.trial << ',' << t.seed << ','
                << io::format_double(t.accuracy) << ',' << t.correct << ',' << t.evaluated << ',' << t.failures
                << ',' << (t.aborted ? 1 : 0) << ',' << t.params.n << ',' << t.params.d << ','
                << io::format_double(t.params.lambda) << ',' << t.params.k << ','
                << io::format_double(t.cv_accuracy) << ',' << io::format_double(t.mean_dictionary_size) << ','
                << (t.mean_kappa ? io::format_double(*t.mean_kappa) : std::string()) << ','
                << io::format_double(t.runtime_ms) << '\n';
        }
    }
    return out.str();
}

} // namespace lpcasrc::eval
