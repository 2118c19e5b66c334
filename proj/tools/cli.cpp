#include "cli.hpp"

#include "lpcasrc/classify.hpp"
#include "lpcasrc/dictionary.hpp"
#include "lpcasrc/error.hpp"
#include "lpcasrc/io.hpp"
#include "lpcasrc/preprocess.hpp"
#include "lpcasrc/stats.hpp"
#include "lpcasrc/synth.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace lpcasrc::cli {

namespace {

using nlohmann::json;
using classify::Method;

constexpr const char* kModelFormat = "lpcasrc-model";

/// Typed, strict access to one JSON object of a config file.
class Node
{
public:
    Node(const json& j, std::string origin, std::string pointer)
        : j_(j), origin_(std::move(origin)), pointer_(std::move(pointer))
    {}

    [[noreturn]] void fail(const std::string& where, const std::string& msg) const
    {
        throw InputError(origin_ + ": " + (where.empty() ? "/" : where) + ": " + msg);
    }

    void require_object(std::initializer_list<const char*> allowed) const
    {
        if (!j_.is_object())
            fail(pointer_, "expected an object");
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [key, value] : j_.items())
            if (!keys.count(key))
                fail(pointer_ + "/" + key, "unknown key");
    }

    [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }
    [[nodiscard]] std::string at(const char* key) const { return pointer_ + "/" + key; }

    [[nodiscard]] Node child(const char* key) const { return {j_.at(key), origin_, at(key)}; }
    [[nodiscard]] Node element(const json& e, std::size_t i) const
    {
        return {e, origin_, pointer_ + "/" + std::to_string(i)};
    }
    [[nodiscard]] const json& raw() const { return j_; }
    [[nodiscard]] const std::string& pointer() const { return pointer_; }

    template <class T>
    void get(const char* key, T& out) const
    {
        if (!has(key))
            return;
        out = convert<T>(j_.at(key), at(key));
    }

    template <class T>
    T convert(const json& v, const std::string& where) const
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                fail(where, "expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string())
                fail(where, "expected a string");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number())
                fail(where, "expected a number");
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
                fail(where, "expected a nonnegative integer");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer())
                fail(where, "expected an integer");
        }
        return v.get<T>();
    }

    template <class T>
    void get_list(const char* key, std::vector<T>& out) const
    {
        if (!has(key))
            return;
        const auto& v = j_.at(key);
        if (!v.is_array())
            fail(at(key), "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(convert<T>(v[i], at(key) + "/" + std::to_string(i)));
    }

private:
    const json& j_;
    std::string origin_;
    std::string pointer_;
};

Method method_or_fail(const Node& n, const std::string& name, const std::string& where)
{
    const auto m = classify::parse_method(name);
    if (!m)
        n.fail(where, "unknown classifier '" + name + "'");
    return *m;
}

classify::Params parse_params(const Node& n, classify::Params p)
{
    n.require_object({"n", "d", "lambda", "k"});
    n.get("n", p.n);
    n.get("d", p.d);
    n.get("lambda", p.lambda);
    n.get("k", p.k);
    if (p.n < 1 || p.d < 1 || p.d > p.n)
        n.fail(n.pointer(), "need 1 <= d <= n");
    if (!(p.lambda > 0.0))
        n.fail(n.at("lambda"), "lambda must be positive");
    if (p.k < 1 || p.k % 2 == 0)
        n.fail(n.at("k"), "k must be a positive odd number");
    return p;
}

synth::SynthConfig parse_synth(const Node& n)
{
    n.require_object({"n0", "eta", "classes", "noise_dims", "amplitude", "frequency"});
    synth::SynthConfig s;
    n.get("n0", s.per_class);
    n.get("eta", s.eta);
    n.get("classes", s.classes);
    n.get("noise_dims", s.noise_dims);
    n.get("amplitude", s.amplitude);
    n.get("frequency", s.frequency);
    try {
        s.validate();
    } catch (const Error& e) {
        n.fail(n.pointer(), e.what());
    }
    return s;
}

json synth_json(const synth::SynthConfig& s)
{
    return {{"n0", s.per_class},         {"eta", s.eta},           {"classes", s.classes},
            {"noise_dims", s.noise_dims}, {"amplitude", s.amplitude}, {"frequency", s.frequency}};
}

/// Methods that can be served from a stored extended dictionary.
bool uses_dictionary(Method m)
{
    return m != Method::Src && m != Method::Knn;
}

dictionary::BuildOptions dictionary_options(Method m, const classify::Params& p, std::uint64_t seed)
{
    dictionary::BuildOptions o;
    o.d = p.d;
    o.n = p.n;
    o.seed = seed;
    o.normalize = !(m == Method::Tdc1 || m == Method::Tdc2 || m == Method::KnnExt);
    o.include_tangents = m != Method::SrcPruned;
    return o;
}

std::string mpca_tag(const std::optional<Eigen::Index>& m)
{
    return m ? "mpca" + std::to_string(*m) : "raw";
}

// Shared flag set for commands that take hyperparameters.
struct ParamFlags
{
    std::optional<int> n;
    std::optional<int> d;
    std::optional<double> lambda;
    std::optional<int> k;

    void attach(CLI::App& app)
    {
        app.add_option("--n", n, "Neighbourhood size")->check(CLI::PositiveNumber);
        app.add_option("--d", d, "Tangent dimension")->check(CLI::PositiveNumber);
        app.add_option("--lambda", lambda, "Sparsity trade-off")->check(CLI::PositiveNumber);
        app.add_option("--k", k, "Neighbours for kNN voting")->check(CLI::PositiveNumber);
    }

    [[nodiscard]] classify::Params apply(classify::Params p) const
    {
        p.n = n.value_or(p.n);
        p.d = d.value_or(p.d);
        p.lambda = lambda.value_or(p.lambda);
        p.k = k.value_or(p.k);
        return p;
    }
};

void print_prediction(std::ostream& out, const classify::Prediction& p)
{
    out << "label " << p.label << '\n';
    for (std::size_t l = 0; l < p.class_ids.size(); ++l)
        out << "residual " << p.class_ids[l] << ' ' << io::format_double(p.class_residuals[l]) << '\n';
}

int cmd_synth(const synth::SynthConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out)
{
    cfg.validate();
    const auto data = synth::generate(cfg);
    io::write_dataset_csv(data.train, out_dir / "train.csv");
    io::write_dataset_csv(data.test, out_dir / "test.csv");
    const auto snr = synth::mean_snr(data.clean_train, data.train.samples);
    out << "wrote " << data.train.size() << " training and " << data.test.size() << " test samples to "
        << out_dir.string() << '\n';
    out << "training SNR " << (snr.infinite ? std::string("inf") : io::format_double(snr.decibels)) << " dB\n";
    return kSuccess;
}

int cmd_build(const std::filesystem::path& train_file, const std::filesystem::path& model_dir, Method method,
              const classify::Params& params, std::uint64_t seed, std::ostream& out)
{
    const auto train = io::read_dataset_csv(train_file);
    std::filesystem::create_directories(model_dir);
    json meta{{"format", kModelFormat},
              {"version", 1},
              {"classifier", std::string(classify::to_string(method))},
              {"params", eval::to_json(params)},
              {"seed", seed}};
    if (uses_dictionary(method)) {
        const auto dict = dictionary::build_extended(train, dictionary_options(method, params, seed));
        dictionary::save(dict, model_dir);
        out << "dictionary " << dict.columns.rows() << " x " << dict.columns.cols() << ", pruning radius "
            << io::format_double(dict.pruning_radius) << '\n';
        if (const auto s = dict.rank_shortfall(); s > 0)
            out << s << " blocks have fewer than d tangent vectors\n";
    } else {
        train.validate();
        io::write_dataset_csv(train, model_dir / "train.csv");
        out << "stored " << train.size() << " training samples\n";
    }
    io::write_text(meta.dump(2) + "\n", model_dir / "model.json");
    return kSuccess;
}

int cmd_classify(const std::filesystem::path& model_dir, const std::filesystem::path& sample_file, bool labeled,
                 std::ostream& out)
{
    const auto meta_path = model_dir / "model.json";
    json meta;
    try {
        meta = json::parse(io::read_text(meta_path));
    } catch (const json::exception& e) {
        throw InputError(meta_path.string() + ": " + e.what());
    }
    const Node root(meta, meta_path.string(), "");
    root.require_object({"format", "version", "classifier", "params", "seed"});
    std::string format;
    root.get("format", format);
    if (format != kModelFormat)
        root.fail("/format", "not a model directory");
    std::string name;
    root.get("classifier", name);
    const Method method = method_or_fail(root, name, "/classifier");
    const auto params = parse_params(root.child("params"), {});

    Eigen::MatrixXd samples;
    std::vector<int> truth;
    if (labeled) {
        auto data = io::read_dataset_csv(sample_file);
        samples = std::move(data.samples);
        truth = std::move(data.labels);
    } else {
        samples = io::read_matrix_csv(sample_file).transpose();
    }

    std::optional<dictionary::ExtendedDictionary> dict;
    std::optional<Dataset> train;
    if (uses_dictionary(method))
        dict = dictionary::load(model_dir);
    else
        train = io::read_dataset_csv(model_dir / "train.csv");

    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < samples.cols(); ++i) {
        const Eigen::VectorXd y = samples.col(i);
        classify::Prediction p;
        switch (method) {
        case Method::Src: p = classify::classify_src(*train, y, params.lambda); break;
        case Method::Knn: p = classify::classify_knn(*train, y, params.k); break;
        case Method::LpcaSrc:
        case Method::SrcPruned: p = classify::classify_lpca_src(*dict, normalized(y), params.lambda); break;
        case Method::Tdc1: p = classify::classify_tdc1(*dict, y); break;
        case Method::Tdc2: p = classify::classify_tdc2(*dict, y); break;
        case Method::KnnExt: p = classify::classify_knn_ext(*dict, y, params.k); break;
        }
        if (samples.cols() > 1)
            out << "sample " << i << '\n';
        print_prediction(out, p);
        if (labeled && p.label == truth[static_cast<std::size_t>(i)])
            ++correct;
    }
    if (labeled && samples.cols() > 0)
        out << "accuracy " << io::format_double(static_cast<double>(correct) / static_cast<double>(samples.cols()))
            << '\n';
    return kSuccess;
}

Dataset read_pca_input(const std::filesystem::path& path, bool labeled)
{
    if (labeled)
        return io::read_dataset_csv(path);
    Dataset d;
    d.samples = io::read_matrix_csv(path).transpose();
    return d;
}

void write_pca_output(const Dataset& d, const std::filesystem::path& path, bool labeled)
{
    if (labeled)
        io::write_dataset_csv(d, path);
    else
        io::write_matrix_csv(d.samples.transpose(), path);
}

int cmd_bench(const BenchConfig& config, const std::filesystem::path& out_dir, std::ostream& out)
{
    std::filesystem::create_directories(out_dir);
    const json resolved = to_json(config);
    bool aborted = false;
    json index = json::array();

    for (const auto& ds : config.datasets) {
        eval::DataSource base;
        base.synthetic = ds.synthetic;
        base.dataset_name = ds.name;
        base.per_class_train = ds.per_class_train;
        if (!ds.synthetic)
            base.dataset = io::read_dataset_csv(ds.file);
        for (const auto& m : config.mpca) {
            eval::ExperimentConfig ec;
            ec.name = config.name + "/" + ds.name + "/" + mpca_tag(m);
            ec.methods = config.classifiers;
            ec.trials = config.trials;
            ec.seed = config.seed;
            ec.source = base;
            ec.source.m_pca = m;
            ec.source.pca_centered = config.pca_centered;
            ec.cross_validate = config.cross_validate;
            ec.cv = config.cv;
            ec.fixed = config.params;
            ec.threads = config.threads;
            ec.max_failure_fraction = config.max_failure_fraction;

            const auto report = eval::run_experiment(ec);
            auto body = eval::to_json(report);
            body["bench_config"] = resolved;

            json comparisons = json::array();
            if (std::find(ec.methods.begin(), ec.methods.end(), Method::LpcaSrc) != ec.methods.end()) {
                const auto& ours = report.at(Method::LpcaSrc);
                for (const auto& other : report.methods) {
                    if (other.method == Method::LpcaSrc)
                        continue;
                    std::vector<double> a;
                    std::vector<double> b;
                    for (std::size_t t = 0; t < ours.trials.size(); ++t) {
                        if (ours.trials[t].aborted || other.trials[t].aborted)
                            continue;
                        a.push_back(ours.trials[t].accuracy);
                        b.push_back(other.trials[t].accuracy);
                    }
                    if (a.size() < 2)
                        continue;
                    const auto tt = stats::paired_t_test_one_sided(a, b);
                    comparisons.push_back({{"method", std::string(classify::to_string(Method::LpcaSrc))},
                                           {"baseline", std::string(classify::to_string(other.method))},
                                           {"pairs", a.size()},
                                           {"mean_difference", tt.mean_difference},
                                           {"p_value", tt.p_value},
                                           {"ci_lower", tt.ci_lower},
                                           {"ci_upper", tt.ci_upper}});
                }
            }
            body["comparisons"] = comparisons;

            const std::string stem = config.name + "__" + ds.name + "__" + mpca_tag(m);
            io::write_text(body.dump(2) + "\n", out_dir / (stem + ".json"));
            io::write_text(eval::to_csv(report), out_dir / (stem + ".csv"));
            index.push_back(stem);

            out << ds.name << ' ' << mpca_tag(m) << '\n';
            for (const auto& mr : report.methods) {
                out << "  " << classify::to_string(mr.method) << " accuracy " << io::format_double(mr.mean_accuracy)
                    << " +- " << io::format_double(mr.std_accuracy) << ", runtime "
                    << io::format_double(mr.mean_runtime_ms) << " ms";
                if (mr.aborted_trials > 0)
                    out << ", " << mr.aborted_trials << " aborted";
                out << '\n';
            }
            aborted = aborted || report.any_aborted();
        }
    }
    io::write_text(json{{"config", resolved}, {"reports", index}}.dump(2) + "\n", out_dir / "index.json");
    return aborted ? kExperimentFailure : kSuccess;
}

} // namespace

BenchConfig parse_bench_config(const json& j, const std::string& origin, const std::filesystem::path& base_dir)
{
    const Node root(j, origin, "");
    root.require_object({"name", "seed", "trials", "threads", "classifiers", "datasets", "mpca", "pca_centered",
                         "cross_validate", "cv", "params", "max_failure_fraction"});
    BenchConfig c;
    root.get("name", c.name);
    root.get("seed", c.seed);
    root.get("trials", c.trials);
    root.get("threads", c.threads);
    root.get("pca_centered", c.pca_centered);
    root.get("cross_validate", c.cross_validate);
    root.get("max_failure_fraction", c.max_failure_fraction);
    if (c.trials < 1)
        root.fail("/trials", "need at least one trial");
    if (!(c.max_failure_fraction >= 0.0 && c.max_failure_fraction <= 1.0))
        root.fail("/max_failure_fraction", "must lie in [0, 1]");

    if (root.has("classifiers")) {
        std::vector<std::string> names;
        root.get_list("classifiers", names);
        if (names.empty())
            root.fail("/classifiers", "empty list");
        c.classifiers.clear();
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto m = method_or_fail(root, names[i], "/classifiers/" + std::to_string(i));
            if (std::find(c.classifiers.begin(), c.classifiers.end(), m) != c.classifiers.end())
                root.fail("/classifiers/" + std::to_string(i), "duplicate classifier");
            c.classifiers.push_back(m);
        }
    }

    if (!root.has("datasets"))
        root.fail("/datasets", "missing required key");
    const auto& datasets = j.at("datasets");
    if (!datasets.is_array() || datasets.empty())
        root.fail("/datasets", "expected a nonempty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        const Node dn = root.child("datasets").element(datasets[i], i);
        dn.require_object({"name", "synthetic", "file", "per_class_train"});
        DatasetSpec ds;
        dn.get("name", ds.name);
        if (ds.name.empty())
            dn.fail(dn.at("name"), "missing or empty name");
        if (!names.insert(ds.name).second)
            dn.fail(dn.at("name"), "duplicate dataset name");
        if (dn.has("synthetic") == dn.has("file"))
            dn.fail(dn.pointer(), "give exactly one of 'synthetic' and 'file'");
        if (dn.has("synthetic")) {
            if (dn.has("per_class_train"))
                dn.fail(dn.at("per_class_train"), "not used with synthetic data");
            ds.synthetic = parse_synth(dn.child("synthetic"));
        } else {
            std::string file;
            dn.get("file", file);
            ds.file = std::filesystem::path(file).is_absolute() ? std::filesystem::path(file) : base_dir / file;
            if (!dn.has("per_class_train"))
                dn.fail(dn.at("per_class_train"), "missing required key");
            dn.get("per_class_train", ds.per_class_train);
            if (ds.per_class_train < 1)
                dn.fail(dn.at("per_class_train"), "must be positive");
        }
        c.datasets.push_back(std::move(ds));
    }

    if (root.has("mpca")) {
        const auto& v = j.at("mpca");
        if (!v.is_array() || v.empty())
            root.fail("/mpca", "expected a nonempty array of positive integers or null");
        c.mpca.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].is_null()) {
                c.mpca.emplace_back(std::nullopt);
            } else if (v[i].is_number_integer() && v[i].get<std::int64_t>() > 0) {
                c.mpca.emplace_back(v[i].get<Eigen::Index>());
            } else {
                root.fail("/mpca/" + std::to_string(i), "expected a positive integer or null");
            }
        }
    }

    if (root.has("cv")) {
        const Node cv = root.child("cv");
        cv.require_object({"folds", "grids", "hold"});
        cv.get("folds", c.cv.folds);
        if (c.cv.folds < 2)
            cv.fail(cv.at("folds"), "need at least two folds");
        if (cv.has("grids")) {
            const Node g = cv.child("grids");
            g.require_object({"n", "lambda", "d", "k"});
            g.get_list("n", c.cv.grids.n);
            g.get_list("lambda", c.cv.grids.lambda);
            g.get_list("d", c.cv.grids.d);
            g.get_list("k", c.cv.grids.k);
            if (c.cv.grids.lambda.empty())
                g.fail(g.at("lambda"), "empty grid");
            if (c.cv.grids.k.empty())
                g.fail(g.at("k"), "empty grid");
            for (const auto v : c.cv.grids.lambda)
                if (!(v > 0.0))
                    g.fail(g.at("lambda"), "values must be positive");
            for (const auto v : c.cv.grids.n)
                if (v < 1)
                    g.fail(g.at("n"), "values must be positive");
            for (const auto v : c.cv.grids.d)
                if (v < 1)
                    g.fail(g.at("d"), "values must be positive");
            for (const auto v : c.cv.grids.k)
                if (v < 1 || v % 2 == 0)
                    g.fail(g.at("k"), "values must be positive and odd");
        }
        if (cv.has("hold"))
            c.cv.hold = parse_params(cv.child("hold"), c.cv.hold);
    }
    if (root.has("params"))
        c.params = parse_params(root.child("params"), c.params);
    return c;
}

BenchConfig load_bench_config(const std::filesystem::path& path)
{
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return parse_bench_config(j, path.string(), path.parent_path());
}

json to_json(const BenchConfig& c)
{
    json classifiers = json::array();
    for (const auto m : c.classifiers)
        classifiers.push_back(std::string(classify::to_string(m)));
    json datasets = json::array();
    for (const auto& ds : c.datasets) {
        if (ds.synthetic)
            datasets.push_back({{"name", ds.name}, {"synthetic", synth_json(*ds.synthetic)}});
        else
            datasets.push_back({{"name", ds.name}, {"file", ds.file.string()}, {"per_class_train", ds.per_class_train}});
    }
    json mpca = json::array();
    for (const auto& m : c.mpca)
        mpca.push_back(m ? json(*m) : json(nullptr));
    return {{"name", c.name},
            {"seed", c.seed},
            {"trials", c.trials},
            {"threads", c.threads},
            {"classifiers", classifiers},
            {"datasets", datasets},
            {"mpca", mpca},
            {"pca_centered", c.pca_centered},
            {"cross_validate", c.cross_validate},
            {"cv", {{"folds", c.cv.folds}, {"grids", eval::to_json(c.cv.grids)}, {"hold", eval::to_json(c.cv.hold)}}},
            {"params", eval::to_json(c.params)},
            {"max_failure_fraction", c.max_failure_fraction}};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sparse representation and local-PCA classification toolkit"};
    app.require_subcommand(1);

    const std::vector<std::string> method_names{"src", "lpca-src", "src-pruned", "tdc1", "tdc2", "knn", "knn-ext"};

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic sinusoid database");
    synth::SynthConfig synth_cfg;
    std::string synth_out;
    synth_cmd->add_option("--n0", synth_cfg.per_class, "Samples per class in each split")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--eta", synth_cfg.eta, "Noise level")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--classes", synth_cfg.classes, "Number of classes")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--noise-dims", synth_cfg.noise_dims, "Zero-padded dimensions")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--seed", synth_cfg.seed, "Random seed");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    // build
    auto* build_cmd = app.add_subcommand("build", "Train a classifier and store it in a model directory");
    std::string build_train;
    std::string build_out;
    std::string build_method = "lpca-src";
    std::uint64_t build_seed = 0;
    ParamFlags build_params;
    build_cmd->add_option("train", build_train, "Training CSV (label first)")->required();
    build_cmd->add_option("--out", build_out, "Model directory")->required();
    build_cmd->add_option("--classifier", build_method, "Classifier")->check(CLI::IsMember(method_names));
    build_cmd->add_option("--seed", build_seed, "Seed for the tangent scales");
    build_params.attach(*build_cmd);

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "Classify samples with a stored model");
    std::string model_dir;
    std::string sample_file;
    bool labeled = false;
    classify_cmd->add_option("model", model_dir, "Model directory")->required();
    classify_cmd->add_option("samples", sample_file, "CSV with one sample per row")->required();
    classify_cmd->add_flag("--labeled", labeled, "Rows start with a label; report accuracy");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run repeated-trial experiments");
    std::string bench_config;
    std::string bench_out = "reports";
    std::optional<std::size_t> bench_trials;
    std::optional<std::uint64_t> bench_seed;
    std::optional<std::size_t> bench_threads;
    std::optional<int> bench_n0;
    std::optional<double> bench_eta;
    std::vector<std::string> bench_methods;
    std::vector<Eigen::Index> bench_mpca;
    ParamFlags bench_params;
    bench_cmd->add_option("config", bench_config, "JSON experiment config");
    bench_cmd->add_option("--out", bench_out, "Report directory");
    bench_cmd->add_option("--trials", bench_trials, "Number of trials")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench_seed, "Master seed");
    bench_cmd->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
    bench_cmd->add_option("--n0", bench_n0, "Synthetic samples per class (without a config)")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--eta", bench_eta, "Synthetic noise level (without a config)")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--classifier", bench_methods, "Classifiers to compare")
        ->check(CLI::IsMember(method_names));
    bench_cmd->add_option("--mpca", bench_mpca, "PCA feature dimensions")->check(CLI::PositiveNumber);
    bench_params.attach(*bench_cmd);

    // pca
    auto* pca_cmd = app.add_subcommand("pca", "Global PCA feature extraction");
    pca_cmd->require_subcommand(1);
    bool pca_unlabeled = false;
    pca_cmd->add_flag("--unlabeled", pca_unlabeled, "Input rows carry no label column");
    auto* pca_fit_cmd = pca_cmd->add_subcommand("fit", "Fit a PCA model");
    std::string pca_input;
    std::string pca_model;
    std::string pca_out;
    Eigen::Index pca_m = 0;
    bool pca_centered = false;
    pca_fit_cmd->add_option("input", pca_input, "Training CSV")->required();
    pca_fit_cmd->add_option("--mpca", pca_m, "Feature dimension")->required()->check(CLI::PositiveNumber);
    pca_fit_cmd->add_option("--out", pca_model, "Model directory")->required();
    pca_fit_cmd->add_flag("--centered", pca_centered, "Subtract the training mean first");
    auto* pca_apply_cmd = pca_cmd->add_subcommand("apply", "Project samples onto a fitted basis");
    auto* pca_invert_cmd = pca_cmd->add_subcommand("invert", "Map features back to the input space");
    for (auto* sub : {pca_apply_cmd, pca_invert_cmd}) {
        sub->add_option("model", pca_model, "Model directory")->required();
        sub->add_option("input", pca_input, "Input CSV")->required();
        sub->add_option("--out", pca_out, "Output CSV")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (*synth_cmd)
            return cmd_synth(synth_cfg, synth_out, out);
        if (*build_cmd) {
            const auto m = *classify::parse_method(build_method);
            return cmd_build(build_train, build_out, m, build_params.apply({}), build_seed, out);
        }
        if (*classify_cmd)
            return cmd_classify(model_dir, sample_file, labeled, out);
        if (*bench_cmd) {
            BenchConfig cfg;
            if (!bench_config.empty()) {
                cfg = load_bench_config(bench_config);
                if (bench_n0 || bench_eta)
                    throw InputError("--n0/--eta apply only without a config file");
            } else {
                synth::SynthConfig s;
                s.per_class = bench_n0.value_or(s.per_class);
                s.eta = bench_eta.value_or(s.eta);
                s.validate();
                cfg.datasets.push_back({"synthetic", s, {}, 0});
            }
            if (bench_trials)
                cfg.trials = *bench_trials;
            if (bench_seed)
                cfg.seed = *bench_seed;
            if (bench_threads)
                cfg.threads = *bench_threads;
            if (!bench_methods.empty()) {
                cfg.classifiers.clear();
                for (const auto& name : bench_methods)
                    cfg.classifiers.push_back(*classify::parse_method(name));
            }
            if (!bench_mpca.empty())
                cfg.mpca.assign(bench_mpca.begin(), bench_mpca.end());
            // A parameter given on the command line is no longer searched.
            if (bench_params.n)
                cfg.cv.grids.n = {*bench_params.n};
            if (bench_params.d)
                cfg.cv.grids.d = {*bench_params.d};
            if (bench_params.lambda)
                cfg.cv.grids.lambda = {*bench_params.lambda};
            if (bench_params.k)
                cfg.cv.grids.k = {*bench_params.k};
            cfg.params = bench_params.apply(cfg.params);
            return cmd_bench(cfg, bench_out, out);
        }
        if (*pca_fit_cmd) {
            const auto data = read_pca_input(pca_input, !pca_unlabeled);
            const auto model = preprocess::pca_fit(data.samples, pca_m, pca_centered);
            preprocess::save(model, pca_model);
            out << "retained energy " << io::format_double(model.retained_energy) << '\n';
            if (model.rank_deficient)
                out << "warning: data rank is below the requested dimension\n";
            return kSuccess;
        }
        if (*pca_apply_cmd || *pca_invert_cmd) {
            const auto model = preprocess::load(pca_model);
            auto data = read_pca_input(pca_input, !pca_unlabeled);
            data.samples = *pca_apply_cmd ? preprocess::pca_project(model, data.samples)
                                          : preprocess::pca_reconstruct(model, data.samples);
            write_pca_output(data, pca_out, !pca_unlabeled);
            return kSuccess;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExperimentFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExperimentFailure;
    }
    return kSuccess;
}

} // namespace lpcasrc::cli
