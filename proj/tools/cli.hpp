#pragma once

#include "lpcasrc/eval.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lpcasrc::cli {

enum ExitCode : int { kSuccess = 0, kExperimentFailure = 1, kInputError = 2 };

struct DatasetSpec
{
    std::string name;
    std::optional<synth::SynthConfig> synthetic;
    /// CSV path, resolved against the config file's directory.
    std::filesystem::path file;
    std::size_t per_class_train = 0;
};

struct BenchConfig
{
    std::string name = "bench";
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    std::size_t threads = 0;
    std::vector<classify::Method> classifiers{classify::Method::LpcaSrc, classify::Method::Src};
    std::vector<DatasetSpec> datasets;
    /// null entries mean "no PCA".
    std::vector<std::optional<Eigen::Index>> mpca{std::nullopt};
    bool pca_centered = false;
    bool cross_validate = true;
    eval::CvOptions cv;
    classify::Params params;
    double max_failure_fraction = 0.01;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// InputError naming `origin` and the JSON pointer of the offending value.
BenchConfig parse_bench_config(const nlohmann::json& j, const std::string& origin,
                               const std::filesystem::path& base_dir = {});
BenchConfig load_bench_config(const std::filesystem::path& path);
/// Every field, defaults included. Parsing the result gives back the same config.
nlohmann::json to_json(const BenchConfig& c);

/// Entry point behind the executable. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lpcasrc::cli
