#include "lpcasrc/dictionary.hpp"

#include "lpcasrc/error.hpp"
#include "lpcasrc/io.hpp"
#include "lpcasrc/lpca.hpp"
#include "lpcasrc/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lpcasrc::dictionary {

namespace {

double median(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0)
        return 0.0;
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string context(int label, std::size_t position)
{
    return "class " + std::to_string(label) + ", sample " + std::to_string(position) + ": ";
}

} // namespace

std::size_t ExtendedDictionary::rank_shortfall() const
{
    if (!options.include_tangents)
        return 0;
    return static_cast<std::size_t>(std::count_if(blocks.begin(), blocks.end(), [&](const TangentBlock& b) {
        return b.tangent_count() < options.d;
    }));
}

ExtendedDictionary build_extended(const Dataset& train, const BuildOptions& options)
{
    train.validate();
    if (train.empty())
        throw DimensionMismatch("empty training set");
    const std::size_t smallest = train.smallest_class_size();
    lpca::check_parameters(options.include_tangents ? options.d : 1, options.n, smallest);

    const Eigen::MatrixXd samples = options.normalize ? normalize_columns(train.samples) : train.samples;
    const auto members = train.class_members();

    ExtendedDictionary dict;
    dict.options = options;
    dict.class_ids = train.class_ids();

    struct Local
    {
        Eigen::MatrixXd basis;
        double radius;
    };
    std::vector<Local> local;
    std::vector<double> radii;
    for (std::size_t l = 0; l < members.size(); ++l) {
        const int label = dict.class_ids[l];
        Eigen::MatrixXd class_points(samples.rows(), static_cast<Eigen::Index>(members[l].size()));
        for (std::size_t i = 0; i < members[l].size(); ++i)
            class_points.col(static_cast<Eigen::Index>(i)) = samples.col(members[l][i]);

        for (std::size_t i = 0; i < members[l].size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            Local entry;
            if (options.include_tangents) {
                try {
                    auto tb = lpca::tangent_basis(class_points, idx, options.d, options.n);
                    entry = {std::move(tb.basis), tb.neighborhood_radius};
                } catch (const DegenerateNeighborhood& e) {
                    throw DegenerateNeighborhood(context(label, i) + e.what());
                }
            } else {
                const auto nn = lpca::nearest_neighbors(class_points, idx, static_cast<std::size_t>(options.n) + 1);
                entry = {Eigen::MatrixXd(samples.rows(), 0), nn.distances.back()};
            }
            radii.push_back(entry.radius);
            local.push_back(std::move(entry));

            TangentBlock block;
            block.label = label;
            block.class_index = l;
            block.class_position = i;
            block.sample_index = members[l][i];
            block.neighborhood_radius = radii.back();
            block.width = local.back().basis.cols() + 1;
            dict.blocks.push_back(block);
        }
    }
    dict.pruning_radius = median(radii);

    Eigen::Index total = 0;
    for (auto& block : dict.blocks) {
        block.first_column = total;
        total += block.width;
    }
    dict.columns.resize(samples.rows(), total);
    dict.labels.reserve(static_cast<std::size_t>(total));
    dict.block_of_column.reserve(static_cast<std::size_t>(total));

    for (std::size_t b = 0; b < dict.blocks.size(); ++b) {
        auto& block = dict.blocks[b];
        const Eigen::VectorXd x = samples.col(block.sample_index);
        const Eigen::MatrixXd& basis = local[b].basis;
        if (basis.cols() > 0) {
            auto stream = make_stream(options.seed, {block.class_index, block.class_position});
            block.scale = dict.pruning_radius * uniform_open01(stream);
        }
        for (Eigen::Index j = 0; j < basis.cols(); ++j)
            dict.columns.col(block.first_column + j) = block.scale * basis.col(j) + x;
        dict.columns.col(block.sample_column()) = x;
        for (Eigen::Index j = 0; j < block.width; ++j) {
            auto col = dict.columns.col(block.first_column + j);
            if (options.normalize) {
                const double norm = col.norm();
                if (norm == 0.0)
                    throw DegenerateNeighborhood(context(block.label, block.class_position)
                                                 + "tangent vector cancels its sample");
                col /= norm;
            }
            dict.labels.push_back(block.label);
            dict.block_of_column.push_back(b);
        }
    }
    return dict;
}

double signed_distance(const Eigen::VectorXd& y, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    return std::min((y - x).norm(), (y + x).norm());
}

PrunedDictionary prune(const ExtendedDictionary& dict, const Eigen::VectorXd& y, std::optional<double> radius_override)
{
    if (y.size() != dict.dim())
        throw DimensionMismatch("test sample has dimension " + std::to_string(y.size()) + ", dictionary "
                                + std::to_string(dict.dim()));
    if (dict.options.normalize && std::abs(y.norm() - 1.0) > 1e-12)
        throw DimensionMismatch("test sample must be unit-normalized before pruning");
    if (dict.blocks.empty())
        throw DimensionMismatch("empty dictionary");

    std::vector<double> dist(dict.blocks.size());
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < dict.blocks.size(); ++b) {
        dist[b] = signed_distance(y, dict.sample(b));
        closest = std::min(closest, dist[b]);
    }
    const double base = radius_override.value_or(dict.pruning_radius);

    PrunedDictionary out;
    out.radius = std::max(base, closest);
    out.fallback_used = closest > base;
    Eigen::Index width = 0;
    for (std::size_t b = 0; b < dict.blocks.size(); ++b) {
        if (dist[b] <= out.radius) {
            out.retained_blocks.push_back(b);
            width += dict.blocks[b].width;
        }
    }
    out.columns.resize(dict.dim(), width);
    out.labels.reserve(static_cast<std::size_t>(width));
    out.source_columns.reserve(static_cast<std::size_t>(width));
    Eigen::Index next = 0;
    for (const auto b : out.retained_blocks) {
        const auto& block = dict.blocks[b];
        out.columns.middleCols(next, block.width) = dict.columns.middleCols(block.first_column, block.width);
        for (Eigen::Index j = 0; j < block.width; ++j) {
            out.labels.push_back(block.label);
            out.source_columns.push_back(block.first_column + j);
        }
        next += block.width;
    }
    return out;
}

void save(const ExtendedDictionary& dict, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    io::write_matrix_csv(dict.columns.transpose(), dir / "dictionary.csv");

    nlohmann::json meta;
    meta["format"] = "lpcasrc-extended-dictionary";
    meta["version"] = 1;
    meta["rows"] = dict.columns.rows();
    meta["cols"] = dict.columns.cols();
    meta["pruning_radius"] = dict.pruning_radius;
    meta["d"] = dict.options.d;
    meta["n"] = dict.options.n;
    meta["seed"] = dict.options.seed;
    meta["normalize"] = dict.options.normalize;
    meta["include_tangents"] = dict.options.include_tangents;
    meta["class_ids"] = dict.class_ids;
    meta["labels"] = dict.labels;
    auto& blocks = meta["blocks"] = nlohmann::json::array();
    for (const auto& b : dict.blocks) {
        blocks.push_back({{"label", b.label},
                          {"class_index", b.class_index},
                          {"class_position", b.class_position},
                          {"sample_index", b.sample_index},
                          {"scale", b.scale},
                          {"neighborhood_radius", b.neighborhood_radius},
                          {"first_column", b.first_column},
                          {"width", b.width}});
    }
    io::write_text(meta.dump(2) + "\n", dir / "dictionary.json");
}

ExtendedDictionary load(const std::filesystem::path& dir)
{
    const auto json_path = dir / "dictionary.json";
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(io::read_text(json_path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(json_path.string() + ": " + e.what());
    }

    ExtendedDictionary dict;
    try {
        if (meta.at("format").get<std::string>() != "lpcasrc-extended-dictionary")
            throw InputError(json_path.string() + ": not an extended dictionary");
        dict.pruning_radius = meta.at("pruning_radius").get<double>();
        dict.options.d = meta.at("d").get<int>();
        dict.options.n = meta.at("n").get<int>();
        dict.options.seed = meta.at("seed").get<std::uint64_t>();
        dict.options.normalize = meta.at("normalize").get<bool>();
        dict.options.include_tangents = meta.at("include_tangents").get<bool>();
        dict.class_ids = meta.at("class_ids").get<std::vector<int>>();
        dict.labels = meta.at("labels").get<std::vector<int>>();
        for (const auto& jb : meta.at("blocks")) {
            TangentBlock b;
            b.label = jb.at("label").get<int>();
            b.class_index = jb.at("class_index").get<std::size_t>();
            b.class_position = jb.at("class_position").get<std::size_t>();
            b.sample_index = jb.at("sample_index").get<Eigen::Index>();
            b.scale = jb.at("scale").get<double>();
            b.neighborhood_radius = jb.at("neighborhood_radius").get<double>();
            b.first_column = jb.at("first_column").get<Eigen::Index>();
            b.width = jb.at("width").get<Eigen::Index>();
            dict.blocks.push_back(b);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(json_path.string() + ": " + e.what());
    }

    dict.columns = io::read_matrix_csv(dir / "dictionary.csv").transpose();
    const auto rows = meta["rows"].get<Eigen::Index>();
    const auto cols = meta["cols"].get<Eigen::Index>();
    if (dict.columns.rows() != rows || dict.columns.cols() != cols
        || dict.labels.size() != static_cast<std::size_t>(cols))
        throw InputError((dir / "dictionary.csv").string() + ": shape does not match sidecar");
    dict.block_of_column.assign(static_cast<std::size_t>(cols), 0);
    Eigen::Index expected = 0;
    for (std::size_t b = 0; b < dict.blocks.size(); ++b) {
        const auto& block = dict.blocks[b];
        if (block.first_column != expected || block.width < 1 || block.first_column + block.width > cols)
            throw InputError(json_path.string() + ": inconsistent block map at block " + std::to_string(b));
        for (Eigen::Index j = 0; j < block.width; ++j)
            dict.block_of_column[static_cast<std::size_t>(block.first_column + j)] = b;
        expected += block.width;
    }
    if (expected != cols)
        throw InputError(json_path.string() + ": block map does not cover all columns");
    return dict;
}

} // namespace lpcasrc::dictionary
