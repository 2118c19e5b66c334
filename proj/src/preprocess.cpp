#include "lpcasrc/preprocess.hpp"

#include "lpcasrc/error.hpp"
#include "lpcasrc/io.hpp"
#include "lpcasrc/linalg.hpp"

#include "json.hpp"

#include <string>

namespace lpcasrc::preprocess {

PcaModel pca_fit(const Eigen::MatrixXd& train, Eigen::Index m_pca, bool centered)
{
    const Eigen::Index limit = std::min(train.rows(), train.cols());
    if (m_pca < 1 || m_pca > limit)
        throw DimensionMismatch("feature dimension " + std::to_string(m_pca) + " outside [1, "
                                + std::to_string(limit) + "]");
    if (!train.allFinite())
        throw DimensionMismatch("PCA input contains non-finite values");

    PcaModel model;
    model.centered = centered;
    model.mean = centered ? Eigen::VectorXd(train.rowwise().mean()) : Eigen::VectorXd::Zero(train.rows());
    const Eigen::MatrixXd work = train.colwise() - model.mean;

    const Eigen::BDCSVD<Eigen::MatrixXd> svd(work, Eigen::ComputeThinU);
    model.singular_values = svd.singularValues();
    model.basis = svd.matrixU().leftCols(m_pca);
    canonicalize_signs(model.basis);

    const double total = model.singular_values.squaredNorm();
    model.retained_energy = total > 0.0 ? model.singular_values.head(m_pca).squaredNorm() / total : 0.0;
    model.rank_deficient = model.singular_values(m_pca - 1) <= 1e-12 * model.singular_values(0);
    return model;
}

Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& x)
{
    if (x.rows() != model.input_dim())
        throw DimensionMismatch("expected " + std::to_string(model.input_dim()) + "-dimensional samples, got "
                                + std::to_string(x.rows()));
    return model.basis.transpose() * (x.colwise() - model.mean);
}

Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& features)
{
    if (features.rows() != model.feature_dim())
        throw DimensionMismatch("expected " + std::to_string(model.feature_dim()) + " features, got "
                                + std::to_string(features.rows()));
    return (model.basis * features).colwise() + model.mean;
}

void save(const PcaModel& model, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    io::write_matrix_csv(model.basis, dir / "basis.csv");
    io::write_matrix_csv(model.singular_values, dir / "singular_values.csv");
    io::write_matrix_csv(model.mean, dir / "mean.csv");
    const nlohmann::json meta = {{"format", "lpcasrc-pca"},
                                 {"version", 1},
                                 {"input_dim", model.input_dim()},
                                 {"feature_dim", model.feature_dim()},
                                 {"retained_energy", model.retained_energy},
                                 {"centered", model.centered},
                                 {"rank_deficient", model.rank_deficient}};
    io::write_text(meta.dump(2) + "\n", dir / "pca.json");
}

PcaModel load(const std::filesystem::path& dir)
{
    PcaModel model;
    const auto json_path = dir / "pca.json";
    try {
        const auto meta = nlohmann::json::parse(io::read_text(json_path));
        if (meta.at("format").get<std::string>() != "lpcasrc-pca")
            throw InputError(json_path.string() + ": not a PCA model");
        model.retained_energy = meta.at("retained_energy").get<double>();
        model.centered = meta.at("centered").get<bool>();
        model.rank_deficient = meta.at("rank_deficient").get<bool>();
        model.basis = io::read_matrix_csv(dir / "basis.csv");
        model.singular_values = io::read_matrix_csv(dir / "singular_values.csv");
        model.mean = io::read_matrix_csv(dir / "mean.csv");
        if (model.basis.rows() != meta.at("input_dim").get<Eigen::Index>()
            || model.basis.cols() != meta.at("feature_dim").get<Eigen::Index>()
            || model.mean.size() != model.basis.rows())
            throw InputError(json_path.string() + ": matrix shapes do not match metadata");
    } catch (const nlohmann::json::exception& e) {
        throw InputError(json_path.string() + ": " + e.what());
    }
    return model;
}

} // namespace lpcasrc::preprocess
