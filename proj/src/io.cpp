#include "lpcasrc/io.hpp"

#include "lpcasrc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace lpcasrc::io {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line)
{
    return path.string() + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        fields.push_back(field);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

bool parse_number(std::string_view s, double& out)
{
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

struct NumericRows
{
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> line_numbers;
};

NumericRows read_numeric_rows(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError(path.string() + ": cannot open file");
    NumericRows out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        bool ok = true;
        std::size_t bad = 0;
        for (std::size_t k = 0; k < fields.size() && ok; ++k) {
            ok = parse_number(fields[k], row[k]) && std::isfinite(row[k]);
            bad = k;
        }
        if (!ok) {
            if (out.rows.empty() && line_no == 1)
                continue; // header
            throw InputError(where(path, line_no) + "field " + std::to_string(bad + 1) + " is not a finite number: '"
                             + std::string(fields[bad]) + "'");
        }
        if (width == 0)
            width = row.size();
        else if (row.size() != width)
            throw InputError(where(path, line_no) + "expected " + std::to_string(width) + " fields, found "
                             + std::to_string(row.size()));
        out.rows.push_back(std::move(row));
        out.line_numbers.push_back(line_no);
    }
    return out;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Dataset read_dataset_csv(const std::filesystem::path& path)
{
    const auto parsed = read_numeric_rows(path);
    if (parsed.rows.empty())
        throw InputError(path.string() + ": no samples");
    const std::size_t width = parsed.rows.front().size();
    if (width < 2)
        throw InputError(where(path, parsed.line_numbers.front()) + "missing label or features");

    Dataset data;
    data.samples.resize(static_cast<Eigen::Index>(width - 1), static_cast<Eigen::Index>(parsed.rows.size()));
    data.labels.reserve(parsed.rows.size());
    for (std::size_t j = 0; j < parsed.rows.size(); ++j) {
        const auto& row = parsed.rows[j];
        const double label = row[0];
        if (label != std::floor(label) || std::abs(label) > 1e9)
            throw InputError(where(path, parsed.line_numbers[j]) + "label '" + format_double(label)
                             + "' is not an integer");
        data.labels.push_back(static_cast<int>(label));
        for (std::size_t k = 1; k < width; ++k)
            data.samples(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(j)) = row[k];
    }
    return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path)
{
    data.validate();
    std::ostringstream out;
    for (Eigen::Index j = 0; j < data.samples.cols(); ++j) {
        out << data.labels[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < data.samples.rows(); ++i)
            out << ',' << format_double(data.samples(i, j));
        out << '\n';
    }
    write_text(out.str(), path);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path)
{
    const auto parsed = read_numeric_rows(path);
    if (parsed.rows.empty())
        return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(parsed.rows.size()),
                      static_cast<Eigen::Index>(parsed.rows.front().size()));
    for (std::size_t i = 0; i < parsed.rows.size(); ++i)
        for (std::size_t k = 0; k < parsed.rows[i].size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = parsed.rows[i][k];
    return m;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path)
{
    std::ostringstream out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k > 0)
                out << ',';
            out << format_double(m(i, k));
        }
        out << '\n';
    }
    write_text(out.str(), path);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& text, const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError(path.string() + ": cannot write file");
    out << text;
}

} // namespace lpcasrc::io
