#pragma once

#include "lpcasrc/dataset.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace lpcasrc::io {

/// Dataset CSV: one sample per row, integer label in the first field,
/// features after. A non-numeric first row is taken as a header.
/// Throws InputError with file:line context on malformed input.
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

/// Plain numeric CSV, written row by row with round-trip precision.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

} // namespace lpcasrc::io
