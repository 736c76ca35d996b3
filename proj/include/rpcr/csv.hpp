#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpcr/pc_basis.hpp"

namespace rpcr {

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;  // rows x header.size()
};

/// Reads a numeric CSV with a header row. Empty, non-numeric or non-finite
/// cells throw std::invalid_argument naming the 1-based row and column.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

/// Splits a table into predictors and the named response column.
Dataset dataset_from_table(const CsvTable& table, const std::string& response);

/// Writes a single-column CSV "index,value".
std::string vector_csv(const Eigen::VectorXd& v, const std::string& value_name);

}  // namespace rpcr
