#include "rpcr/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rpcr {

using Eigen::Index;

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (const char ch : line) {
        if (ch == '"') quoted = !quoted;
        else if (ch == ',' && !quoted) {
            out.push_back(cell);
            cell.clear();
        } else if (ch != '\r') cell.push_back(ch);
    }
    out.push_back(cell);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CsvTable table;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
    for (const auto& h : split_line(line)) table.header.push_back(trim(h));
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw std::invalid_argument("csv: row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                        " fields, expected " + std::to_string(table.header.size()));
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            const std::string where = "row " + std::to_string(lineno) + ", column " + std::to_string(c + 1) + " ('" +
                                      table.header[c] + "')";
            if (cell.empty()) throw std::invalid_argument("csv: missing value at " + where);
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
                throw std::invalid_argument("csv: invalid value '" + cell + "' at " + where);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c) table.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("csv: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

Dataset dataset_from_table(const CsvTable& table, const std::string& response) {
    Index col = -1;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (table.header[c] == response) col = static_cast<Index>(c);
    if (col < 0) throw std::invalid_argument("csv: response column '" + response + "' not found");
    const Index n = table.values.rows(), P = table.values.cols();
    if (P < 2) throw std::invalid_argument("csv: need at least one predictor column");
    Dataset d;
    d.y = table.values.col(col);
    d.Z.resize(n, P - 1);
    for (Index c = 0, k = 0; c < P; ++c)
        if (c != col) d.Z.col(k++) = table.values.col(c);
    return d;
}

std::string vector_csv(const Eigen::VectorXd& v, const std::string& value_name) {
    std::ostringstream os;
    os << "index," << value_name << '\n';
    char buf[64];
    for (Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", v(i));
        os << i << ',' << buf << '\n';
    }
    return os.str();
}

}  // namespace rpcr
