#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "c2st/errors.hpp"
#include "c2st/harness.hpp"

namespace c2st::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

Table read_table(std::istream& in, const std::string& name) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(name + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             lineno, std::min(cells.size(), t.header.size()) + 1);
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(lineno);
    }
    if (t.header.empty()) throw ParseError(name + ": missing header row", 1, 1);
    return t;
}

std::size_t column_index(const Table& t, const std::string& column, const std::string& name) {
    for (std::size_t j = 0; j < t.header.size(); ++j)
        if (t.header[j] == column) return j;
    throw ConfigError(name + ": no column named '" + column + "'");
}

double parse_number(const Table& t, std::size_t row, std::size_t col, const std::string& name) {
    const std::string& text = t.rows[row][col];
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
        throw ParseError(name + ": '" + text + "' in column '" + t.header[col] + "' is not a finite number",
                         t.line_numbers[row], col + 1);
    return v;
}

struct Columns {
    std::vector<std::size_t> x;
    std::size_t y = 0;
    std::vector<std::string> names; ///< x names, then y
};

Columns resolve_columns(const Table& t, const CsvSchema& schema, const std::string& name,
                        std::optional<std::size_t> group) {
    Columns c;
    c.y = column_index(t, schema.y_column, name);
    if (schema.x_columns.empty()) {
        for (std::size_t j = 0; j < t.header.size(); ++j)
            if (j != c.y && (!group || j != *group)) c.x.push_back(j);
    } else {
        for (const auto& col : schema.x_columns) c.x.push_back(column_index(t, col, name));
    }
    if (c.x.empty()) throw ConfigError(name + ": no covariate columns");
    for (const auto j : c.x) c.names.push_back(t.header[j]);
    c.names.push_back(schema.y_column);
    return c;
}

// Rows of `t` as [x | y].
Matrix numeric_rows(const Table& t, const Columns& c, const std::vector<std::size_t>& rows, const std::string& name) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(c.x.size() + 1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < c.x.size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_number(t, rows[i], c.x[j], name);
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c.x.size())) = parse_number(t, rows[i], c.y, name);
    }
    return m;
}

LoadedData standardize(Matrix first, Matrix second, std::vector<std::string> names) {
    if (first.rows() < 2 || second.rows() < 2) throw InvalidData("each group needs at least two rows");
    Standardization st;
    std::vector<std::string> warnings;
    const auto total = static_cast<double>(first.rows() + second.rows());
    for (Eigen::Index j = 0; j < first.cols(); ++j) {
        const double mean = (first.col(j).sum() + second.col(j).sum()) / total;
        const double ss = (first.col(j).array() - mean).square().sum() + (second.col(j).array() - mean).square().sum();
        double scale = std::sqrt(ss / (total - 1.0));
        if (!(scale > 1e-12 * std::max(1.0, std::abs(mean)))) {
            warnings.push_back("column '" + names[static_cast<std::size_t>(j)] +
                                   "' is constant; centered with scale 1");
            scale = 1.0;
        }
        first.col(j) = (first.col(j).array() - mean) / scale;
        second.col(j) = (second.col(j).array() - mean) / scale;
        st.mean.push_back(mean);
        st.scale.push_back(scale);
    }
    st.columns = std::move(names);
    const Eigen::Index p = first.cols() - 1;
    return {PairedData(first.leftCols(p), first.col(p), second.leftCols(p), second.col(p)), std::move(st),
            std::move(warnings)};
}

std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

} // namespace

LoadedData parse_csv(std::istream& in, const CsvSchema& schema, const std::string& name) {
    if (!schema.group_column) throw ConfigError("single-file input needs a group column");
    const Table t = read_table(in, name);
    const std::size_t g = column_index(t, *schema.group_column, name);
    const Columns c = resolve_columns(t, schema, name, g);

    std::vector<std::size_t> rows1, rows2;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& label = t.rows[i][g];
        if (label.empty())
            throw GroupMissing(name + ": row at line " + std::to_string(t.line_numbers[i]) + " has no group label");
        const double v = parse_number(t, i, g, name);
        if (v == 1.0) rows1.push_back(i);
        else if (v == 2.0) rows2.push_back(i);
        else throw ParseError(name + ": group label must be 1 or 2, got '" + label + "'", t.line_numbers[i], g + 1);
    }
    if (rows1.empty() || rows2.empty())
        throw GroupMissing(name + ": group " + std::string(rows1.empty() ? "1" : "2") + " has no rows");
    return standardize(numeric_rows(t, c, rows1, name), numeric_rows(t, c, rows2, name), c.names);
}

LoadedData load_csv(const std::string& path, const CsvSchema& schema) {
    auto in = open(path);
    return parse_csv(in, schema, path);
}

LoadedData load_csv_pair(const std::string& path1, const std::string& path2, const CsvSchema& schema) {
    auto in1 = open(path1);
    auto in2 = open(path2);
    const Table t1 = read_table(in1, path1);
    const Table t2 = read_table(in2, path2);
    const Columns c1 = resolve_columns(t1, schema, path1, std::nullopt);
    const Columns c2 = resolve_columns(t2, schema, path2, std::nullopt);
    if (c1.names != c2.names) throw DimensionMismatch("the two files have different column layouts");
    if (t1.rows.empty() || t2.rows.empty()) throw GroupMissing(std::string(t1.rows.empty() ? path1 : path2) + " has no rows");
    std::vector<std::size_t> all1(t1.rows.size()), all2(t2.rows.size());
    for (std::size_t i = 0; i < all1.size(); ++i) all1[i] = i;
    for (std::size_t i = 0; i < all2.size(); ++i) all2[i] = i;
    return standardize(numeric_rows(t1, c1, all1, path1), numeric_rows(t2, c2, all2, path2), c1.names);
}

} // namespace c2st::harness
