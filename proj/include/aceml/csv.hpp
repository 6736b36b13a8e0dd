#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aceml/errors.hpp"

namespace aceml {

// Shortest round-trip decimal representation, locale independent; non-finite
// values become "NA".
std::string format_double(double value);

// RFC-4180-ish writer: comma separated, LF line endings, fields quoted only
// when they contain a comma, quote or newline.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void row(const std::vector<std::string>& cells);
    void close();

    static std::string escape(const std::string& cell);

private:
    std::ofstream out_;
    std::string path_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

// Numeric view of selected columns; throws on unparsable cells.
Eigen::MatrixXd csv_to_matrix(const CsvTable& table, const std::vector<int>& columns);

}  // namespace aceml
