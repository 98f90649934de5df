#pragma once

#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitfeat {

/// All numeric output uses 9 significant digits.
inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& names) { line(names); }

    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void matrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j) out_ << ',';
                out_ << format_g9(m(i, j));
            }
            out_ << '\n';
        }
    }

    void close() {
        out_.flush();
        if (!out_) throw std::runtime_error("csv write failed");
    }

private:
    std::ofstream out_;
};

/// Reads an all-numeric CSV. With has_header the first line is skipped.
Eigen::MatrixXd read_csv(const std::string& path, bool has_header);

}  // namespace orbitfeat
