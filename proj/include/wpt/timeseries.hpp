#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "wpt/errors.hpp"

namespace wpt {

/// Locale-independent scientific formatting with 12 significant digits; the
/// single float format of every CSV this tool writes.
inline std::string format_value(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 11);
    return std::string(buf, res.ptr);
}

/// Columnar (abscissa, values...) record with '#'-prefixed metadata, the
/// universal CSV-facing output type.
class TimeSeries {
public:
    TimeSeries(std::vector<std::string> columns) : columns_(std::move(columns)) {
        if (columns_.size() < 2)
            throw config_error("TimeSeries: need an abscissa and at least one value column");
    }

    void add_metadata(const std::string& key, const std::string& value) {
        metadata_.emplace_back(key, value);
    }
    void add_metadata(const std::string& key, double value) {
        metadata_.emplace_back(key, format_value(value));
    }

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size())
            throw config_error("TimeSeries: row width does not match the column count");
        for (const double v : row)
            if (!std::isfinite(v))
                throw config_error("TimeSeries: non-finite value");
        if (!rows_.empty() && !(row.front() > rows_.back().front()))
            throw config_error("TimeSeries: abscissa must be strictly increasing");
        rows_.push_back(row);
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

    void write_csv(std::ostream& os) const {
        for (const auto& [k, v] : metadata_)
            os << "# " << k << " = " << v << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i)
            os << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i)
                os << format_value(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
    }

    void write_csv_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary); // fixed newlines on every platform
        if (!out)
            throw config_error("TimeSeries: cannot open '" + path + "' for writing");
        write_csv(out);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

} // namespace wpt
