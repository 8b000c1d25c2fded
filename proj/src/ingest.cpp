#include "fdcp/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "fdcp/error.hpp"

namespace fdcp {

namespace {

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\"");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = text.find_last_not_of(" \t\r\"");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, delimiter)) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == delimiter) {
        cells.emplace_back();
    }
    return cells;
}

std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

Dataset ingest_csv(std::istream& in, const IngestOptions& options) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty() || line.front() == '#') {
            continue;
        }
        rows.push_back(split(line, options.delimiter));
        line_numbers.push_back(line_number);
    }
    if (rows.empty()) {
        throw Error(ErrorKind::ParseError, "input contains no data rows");
    }

    const std::size_t skip = options.labels ? 1 : 0;
    bool has_header = options.header == HeaderMode::Abscissae;
    bool header_numeric = true;
    if (options.header == HeaderMode::Auto) {
        for (std::size_t c = 0; c < rows.front().size(); ++c) {
            const bool numeric = parse_number(rows.front()[c]).has_value();
            if (!numeric) {
                has_header = true;
                if (c >= skip) {
                    header_numeric = false;
                }
            }
        }
    }

    const std::size_t width = rows.front().size();
    if (width <= skip) {
        throw Error(ErrorKind::ParseError, "row " + std::to_string(line_numbers.front()) + " has no values");
    }
    const std::size_t samples = width - skip;

    std::vector<std::string> labels;
    bool from_header = false;
    bool rescaled = false;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> abscissae;
    if (has_header && header_numeric) {
        for (std::size_t c = skip; c < width; ++c) {
            const auto value = parse_number(rows.front()[c]);
            if (!value) {
                throw Error(ErrorKind::ParseError, "row " + std::to_string(line_numbers.front()) + ", column " +
                                                       std::to_string(c + 1) + ": abscissa '" +
                                                       rows.front()[c] + "' is not numeric");
            }
            abscissae.push_back(*value);
        }
        from_header = true;
    }
    const std::size_t first_data = has_header ? 1 : 0;
    const std::size_t n = rows.size() - first_data;

    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(samples));
    for (std::size_t r = first_data; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != width) {
            throw Error(ErrorKind::ParseError, "row " + std::to_string(line_numbers[r]) + " has " +
                                                   std::to_string(cells.size()) + " fields, expected " +
                                                   std::to_string(width));
        }
        if (options.labels) {
            labels.push_back(cells.front());
        }
        for (std::size_t c = skip; c < width; ++c) {
            const auto value = parse_number(cells[c]);
            if (!value) {
                throw Error(ErrorKind::ParseError, "row " + std::to_string(line_numbers[r]) + ", column " +
                                                       std::to_string(c + 1) + ": '" + cells[c] +
                                                       "' is not numeric");
            }
            values(static_cast<Eigen::Index>(r - first_data), static_cast<Eigen::Index>(c - skip)) = *value;
        }
    }

    if (abscissae.empty()) {
        for (std::size_t j = 0; j < samples; ++j) {
            abscissae.push_back(samples == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(samples - 1));
        }
    } else {
        lo = abscissae.front();
        hi = abscissae.back();
        for (std::size_t j = 1; j < abscissae.size(); ++j) {
            if (!(abscissae[j] > abscissae[j - 1])) {
                throw Error(ErrorKind::ParseError, "header abscissae must increase (column " +
                                                       std::to_string(j + 1) + ")");
            }
        }
        if (lo != 0.0 || hi != 1.0) {
            rescaled = true;
            for (double& x : abscissae) {
                x = (x - lo) / (hi - lo);
            }
            abscissae.front() = 0.0;
            abscissae.back() = 1.0;
        }
    }
    return Dataset{RawCurves(std::move(values), std::move(abscissae)), std::move(labels), from_header, rescaled, lo, hi};
}

Dataset ingest_csv_file(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ParseError, "cannot open " + path);
    }
    return ingest_csv(in, options);
}

}  // namespace fdcp
