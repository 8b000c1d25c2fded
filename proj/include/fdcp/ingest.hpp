#pragma once

// Row-per-curve CSV input.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdcp/fdobj.hpp"

namespace fdcp {

enum class HeaderMode {
    /// The first row is a header when one of its cells is not numeric. Its
    /// numeric cells become abscissae if all of them parse.
    Auto,
    None,
    /// The first row holds the abscissae.
    Abscissae,
};

struct IngestOptions {
    HeaderMode header = HeaderMode::Auto;
    bool labels = false;  // first column holds row labels (years, dates)
    char delimiter = ',';
};

struct Dataset {
    RawCurves curves;
    std::vector<std::string> labels;  // empty when the file carries none
    bool abscissae_from_header = false;
    bool rescaled = false;            // header abscissae mapped affinely onto [0,1]
    double abscissa_min = 0.0;        // range before rescaling
    double abscissa_max = 1.0;
};

Dataset ingest_csv(std::istream& in, const IngestOptions& options = {});
Dataset ingest_csv_file(const std::string& path, const IngestOptions& options = {});

}  // namespace fdcp
