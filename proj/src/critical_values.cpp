#include "fdcp/critical_values.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fdcp/error.hpp"
#include "fdcp/parallel.hpp"
#include "fdcp/random.hpp"

namespace fdcp {

namespace {

// Alphas are compared after rounding so that 0.05 parsed from text matches
// 0.05 written in code.
double alpha_key(double alpha) { return std::round(alpha * 1e9) / 1e9; }

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string format_short(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%g", value);
    return buffer;
}

constexpr char kCacheMagic[8] = {'F', 'D', 'C', 'P', 'L', 'I', 'M', '1'};

}  // namespace

void CriticalValueTable::set(std::size_t d, double alpha, double value) {
    m_entries[{d, alpha_key(alpha)}] = value;
}

bool CriticalValueTable::contains(std::size_t d, double alpha) const {
    return m_entries.count({d, alpha_key(alpha)}) > 0;
}

double CriticalValueTable::at(std::size_t d, double alpha) const {
    const auto it = m_entries.find({d, alpha_key(alpha)});
    if (it == m_entries.end()) {
        throw Error(ErrorKind::TableMiss, "no critical value for d=" + std::to_string(d) +
                                              ", alpha=" + format_short(alpha));
    }
    return it->second;
}

void CriticalValueTable::set_sample(std::size_t d, std::vector<double> draws) {
    std::sort(draws.begin(), draws.end());
    m_samples[d] = std::move(draws);
}

const std::vector<double>* CriticalValueTable::sample(std::size_t d) const {
    const auto it = m_samples.find(d);
    return it == m_samples.end() ? nullptr : &it->second;
}

std::vector<std::size_t> CriticalValueTable::dimensions() const {
    std::vector<std::size_t> out;
    for (const auto& [key, value] : m_entries) {
        if (out.empty() || out.back() != key.first) {
            out.push_back(key.first);
        }
    }
    return out;
}

void CriticalValueTable::write_csv(std::ostream& out) const {
    if (provenance.source == TableProvenance::Source::Simulated) {
        out << "# simulated reps=" << provenance.reps << " bridge_grid=" << provenance.bridge_grid
            << " seed=" << provenance.seed << '\n';
    } else {
        out << "# user-supplied\n";
    }
    out << "d,alpha,critical_value\n";
    for (const auto& [key, value] : m_entries) {
        out << key.first << ',' << format_double(key.second) << ',' << format_double(value) << '\n';
    }
}

CriticalValueTable CriticalValueTable::read_csv(std::istream& in) {
    CriticalValueTable table;
    table.provenance.source = TableProvenance::Source::UserSupplied;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            std::istringstream meta(line.substr(1));
            std::string word;
            while (meta >> word) {
                const auto eq = word.find('=');
                if (word == "simulated") {
                    table.provenance.source = TableProvenance::Source::Simulated;
                } else if (eq != std::string::npos) {
                    const std::string key = word.substr(0, eq);
                    const std::uint64_t value = std::strtoull(word.c_str() + eq + 1, nullptr, 10);
                    if (key == "reps") {
                        table.provenance.reps = value;
                    } else if (key == "bridge_grid") {
                        table.provenance.bridge_grid = value;
                    } else if (key == "seed") {
                        table.provenance.seed = value;
                    }
                }
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("d,", 0) == 0) {
                continue;
            }
        }
        std::istringstream fields(line);
        std::string d_text;
        std::string alpha_text;
        std::string value_text;
        if (!std::getline(fields, d_text, ',') || !std::getline(fields, alpha_text, ',') ||
            !std::getline(fields, value_text)) {
            throw Error(ErrorKind::ParseError, "critical value table row " + std::to_string(row) +
                                                   " needs three fields");
        }
        try {
            table.set(std::stoul(d_text), std::stod(alpha_text), std::stod(value_text));
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::ParseError, "critical value table row " + std::to_string(row) +
                                                   " is not numeric");
        }
    }
    return table;
}

std::vector<std::vector<double>> simulate_limit_draws(std::size_t d_max, std::size_t reps,
                                                      std::size_t bridge_grid, std::uint64_t seed,
                                                      std::size_t threads) {
    if (d_max < 1 || reps < 1 || bridge_grid < 2) {
        throw Error(ErrorKind::InvalidArgument, "limit simulation needs d >= 1, reps >= 1 and grid >= 2");
    }
    std::vector<std::vector<double>> draws(d_max, std::vector<double>(reps));
    const double h = 1.0 / static_cast<double>(bridge_grid - 1);
    const double step = std::sqrt(h);
    parallel_blocks(reps, threads, [&](std::size_t first, std::size_t last) {
        std::vector<double> walk(bridge_grid);
        std::normal_distribution<double> normal;
        for (std::size_t r = first; r < last; ++r) {
            Rng rng = stream_rng(seed, r);
            double cumulative = 0.0;
            for (std::size_t l = 0; l < d_max; ++l) {
                walk[0] = 0.0;
                for (std::size_t j = 1; j < bridge_grid; ++j) {
                    walk[j] = walk[j - 1] + step * normal(rng);
                }
                const double end = walk[bridge_grid - 1];
                // Bridge endpoints are zero, so the trapezoid sum is h Σ B_j².
                double integral = 0.0;
                for (std::size_t j = 1; j + 1 < bridge_grid; ++j) {
                    const double bridge = walk[j] - static_cast<double>(j) * h * end;
                    integral += bridge * bridge;
                }
                cumulative += h * integral;
                draws[l][r] = cumulative;
            }
        }
    });
    return draws;
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
    }
    const double position = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(position));
    const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
    const double fraction = position - static_cast<double>(lower);
    return sorted[lower] + fraction * (sorted[upper] - sorted[lower]);
}

namespace {

CriticalValueTable table_from_draws(std::vector<std::vector<double>> draws, const std::vector<double>& alphas,
                                    std::size_t reps, std::size_t bridge_grid, std::uint64_t seed) {
    CriticalValueTable table;
    table.provenance = {TableProvenance::Source::Simulated, reps, bridge_grid, seed};
    for (std::size_t l = 0; l < draws.size(); ++l) {
        std::sort(draws[l].begin(), draws[l].end());
        for (double alpha : alphas) {
            if (!(alpha > 0.0 && alpha < 1.0)) {
                throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
            }
            table.set(l + 1, alpha, empirical_quantile(draws[l], 1.0 - alpha));
        }
        table.set_sample(l + 1, std::move(draws[l]));
    }
    return table;
}

}  // namespace

CriticalValueTable limit_quantiles(std::size_t d_max, const std::vector<double>& alphas, std::size_t reps,
                                   std::size_t bridge_grid, std::uint64_t seed, std::size_t threads) {
    return table_from_draws(simulate_limit_draws(d_max, reps, bridge_grid, seed, threads), alphas, reps,
                            bridge_grid, seed);
}

double p_value(double statistic, const CriticalValueTable& table, std::size_t d) {
    const std::vector<double>* draws = table.sample(d);
    if (draws == nullptr || draws->empty()) {
        throw Error(ErrorKind::TableMiss, "no retained limit sample for d=" + std::to_string(d));
    }
    const auto at_least = static_cast<double>(draws->end() - std::lower_bound(draws->begin(), draws->end(), statistic));
    return (1.0 + at_least) / (static_cast<double>(draws->size()) + 1.0);
}

CriticalValueTable cached_limit_quantiles(const std::string& cache_dir, std::size_t d_max,
                                          const std::vector<double>& alphas, std::size_t reps,
                                          std::size_t bridge_grid, std::uint64_t seed, std::size_t threads) {
    if (cache_dir.empty()) {
        return limit_quantiles(d_max, alphas, reps, bridge_grid, seed, threads);
    }
    namespace fs = std::filesystem;
    const fs::path path = fs::path(cache_dir) / ("limit_d" + std::to_string(d_max) + "_r" + std::to_string(reps) +
                                                 "_g" + std::to_string(bridge_grid) + "_s" +
                                                 std::to_string(seed) + ".bin");
    std::vector<std::vector<double>> draws;
    {
        std::ifstream in(path, std::ios::binary);
        char magic[8] = {};
        std::uint64_t header[4] = {};
        if (in && in.read(magic, sizeof magic) && std::equal(magic, magic + 8, kCacheMagic) &&
            in.read(reinterpret_cast<char*>(header), sizeof header) && header[0] == d_max && header[1] == reps &&
            header[2] == bridge_grid && header[3] == seed) {
            draws.assign(d_max, std::vector<double>(reps));
            for (auto& column : draws) {
                in.read(reinterpret_cast<char*>(column.data()), static_cast<std::streamsize>(reps * sizeof(double)));
            }
            if (!in) {
                draws.clear();
            }
        }
    }
    if (draws.empty()) {
        draws = simulate_limit_draws(d_max, reps, bridge_grid, seed, threads);
        std::error_code ignored;
        fs::create_directories(cache_dir, ignored);
        const fs::path tmp = path.string() + ".tmp";
        std::ofstream out(tmp, std::ios::binary);
        if (out) {
            const std::uint64_t header[4] = {d_max, reps, bridge_grid, seed};
            out.write(kCacheMagic, sizeof kCacheMagic);
            out.write(reinterpret_cast<const char*>(header), sizeof header);
            for (const auto& column : draws) {
                out.write(reinterpret_cast<const char*>(column.data()),
                          static_cast<std::streamsize>(reps * sizeof(double)));
            }
            out.close();
            fs::rename(tmp, path, ignored);
        }
    }
    return table_from_draws(std::move(draws), alphas, reps, bridge_grid, seed);
}

std::string table_cache_dir_from_env() {
    const char* dir = std::getenv("FDCP_TABLE_CACHE");
    return dir == nullptr ? std::string() : std::string(dir);
}

}  // namespace fdcp
