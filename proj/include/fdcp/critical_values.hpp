#pragma once

// Critical values of the null limit ∫₀¹ Σ_{l≤d} B_l(u)² du, B_l independent
// Brownian bridges, estimated by Monte Carlo.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fdcp {

struct TableProvenance {
    enum class Source { Simulated, UserSupplied };
    Source source = Source::Simulated;
    std::size_t reps = 0;
    std::size_t bridge_grid = 0;
    std::uint64_t seed = 0;

    bool operator==(const TableProvenance&) const = default;
};

class CriticalValueTable {
public:
    CriticalValueTable() = default;

    void set(std::size_t d, double alpha, double value);
    bool contains(std::size_t d, double alpha) const;
    /// Throws table-miss when the entry is absent.
    double at(std::size_t d, double alpha) const;

    /// Sorted limit draws kept for p-values.
    void set_sample(std::size_t d, std::vector<double> draws);
    const std::vector<double>* sample(std::size_t d) const;

    const std::map<std::pair<std::size_t, double>, double>& entries() const noexcept { return m_entries; }
    std::vector<std::size_t> dimensions() const;

    TableProvenance provenance;

    /// CSV with header `d,alpha,critical_value`.
    void write_csv(std::ostream& out) const;
    static CriticalValueTable read_csv(std::istream& in);

private:
    std::map<std::pair<std::size_t, double>, double> m_entries;
    std::map<std::size_t, std::vector<double>> m_samples;
};

/// One draw per column d = 1..d_max: the integrated squared bridge sums
/// share their first d bridges, so each row is increasing in d.
std::vector<std::vector<double>> simulate_limit_draws(std::size_t d_max, std::size_t reps,
                                                      std::size_t bridge_grid, std::uint64_t seed,
                                                      std::size_t threads = 1);

/// Empirical (1 - alpha) quantiles for d = 1..d_max and every alpha, with
/// the draws retained for p-values.
CriticalValueTable limit_quantiles(std::size_t d_max, const std::vector<double>& alphas, std::size_t reps,
                                   std::size_t bridge_grid = 1000, std::uint64_t seed = 1,
                                   std::size_t threads = 1);

/// Linear-interpolation quantile of sorted data at probability p.
double empirical_quantile(const std::vector<double>& sorted, double p);

/// (1 + #{draws >= statistic}) / (reps + 1).
double p_value(double statistic, const CriticalValueTable& table, std::size_t d);

/// Disk cache keyed by (d_max, reps, bridge grid, seed). Returns a cached
/// table when present, otherwise simulates and stores it.
CriticalValueTable cached_limit_quantiles(const std::string& cache_dir, std::size_t d_max,
                                          const std::vector<double>& alphas, std::size_t reps,
                                          std::size_t bridge_grid, std::uint64_t seed, std::size_t threads = 1);

/// Directory from FDCP_TABLE_CACHE, empty when unset.
std::string table_cache_dir_from_env();

}  // namespace fdcp
