#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "starcco/common.hpp"

namespace starcco {

/// p dominates q when p >= q in both objectives and p > q in at least one (maximization).
bool dominates(const Objective2& p, const Objective2& q);

/// Indices of the points not dominated by any other point, in input order.
std::vector<std::size_t> pareto_front_indices(std::span<const Objective2> points);
std::vector<Objective2> pareto_front(std::span<const Objective2> points);

struct ArchiveEntry {
    double coverage{0.0};
    double capacity{0.0};
    std::string strategy;
    std::uint64_t seed{0};
    std::string preference;  // "w_cov:w_cap" or empty
    std::string config_hash;

    Objective2 point() const { return {coverage, capacity}; }
};

/// Mutually non-dominated set of outcomes.
class ParetoArchive {
public:
    /// Adds e unless an existing entry dominates it; evicts entries e dominates.
    bool insert(ArchiveEntry e);
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    std::vector<Objective2> points() const;
    bool mutually_non_dominated() const;
    std::size_t size() const { return entries_.size(); }

    void write_csv(std::ostream& os) const;
    static ParetoArchive read_csv(std::istream& is);

private:
    std::vector<ArchiveEntry> entries_;
};

/// Fixed-precision decimal rendering used by every CSV writer.
std::string format_number(double v);

} // namespace starcco
