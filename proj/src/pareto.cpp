#include "starcco/pareto.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace starcco {

bool dominates(const Objective2& p, const Objective2& q) {
    return p[0] >= q[0] && p[1] >= q[1] && (p[0] > q[0] || p[1] > q[1]);
}

std::vector<std::size_t> pareto_front_indices(std::span<const Objective2> points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j)
            dominated = j != i && dominates(points[j], points[i]);
        if (!dominated) out.push_back(i);
    }
    return out;
}

std::vector<Objective2> pareto_front(std::span<const Objective2> points) {
    std::vector<Objective2> out;
    for (auto i : pareto_front_indices(points)) out.push_back(points[i]);
    return out;
}

bool ParetoArchive::insert(ArchiveEntry e) {
    const Objective2 p = e.point();
    for (const auto& x : entries_)
        if (dominates(x.point(), p)) return false;
    std::erase_if(entries_, [&](const ArchiveEntry& x) { return dominates(p, x.point()); });
    entries_.push_back(std::move(e));
    return true;
}

std::vector<Objective2> ParetoArchive::points() const {
    std::vector<Objective2> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.point());
    return out;
}

bool ParetoArchive::mutually_non_dominated() const {
    for (const auto& a : entries_)
        for (const auto& b : entries_)
            if (dominates(a.point(), b.point())) return false;
    return true;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void ParetoArchive::write_csv(std::ostream& os) const {
    os << "coverage,capacity,strategy,seed,preference,config_hash\n";
    for (const auto& e : entries_)
        os << format_number(e.coverage) << ',' << format_number(e.capacity) << ',' << e.strategy << ',' << e.seed
           << ',' << e.preference << ',' << e.config_hash << '\n';
}

ParetoArchive ParetoArchive::read_csv(std::istream& is) {
    ParetoArchive a;
    std::string line;
    if (!std::getline(is, line)) return a;
    if (line.rfind("coverage,capacity", 0) != 0) throw std::invalid_argument("not an archive file, header: " + line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() < 2) throw std::invalid_argument("archive row needs coverage and capacity: " + line);
        ArchiveEntry e;
        e.coverage = std::stod(f[0]);
        e.capacity = std::stod(f[1]);
        if (f.size() > 2) e.strategy = f[2];
        if (f.size() > 3) e.seed = std::stoull(f[3]);
        if (f.size() > 4) e.preference = f[4];
        if (f.size() > 5) e.config_hash = f[5];
        a.entries_.push_back(std::move(e));
    }
    return a;
}

} // namespace starcco
