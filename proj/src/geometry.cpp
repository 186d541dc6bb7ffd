#include "starcco/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace starcco {

namespace {

void require_thresholds_defined(double grid_side, double side_length) {
    if (!(grid_side > 0.0) || !(side_length > 0.0))
        throw InvalidArgument("grid side and serving side must be positive");
    if (!(2.0 * side_length > grid_side))
        throw InvalidArgument("indicator threshold undefined for 2Rs <= Rg");
}

} // namespace

GridMap build_grid(double side_length, double grid_side, double bs_height,
                   std::vector<RisPlacement> placements) {
    if (!(side_length > 0.0)) throw InvalidArgument("Rs must be positive");
    if (!(grid_side > 0.0)) throw InvalidArgument("Rg must be positive");
    if (grid_side > side_length) throw InvalidArgument("Rg must not exceed Rs");
    if (!(bs_height > 0.0)) throw InvalidArgument("BS height must be positive");

    for (std::size_t i = 0; i < placements.size(); ++i) {
        const auto& p = placements[i];
        if (!(p.x > 0.0 && p.x < side_length && p.y > 0.0 && p.y < side_length))
            throw InvalidArgument("surface " + std::to_string(i) + " lies outside the serving area");
        if (!(p.height > 0.0) || !(p.width > 0.0))
            throw InvalidArgument("surface " + std::to_string(i) + " must have positive height and width");
        for (std::size_t j = 0; j < i; ++j) {
            if (placements[j].x == p.x && placements[j].y == p.y)
                throw InvalidArgument("surfaces " + std::to_string(j) + " and " + std::to_string(i) +
                                      " overlap");
        }
    }

    GridMap g;
    g.side_length = side_length;
    g.grid_side = grid_side;
    g.bs_height = bs_height;
    g.per_side = static_cast<std::size_t>(std::ceil(side_length / grid_side));
    g.n_points = g.per_side * g.per_side;
    g.sample_points.reserve(g.n_points);
    for (std::size_t row = 0; row < g.per_side; ++row)
        for (std::size_t col = 0; col < g.per_side; ++col)
            g.sample_points.push_back({(static_cast<double>(row) + 0.5) * grid_side,
                                       (static_cast<double>(col) + 0.5) * grid_side, 0.0});
    g.bs_positions = {Vec3{side_length, 0.0, bs_height}, Vec3{side_length, side_length, bs_height}};
    g.ris = std::move(placements);
    return g;
}

double height_threshold(double grid_side, double bs_height, double side_length) {
    require_thresholds_defined(grid_side, side_length);
    if (!(bs_height > 0.0)) throw InvalidArgument("BS height must be positive");
    return grid_side * bs_height / (2.0 * side_length - grid_side);
}

double width_threshold(double grid_side, double side_length) {
    require_thresholds_defined(grid_side, side_length);
    return grid_side * side_length / (2.0 * side_length - grid_side);
}

bool height_indicator(double ris_height, double grid_side, double bs_height, double side_length) {
    if (!(ris_height > 0.0)) throw InvalidArgument("surface height must be positive");
    return ris_height <= height_threshold(grid_side, bs_height, side_length);
}

bool width_indicator(double ris_width, double grid_side, double side_length) {
    if (!(ris_width > 0.0)) throw InvalidArgument("surface width must be positive");
    return ris_width <= width_threshold(grid_side, side_length);
}

bool link_indicator(bool height, bool width) { return height || width; }

LinkIndicators indicators_for(const RisPlacement& ris, const GridMap& grid) {
    LinkIndicators ind;
    ind.height = height_indicator(ris.height, grid.grid_side, grid.bs_height, grid.side_length);
    ind.width = width_indicator(ris.width, grid.grid_side, grid.side_length);
    ind.link = link_indicator(ind.height, ind.width);
    return ind;
}

Vec3 element_position(std::size_t k, std::size_t k_h, std::size_t k_total, double m_h, double m_v) {
    if (k_h == 0) throw InvalidArgument("elements per row must be positive");
    if (k < 1 || k > k_total) throw InvalidArgument("element index out of range");
    const auto col = (k - 1) % k_h;
    const auto row = (k - 1) / k_h;
    return {0.0, static_cast<double>(col) * m_h, static_cast<double>(row) * m_v};
}

std::vector<Vec3> element_positions(std::size_t k_h, std::size_t k_v, double m_h, double m_v) {
    const std::size_t total = k_h * k_v;
    std::vector<Vec3> out;
    out.reserve(total);
    for (std::size_t k = 1; k <= total; ++k) out.push_back(element_position(k, k_h, total, m_h, m_v));
    return out;
}

bool direct_path_clear(const Vec3& bs, const Vec3& point, const RisPlacement& ris) {
    const double dx = point.x - bs.x;
    if (dx == 0.0) return true;  // path parallel to the surface plane
    const double t = (ris.x - bs.x) / dx;
    if (t < 0.0 || t > 1.0) return true;
    const double y_cross = bs.y + t * (point.y - bs.y);
    return std::abs(y_cross - ris.y) > 0.5 * ris.width;
}

} // namespace starcco
