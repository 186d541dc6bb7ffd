#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "starcco/common.hpp"

namespace starcco {

/// A STAR-RIS module standing on the ground plane. The surface lies in the
/// plane x = position.x and extends `width` meters along y, centred on
/// position.y. Thickness is ignored.
struct RisPlacement {
    double x{0.0};
    double y{0.0};
    double height{1.0};
    double width{1.0};

    Vec3 reference_point() const { return {x, y, height}; }
    friend bool operator==(const RisPlacement&, const RisPlacement&) = default;
};

struct LinkIndicators {
    bool height{false};  // I_h
    bool width{false};   // I_w
    bool link{false};    // I_ns = I_h OR I_w
};

/// Discretised square serving area with two corner base stations.
///
/// Sample point i sits at the centre of grid cell (row, col) with
/// i = row * per_side + col, i.e. ((row + 0.5) Rg, (col + 0.5) Rg, 0).
struct GridMap {
    double side_length{0.0};  // Rs
    double grid_side{0.0};    // Rg
    double bs_height{0.0};    // h_b
    std::size_t per_side{0};
    std::size_t n_points{0};
    std::vector<Vec3> sample_points;
    std::array<Vec3, 2> bs_positions{};
    std::vector<RisPlacement> ris;

    std::size_t n_ris() const { return ris.size(); }
};

GridMap build_grid(double side_length, double grid_side, double bs_height,
                   std::vector<RisPlacement> placements);

/// Height threshold Rg*h_b/(2Rs - Rg) below which the direct link passes over a surface.
double height_threshold(double grid_side, double bs_height, double side_length);
/// Width threshold Rg*Rs/(2Rs - Rg) below which the direct link passes beside a surface.
double width_threshold(double grid_side, double side_length);

bool height_indicator(double ris_height, double grid_side, double bs_height, double side_length);
bool width_indicator(double ris_width, double grid_side, double side_length);
bool link_indicator(bool height, bool width);

LinkIndicators indicators_for(const RisPlacement& ris, const GridMap& grid);

/// Position of element k (1-based) on a surface with k_h elements per row
/// and element pitch (m_h, m_v): [0, mod(k-1, k_h) m_h, floor((k-1)/k_h) m_v].
Vec3 element_position(std::size_t k, std::size_t k_h, std::size_t k_total, double m_h, double m_v);

std::vector<Vec3> element_positions(std::size_t k_h, std::size_t k_v, double m_h, double m_v);

/// True when the ground projection of the segment BS -> point does not cross
/// the surface footprint. Used for the side-passing direct link of a tall,
/// narrow surface.
bool direct_path_clear(const Vec3& bs, const Vec3& point, const RisPlacement& ris);

} // namespace starcco
