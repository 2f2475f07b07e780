#pragma once

// Zigzag persistence images: a ZPD in birth-persistence coordinates, smoothed
// by weighted Gaussians and integrated over the pixels of a regular grid.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "zgcnet/zigzag.hpp"

namespace zgcnet {

struct BirthPersistence {
    double birth = 0.0;
    double persistence = 0.0;
};

/// (b, d) -> (b, d - b) for points of homology dimension `dim`.
std::vector<BirthPersistence> transform_diagram(const ZPD& zpd, int dim);

struct Domain {
    double x_lo = 0.0, x_hi = 1.0;  // birth
    double y_lo = 0.0, y_hi = 1.0;  // persistence

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    friend bool operator==(const Domain&, const Domain&) = default;
};

/// [1, T] x [0, T-1], each extent floored at one time unit.
Domain default_domain(int window_length);

enum class WeightingKind { LinearPersistence, Constant };

struct WeightingSpec {
    WeightingKind kind = WeightingKind::LinearPersistence;
    double cap = 1.0;

    double operator()(const BirthPersistence& mu) const;
};

struct GridSpec {
    int resolution = 100;
    Domain domain;
    double theta = 0.02;

    /// Default domain for the window, bandwidth = 2 * width / resolution.
    static GridSpec for_window(int window_length, int resolution = 100);
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Linear weighting capped at the domain height.
WeightingSpec default_weighting(const GridSpec& spec);

class ZPIGrid {
public:
    explicit ZPIGrid(GridSpec spec);

    const GridSpec& spec() const noexcept { return spec_; }
    int resolution() const noexcept { return spec_.resolution; }
    /// Row = persistence bin (ascending), column = birth bin (ascending).
    double& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * spec_.resolution + col]; }
    double at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * spec_.resolution + col]; }
    std::vector<double>& pixels() noexcept { return pixels_; }
    const std::vector<double>& pixels() const noexcept { return pixels_; }
    double sum() const;
    double max() const;

private:
    GridSpec spec_;
    std::vector<double> pixels_;
};

/// Sum over points of g(mu) times the integral of exp(-|z - mu|^2 / (2 theta^2)) over each pixel box.
ZPIGrid render_zpi(const std::vector<BirthPersistence>& points, const GridSpec& spec, const WeightingSpec& w);

/// Header `p x_lo x_hi y_lo y_hi theta`, then p rows of p values (row 0 = lowest persistence).
void write_zpi(std::ostream& os, const ZPIGrid& grid);
ZPIGrid read_zpi(std::istream& is);

/// 8-bit binary PGM scaled to the grid maximum, highest persistence on top.
void write_pgm(std::ostream& os, const ZPIGrid& grid);

}  // namespace zgcnet
