#include "zgcnet/zpi.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "zgcnet/error.hpp"

namespace zgcnet {

std::vector<BirthPersistence> transform_diagram(const ZPD& zpd, int dim) {
    std::vector<BirthPersistence> out;
    for (const auto& p : zpd.points_of(dim)) out.push_back({p.birth.value(), p.death.value() - p.birth.value()});
    return out;
}

Domain default_domain(int window_length) {
    if (window_length < 1) throw InvalidInput("window length must be at least 1");
    const double t = window_length;
    return {1.0, std::max(t, 2.0), 0.0, std::max(t - 1.0, 1.0)};
}

double WeightingSpec::operator()(const BirthPersistence& mu) const {
    if (kind == WeightingKind::Constant) return 1.0;
    return std::clamp(mu.persistence, 0.0, cap);
}

GridSpec GridSpec::for_window(int window_length, int resolution) {
    if (resolution < 1) throw InvalidInput("resolution must be at least 1");
    GridSpec s;
    s.resolution = resolution;
    s.domain = default_domain(window_length);
    s.theta = 2.0 * s.domain.width() / resolution;
    return s;
}

WeightingSpec default_weighting(const GridSpec& spec) {
    return {WeightingKind::LinearPersistence, spec.domain.height()};
}

ZPIGrid::ZPIGrid(GridSpec spec) : spec_(spec) {
    if (spec_.resolution < 1) throw InvalidInput("resolution must be at least 1");
    if (!(spec_.theta > 0.0) || !std::isfinite(spec_.theta)) throw InvalidInput("bandwidth must be positive");
    if (!(spec_.domain.width() > 0.0) || !(spec_.domain.height() > 0.0))
        throw InvalidInput("ZPI domain must have positive extent");
    pixels_.assign(static_cast<std::size_t>(spec_.resolution) * spec_.resolution, 0.0);
}

double ZPIGrid::sum() const { return std::accumulate(pixels_.begin(), pixels_.end(), 0.0); }

double ZPIGrid::max() const { return *std::max_element(pixels_.begin(), pixels_.end()); }

namespace {

// Integrals of exp(-(x - c)^2 / (2 theta^2)) over each of the p bins of [lo, hi].
void axis_integrals(double c, double lo, double hi, int p, double theta, std::vector<double>& out) {
    const double scale = theta * std::sqrt(std::acos(-1.0) / 2.0);
    const double inv = 1.0 / (std::sqrt(2.0) * theta);
    const double step = (hi - lo) / p;
    out.resize(p);
    double prev = std::erf((lo - c) * inv);
    for (int i = 0; i < p; ++i) {
        const double edge = i + 1 == p ? hi : lo + step * (i + 1);
        const double next = std::erf((edge - c) * inv);
        out[i] = scale * (next - prev);
        prev = next;
    }
}

}  // namespace

ZPIGrid render_zpi(const std::vector<BirthPersistence>& points, const GridSpec& spec, const WeightingSpec& w) {
    ZPIGrid grid(spec);
    const int p = spec.resolution;
    std::vector<double> fx, fy;
    for (const auto& mu : points) {
        if (!std::isfinite(mu.birth) || !std::isfinite(mu.persistence))
            throw InvalidInput("diagram point is not finite");
        const double g = w(mu);
        if (g == 0.0) continue;
        axis_integrals(mu.birth, spec.domain.x_lo, spec.domain.x_hi, p, spec.theta, fx);
        axis_integrals(mu.persistence, spec.domain.y_lo, spec.domain.y_hi, p, spec.theta, fy);
        for (int r = 0; r < p; ++r) {
            const double gy = g * fy[r];
            if (gy == 0.0) continue;
            double* row = &grid.at(r, 0);
            for (int c = 0; c < p; ++c) row[c] += gy * fx[c];
        }
    }
    return grid;
}

void write_zpi(std::ostream& os, const ZPIGrid& grid) {
    const auto& s = grid.spec();
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << s.resolution << ' ' << s.domain.x_lo << ' ' << s.domain.x_hi << ' ' << s.domain.y_lo << ' '
       << s.domain.y_hi << ' ' << s.theta << '\n';
    for (int r = 0; r < s.resolution; ++r) {
        for (int c = 0; c < s.resolution; ++c) os << (c ? " " : "") << grid.at(r, c);
        os << '\n';
    }
}

ZPIGrid read_zpi(std::istream& is) {
    GridSpec s;
    if (!(is >> s.resolution >> s.domain.x_lo >> s.domain.x_hi >> s.domain.y_lo >> s.domain.y_hi >> s.theta))
        throw ParseError(1, "expected header `p x_lo x_hi y_lo y_hi theta`");
    ZPIGrid grid(s);
    for (int r = 0; r < s.resolution; ++r)
        for (int c = 0; c < s.resolution; ++c)
            if (!(is >> grid.at(r, c))) throw ParseError(static_cast<std::size_t>(r) + 2, "missing pixel value");
    return grid;
}

void write_pgm(std::ostream& os, const ZPIGrid& grid) {
    const int p = grid.resolution();
    const double top = grid.max();
    os << "P5\n" << p << ' ' << p << "\n255\n";
    std::string row(static_cast<std::size_t>(p), '\0');
    for (int r = p - 1; r >= 0; --r) {
        for (int c = 0; c < p; ++c) {
            const double v = top > 0.0 ? grid.at(r, c) / top : 0.0;
            row[c] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
        }
        os.write(row.data(), p);
    }
}

}  // namespace zgcnet
