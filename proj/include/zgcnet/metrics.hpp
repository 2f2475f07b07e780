#pragma once

// Distances between persistence diagrams and between persistence images.

#include <utility>
#include <vector>

#include "zgcnet/zigzag.hpp"
#include "zgcnet/zpi.hpp"

namespace zgcnet {

struct DiagramPoint {
    double birth = 0.0;
    double death = 0.0;
};

std::vector<DiagramPoint> diagram_points(const ZPD& zpd, int dim);

/// A pair (i, j): i indexes the first diagram, j the second; kDiagonal marks a diagonal partner.
struct MatchingResult {
    static constexpr int kDiagonal = -1;
    double cost = 0.0;
    std::vector<std::pair<int, int>> pairing;
};

/// L-infinity ground distance between two points.
double ground_distance(const DiagramPoint& a, const DiagramPoint& b);
/// Distance from a point to its diagonal projection, (d - b) / 2.
double diagonal_distance(const DiagramPoint& a);

/// Wasserstein-1 distance, solved exactly as an assignment problem on the
/// diagonally augmented (n1 + n2) x (n1 + n2) cost matrix.
MatchingResult wasserstein1(const std::vector<DiagramPoint>& d1, const std::vector<DiagramPoint>& d2);

/// Minimum-cost perfect assignment (Hungarian method with potentials); returns column of each row.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

/// Largest absolute pixel difference; grids must share a spec.
double linf_distance(const ZPIGrid& a, const ZPIGrid& b);

}  // namespace zgcnet
