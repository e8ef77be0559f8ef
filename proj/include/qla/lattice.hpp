#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace qla {

inline constexpr int kMaxDim = 3;

// Unused trailing coordinates are zero.
using Point = std::array<double, kMaxDim>;
using CubeIndex = std::array<std::int64_t, kMaxDim>;
using Configuration = std::vector<Point>;
using CubeConfiguration = std::vector<CubeIndex>;

inline double dist2(const Point& x, const Point& y) {
    double s = 0.0;
    for (int i = 0; i < kMaxDim; ++i) {
        double t = x[i] - y[i];
        s += t * t;
    }
    return s;
}

struct CubeGrid {
    double a = 1.0;
    int d = 1;

    CubeGrid() = default;
    CubeGrid(double edge, int dim);
    double cube_volume() const;
    // Lower corner of cube r.
    Point corner(const CubeIndex& r) const;
};

CubeIndex cube_of(const CubeGrid& grid, const Point& x);

// A finite union of cubes, stored as a sorted index set.
class Region {
public:
    Region() = default;
    Region(const CubeGrid& grid, std::vector<CubeIndex> cubes);
    // Cubes 0..n_i-1 along each axis.
    static Region box(const CubeGrid& grid, const std::vector<std::int64_t>& n);

    const CubeGrid& grid() const { return grid_; }
    const std::vector<CubeIndex>& cubes() const { return cubes_; }
    std::size_t size() const { return cubes_.size(); }
    double volume() const { return static_cast<double>(cubes_.size()) * grid_.cube_volume(); }
    // Position of cube r in cubes(), or -1.
    long slot(const CubeIndex& r) const;
    long slot_of_point(const Point& x) const { return slot(cube_of(grid_, x)); }
    bool contains(const Point& x) const { return slot_of_point(x) >= 0; }

private:
    CubeGrid grid_;
    std::vector<CubeIndex> cubes_;
    bool is_box_ = false;
    std::array<std::int64_t, kMaxDim> box_n_{1, 1, 1};
};

std::map<CubeIndex, int> occupancy(const CubeGrid& grid, const Configuration& gamma);

// 1 iff every cube of the region holds at most one point of gamma.
int chi_minus(const Region& region, const Configuration& gamma);

enum class Occupancy { dilute, dense, mixed };
const char* occupancy_name(Occupancy o);

// Throws PreconditionError when a point lies outside the region.
Occupancy classify(const Region& region, const Configuration& gamma);

// Restartable enumeration of the k-subsets of a region's cubes in
// lexicographic order of cube slots.
class CubeSubsets {
public:
    CubeSubsets(const Region& region, int k);
    // Fills `out` with the next subset; returns false when exhausted.
    bool next(CubeConfiguration& out);
    // Slot-index form of the same enumeration.
    bool next_slots(std::vector<int>& out);

private:
    const Region* region_;
    int k_;
    std::vector<int> idx_;
    bool started_ = false;
    bool done_ = false;
};

}  // namespace qla
