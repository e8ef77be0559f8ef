#include "qla/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "qla/errors.hpp"

namespace qla {

CubeGrid::CubeGrid(double edge, int dim) : a(edge), d(dim) {
    if (!(edge > 0)) throw PreconditionError("cube edge must be positive");
    if (dim < 1 || dim > kMaxDim) throw PreconditionError("dimension must be 1, 2 or 3");
}

double CubeGrid::cube_volume() const { return std::pow(a, d); }

Point CubeGrid::corner(const CubeIndex& r) const {
    Point p{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) p[i] = a * (static_cast<double>(r[i]) - 0.5);
    return p;
}

CubeIndex cube_of(const CubeGrid& grid, const Point& x) {
    CubeIndex r{0, 0, 0};
    for (int i = 0; i < grid.d; ++i) r[i] = static_cast<std::int64_t>(std::floor(x[i] / grid.a + 0.5));
    return r;
}

Region::Region(const CubeGrid& grid, std::vector<CubeIndex> cubes) : grid_(grid), cubes_(std::move(cubes)) {
    for (auto& c : cubes_)
        for (int i = grid_.d; i < kMaxDim; ++i)
            if (c[i] != 0) throw PreconditionError("cube index has nonzero unused coordinate");
    std::sort(cubes_.begin(), cubes_.end());
    if (std::adjacent_find(cubes_.begin(), cubes_.end()) != cubes_.end())
        throw PreconditionError("region lists a cube twice");
}

Region Region::box(const CubeGrid& grid, const std::vector<std::int64_t>& n) {
    if (static_cast<int>(n.size()) != grid.d) throw PreconditionError("box extent does not match dimension");
    std::array<std::int64_t, kMaxDim> ext{1, 1, 1};
    for (int i = 0; i < grid.d; ++i) {
        if (n[i] < 1) throw PreconditionError("box extent must be positive");
        ext[i] = n[i];
    }
    std::vector<CubeIndex> cubes;
    for (std::int64_t i = 0; i < ext[0]; ++i)
        for (std::int64_t j = 0; j < ext[1]; ++j)
            for (std::int64_t k = 0; k < ext[2]; ++k) cubes.push_back({i, j, k});
    Region r(grid, std::move(cubes));
    r.is_box_ = true;
    r.box_n_ = ext;
    return r;
}

long Region::slot(const CubeIndex& r) const {
    if (is_box_) {
        long s = 0;
        for (int i = 0; i < kMaxDim; ++i) {
            if (r[i] < 0 || r[i] >= box_n_[i]) return -1;
            s = s * box_n_[i] + r[i];
        }
        return s;
    }
    auto it = std::lower_bound(cubes_.begin(), cubes_.end(), r);
    if (it == cubes_.end() || *it != r) return -1;
    return it - cubes_.begin();
}

std::map<CubeIndex, int> occupancy(const CubeGrid& grid, const Configuration& gamma) {
    std::map<CubeIndex, int> m;
    for (const auto& x : gamma) ++m[cube_of(grid, x)];
    return m;
}

int chi_minus(const Region& region, const Configuration& gamma) {
    std::vector<long> slots;
    slots.reserve(gamma.size());
    for (const auto& x : gamma) {
        long s = region.slot_of_point(x);
        if (s >= 0) slots.push_back(s);
    }
    std::sort(slots.begin(), slots.end());
    return std::adjacent_find(slots.begin(), slots.end()) == slots.end() ? 1 : 0;
}

const char* occupancy_name(Occupancy o) {
    switch (o) {
        case Occupancy::dilute: return "dilute";
        case Occupancy::dense: return "dense";
        case Occupancy::mixed: return "mixed";
    }
    return "?";
}

Occupancy classify(const Region& region, const Configuration& gamma) {
    for (const auto& x : gamma)
        if (!region.contains(x)) throw PreconditionError("point outside region");
    bool any_single = false, any_multi = false;
    for (const auto& [cube, n] : occupancy(region.grid(), gamma)) (n == 1 ? any_single : any_multi) = true;
    if (!any_multi) return Occupancy::dilute;
    return any_single ? Occupancy::mixed : Occupancy::dense;
}

CubeSubsets::CubeSubsets(const Region& region, int k) : region_(&region), k_(k) {
    if (k < 0 || static_cast<std::size_t>(k) > region.size()) done_ = true;
}

bool CubeSubsets::next_slots(std::vector<int>& out) {
    if (done_) return false;
    const int n = static_cast<int>(region_->size());
    if (!started_) {
        started_ = true;
        idx_.resize(k_);
        for (int i = 0; i < k_; ++i) idx_[i] = i;
    } else {
        int i = k_ - 1;
        while (i >= 0 && idx_[i] == n - k_ + i) --i;
        if (i < 0) {
            done_ = true;
            return false;
        }
        ++idx_[i];
        for (int j = i + 1; j < k_; ++j) idx_[j] = idx_[j - 1] + 1;
    }
    out = idx_;
    return true;
}

bool CubeSubsets::next(CubeConfiguration& out) {
    std::vector<int> s;
    if (!next_slots(s)) return false;
    out.clear();
    for (int i : s) out.push_back(region_->cubes()[i]);
    return true;
}

}  // namespace qla
