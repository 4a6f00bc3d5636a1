#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace erds {

using Field = Eigen::VectorXd;
using Point = std::array<double, 2>;

enum class Domain { torus, box };

// Two cells sharing a face, `lo` on the negative side along `axis`.
struct Face {
    std::size_t lo;
    std::size_t hi;
    int axis;
};

// Uniform cell-centred grid on the unit torus [0,1)^d or on the box [-L,L]^d.
class Grid {
public:
    static std::shared_ptr<const Grid> torus(int dim, int n_cells);
    static std::shared_ptr<const Grid> box(int dim, int n_cells, double half_width);

    int dim() const { return dim_; }
    int n_cells() const { return n_; }
    Domain domain() const { return domain_; }
    double half_width() const { return L_; }
    double h() const { return h_; }
    double cell_volume() const { return vol_; }
    std::size_t size() const { return size_; }
    double measure() const { return vol_ * static_cast<double>(size_); }

    Point center(std::size_t cell) const;
    const std::vector<Face>& faces() const { return faces_; }

    // Midpoint rule.
    double integrate(const Field& f) const { return f.sum() * vol_; }
    template <class F>
    Field sample_with(F&& fn) const {
        Field out(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = fn(center(i));
        return out;
    }

private:
    Grid(int dim, int n, Domain domain, double L);

    int dim_;
    int n_;
    Domain domain_;
    double L_;
    double h_;
    double vol_;
    std::size_t size_;
    std::vector<Face> faces_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Discretized (u_1..u_I, e) on a grid.
struct StateField {
    GridPtr grid;
    std::vector<Field> u;
    Field e;

    std::size_t species() const { return u.size(); }
    void validate() const;
};

}  // namespace erds
