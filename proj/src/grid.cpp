#include "erds/grid.hpp"

#include "erds/errors.hpp"

#include <cmath>
#include <string>

namespace erds {

Grid::Grid(int dim, int n, Domain domain, double L)
    : dim_(dim), n_(n), domain_(domain), L_(L) {
    if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
    if (n < 8) throw ConfigError("grid needs at least 8 cells per axis");
    if (domain == Domain::box && !(L > 0.0)) throw ConfigError("box half-width must be positive");

    h_ = (domain == Domain::torus ? 1.0 : 2.0 * L) / n;
    vol_ = dim == 1 ? h_ : h_ * h_;
    size_ = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;

    const bool wrap = domain == Domain::torus;
    auto idx = [n](int i, int j) { return static_cast<std::size_t>(j) * n + i; };
    const int ny = dim == 1 ? 1 : n;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n) faces_.push_back({idx(i, j), idx(i + 1, j), 0});
            else if (wrap) faces_.push_back({idx(i, j), idx(0, j), 0});
        }
    }
    if (dim == 2) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                if (j + 1 < n) faces_.push_back({idx(i, j), idx(i, j + 1), 1});
                else if (wrap) faces_.push_back({idx(i, j), idx(i, 0), 1});
            }
        }
    }
}

std::shared_ptr<const Grid> Grid::torus(int dim, int n_cells) {
    return std::shared_ptr<const Grid>(new Grid(dim, n_cells, Domain::torus, 0.5));
}

std::shared_ptr<const Grid> Grid::box(int dim, int n_cells, double half_width) {
    return std::shared_ptr<const Grid>(new Grid(dim, n_cells, Domain::box, half_width));
}

Point Grid::center(std::size_t cell) const {
    const double origin = domain_ == Domain::torus ? 0.0 : -L_;
    const std::size_t i = cell % static_cast<std::size_t>(n_);
    const std::size_t j = cell / static_cast<std::size_t>(n_);
    Point p{origin + (static_cast<double>(i) + 0.5) * h_, 0.0};
    if (dim_ == 2) p[1] = origin + (static_cast<double>(j) + 0.5) * h_;
    return p;
}

void StateField::validate() const {
    if (!grid) throw ArgumentError("state has no grid");
    const auto n = static_cast<Eigen::Index>(grid->size());
    if (e.size() != n) throw ArgumentError("energy field size does not match grid");
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i].size() != n) throw ArgumentError("density field " + std::to_string(i) + " size does not match grid");
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!std::isfinite(u[i][k]) || u[i][k] < 0.0) throw DomainError("density must be finite and non-negative");
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!std::isfinite(e[k]) || e[k] <= 0.0) throw DomainError("energy must be finite and positive");
    }
}

}  // namespace erds
