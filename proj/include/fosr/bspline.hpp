#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "fosr/errors.hpp"

namespace fosr {

/// K B-spline basis functions of a given order on a closed interval,
/// defined by a clamped knot vector with equally spaced interior knots.
struct BasisSystem {
    std::size_t K = 0;
    std::size_t order = 0;  // degree + 1
    std::vector<double> knots;
    std::pair<double, double> domain{0.0, 1.0};
};

inline BasisSystem build_bspline_basis(std::size_t K, std::size_t order,
                                       std::pair<double, double> domain) {
    if (order < 1) throw InsufficientBasisCount("order must be at least 1");
    if (K < order)
        throw InsufficientBasisCount("need K >= order, got K=" + std::to_string(K) +
                                     " order=" + std::to_string(order));
    if (!(domain.second > domain.first))
        throw DomainViolation("degenerate basis domain");

    BasisSystem basis;
    basis.K = K;
    basis.order = order;
    basis.domain = domain;
    basis.knots.reserve(K + order);
    const std::size_t n_interior = K - order;
    for (std::size_t i = 0; i < order; ++i) basis.knots.push_back(domain.first);
    for (std::size_t k = 1; k <= n_interior; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(n_interior + 1);
        basis.knots.push_back(domain.first + frac * (domain.second - domain.first));
    }
    for (std::size_t i = 0; i < order; ++i) basis.knots.push_back(domain.second);
    return basis;
}

/// All K basis values at a single point via the Cox-de Boor recursion.
/// The last interval is treated as closed so the right endpoint is usable.
inline Eigen::VectorXd eval_basis_point(const BasisSystem& basis, double t) {
    if (t < basis.domain.first || t > basis.domain.second)
        throw DomainViolation("evaluation point outside basis domain");

    const auto& knots = basis.knots;
    const std::size_t K = basis.K;
    const std::size_t ord = basis.order;

    // span index s with knots[s] <= t < knots[s+1], clamped for t == a_hi
    std::size_t span = ord - 1;
    while (span + 1 < K && t >= knots[span + 1]) ++span;

    // triangular recursion over the `ord` nonzero functions on this span
    std::vector<double> vals(ord, 0.0);
    vals[0] = 1.0;
    std::vector<double> left(ord), right(ord);
    for (std::size_t d = 1; d < ord; ++d) {
        left[d] = t - knots[span + 1 - d];
        right[d] = knots[span + d] - t;
        double saved = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            const double denom = right[r + 1] + left[d - r];
            const double tmp = denom > 0.0 ? vals[r] / denom : 0.0;
            vals[r] = saved + right[r + 1] * tmp;
            saved = left[d - r] * tmp;
        }
        vals[d] = saved;
    }

    Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    for (std::size_t r = 0; r < ord; ++r)
        row[static_cast<Eigen::Index>(span - ord + 1 + r)] = vals[r];
    return row;
}

/// n x K matrix of basis evaluations; row j holds (B_1(t_j),...,B_K(t_j)).
inline Eigen::MatrixXd eval_basis(const BasisSystem& basis, const Eigen::VectorXd& grid) {
    Eigen::MatrixXd out(grid.size(), static_cast<Eigen::Index>(basis.K));
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        out.row(j) = eval_basis_point(basis, grid[j]).transpose();
    return out;
}

}  // namespace fosr
