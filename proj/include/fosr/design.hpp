#pragma once

#include <Eigen/Core>
#include <vector>

#include "fosr/bspline.hpp"
#include "fosr/dataset.hpp"
#include "fosr/errors.hpp"

namespace fosr {

/// Latent-gated design structures: stacked O rows (one per observation,
/// block l = x_li * Z_l * B(t_ij)) and the precision kernel
/// Q = diag(eta^2) + O' O.
struct DesignStructures {
    std::vector<Eigen::MatrixXd> basis_rows;  // B_i, one n_i x K matrix per curve
    Eigen::MatrixXd O_full;                   // (sum n_i) x Kp
    Eigen::MatrixXd Q;                        // Kp x Kp

    Eigen::VectorXd o_row(std::size_t observation) const {
        return O_full.row(static_cast<Eigen::Index>(observation)).transpose();
    }
};

inline DesignStructures assemble_design(const StandardizedDataset& std_data,
                                        const BasisSystem& basis,
                                        const std::vector<int>& Z,
                                        const Eigen::VectorXd& eta2) {
    const auto p = std_data.base.n_covariates();
    const Eigen::Index K = static_cast<Eigen::Index>(basis.K);
    const Eigen::Index Kp = K * static_cast<Eigen::Index>(p);
    if (Z.size() != p) throw NumericalInput("selector vector length != p");
    if (eta2.size() != Kp) throw NumericalInput("eta2 length != Kp");
    if (!eta2.allFinite() || (eta2.array() <= 0.0).any())
        throw NumericalInput("eta2 must be positive and finite");

    DesignStructures design;
    design.basis_rows.reserve(std_data.base.n_curves());
    const bool shared = std_data.base.shared_grid();
    Eigen::MatrixXd shared_B;
    if (shared) shared_B = eval_basis(basis, std_data.base.grids[0]);

    design.O_full.resize(static_cast<Eigen::Index>(std_data.base.total_points()), Kp);
    Eigen::Index row0 = 0;
    for (std::size_t i = 0; i < std_data.base.n_curves(); ++i) {
        const Eigen::MatrixXd& B =
            design.basis_rows.emplace_back(shared ? shared_B
                                                  : eval_basis(basis, std_data.base.grids[i]));
        const Eigen::Index ni = B.rows();
        for (std::size_t l = 0; l < p; ++l) {
            const double gate = Z[l] ? std_data.base.covariates(static_cast<Eigen::Index>(l),
                                                                static_cast<Eigen::Index>(i))
                                     : 0.0;
            design.O_full.block(row0, static_cast<Eigen::Index>(l) * K, ni, K) = gate * B;
        }
        row0 += ni;
    }

    design.Q = Eigen::MatrixXd(eta2.asDiagonal());
    design.Q.selfadjointView<Eigen::Lower>().rankUpdate(design.O_full.transpose());
    design.Q.triangularView<Eigen::StrictlyUpper>() =
        design.Q.transpose().triangularView<Eigen::StrictlyUpper>();
    return design;
}

}  // namespace fosr
