// Skew products on T^d x T^s: affine model (Mx, y + shift) plus a periodic
// displacement, with grid-based composition, inversion, and comparison.
#pragma once

#include <vector>

#include "torconj/fourier.hpp"
#include "torconj/lattice.hpp"

namespace torconj {

// z = (x, y) -> (Mx, y + shift) + disp(z). disp has k = d + s and may be
// empty (pure model map). All maps here are orientation-preserving lifts of
// diffeomorphisms as long as cr_majorant(disp, 1) stays well below 1.
struct SkewMap {
    LatticeMatrix base = LatticeMatrix::identity(1);
    std::vector<double> shift;  // s fiber entries
    FourierMap disp;

    int base_dim() const { return disp.base_dim(); }
    int fiber_dim() const { return disp.fiber_dim(); }
};

SkewMap skew_model(const LatticeMatrix& M, std::vector<double> shift, int s);

// block-diagonal lift diag(M, I_s) acting on displacement targets
Eigen::MatrixXcd block_lift(const LatticeMatrix& M, int s);

Eigen::VectorXd skew_apply(const SkewMap& F, const Eigen::VectorXd& z);

// F o G; grid work accumulates dropped coefficient mass into *budget
SkewMap skew_compose(const SkewMap& F, const SkewMap& G, const ComposeOptions& opts = {},
                     double* budget = nullptr);

SkewMap skew_inverse(const SkewMap& F, const ComposeOptions& opts = {}, double* budget = nullptr);

// C0 majorant distance of two maps with the same linear base part; fiber
// shifts are compared modulo Z^s
double skew_distance(const SkewMap& F, const SkewMap& G);

}  // namespace torconj
