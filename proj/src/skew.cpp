#include "torconj/skew.hpp"

#include <cmath>
#include <stdexcept>

namespace torconj {

SkewMap skew_model(const LatticeMatrix& M, std::vector<double> shift, int s) {
    if (static_cast<int>(shift.size()) != s) throw std::invalid_argument("skew_model: shift size");
    int d = M.dim();
    return SkewMap{M, std::move(shift), FourierMap(d, s, d + s)};
}

Eigen::MatrixXcd block_lift(const LatticeMatrix& M, int s) {
    int d = M.dim();
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Identity(d + s, d + s);
    L.topLeftCorner(d, d) = M.to_double().cast<Cplx>();
    return L;
}

Eigen::VectorXd skew_apply(const SkewMap& F, const Eigen::VectorXd& z) {
    int d = F.base_dim(), s = F.fiber_dim();
    Eigen::VectorXd out(d + s);
    Eigen::MatrixXd Md = F.base.to_double();
    out.head(d) = Md * z.head(d);
    for (int j = 0; j < s; ++j) out(d + j) = z(d + j) + F.shift[static_cast<size_t>(j)];
    if (!F.disp.empty()) out += F.disp.evaluate(z);
    return out;
}

SkewMap skew_compose(const SkewMap& F, const SkewMap& G, const ComposeOptions& opts,
                     double* budget) {
    int d = F.base_dim(), s = F.fiber_dim();
    if (G.base_dim() != d || G.fiber_dim() != s)
        throw std::invalid_argument("skew_compose: shape mismatch");
    SkewMap out;
    out.base = F.base * G.base;
    out.shift = G.shift;
    for (int j = 0; j < s; ++j) out.shift[static_cast<size_t>(j)] += F.shift[static_cast<size_t>(j)];

    if (F.disp.empty()) {
        out.disp = G.disp.matrix_applied(block_lift(F.base, s));
        return out;
    }
    // F o G = T_F(T_G z + dispG) + dispF(G z)
    //       = T_{FG} z + L_F dispG + (dispF o T_G) o (id + L_G^{-1} dispG)
    FourierMap fPulled = model_precompose(F.disp, G.base, G.shift);
    if (G.disp.empty()) {
        out.disp = fPulled;
        return out;
    }
    FourierMap u = G.disp.matrix_applied(block_lift(G.base.inverse(), s));
    out.disp = G.disp.matrix_applied(block_lift(F.base, s)) +
               compose_with_map(fPulled, u, opts, budget);
    out.disp.symmetrize_reality();
    return out;
}

SkewMap skew_inverse(const SkewMap& F, const ComposeOptions& opts, double* budget) {
    int s = F.fiber_dim();
    SkewMap out;
    out.base = F.base.inverse();
    out.shift.assign(F.shift.size(), 0.0);
    for (size_t j = 0; j < F.shift.size(); ++j) out.shift[j] = -F.shift[j];
    if (F.disp.empty()) {
        out.disp = F.disp;  // empty with the right shape
        return out;
    }
    // F = T o (id + u) with u = L^{-1} disp, so F^{-1} = (id + w) o T^{-1}
    FourierMap u = F.disp.matrix_applied(block_lift(F.base.inverse(), s));
    double defect = 0;
    FourierMap w = invert_near_identity(u, opts, &defect);
    if (budget) *budget += defect;
    out.disp = model_precompose(w, out.base, out.shift);
    out.disp.symmetrize_reality();
    return out;
}

double skew_distance(const SkewMap& F, const SkewMap& G) {
    if (F.base != G.base) throw std::invalid_argument("skew_distance: base parts differ");
    int d = F.base_dim(), s = F.fiber_dim();
    FourierMap diff = F.disp - G.disp;
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(d + s);
    bool any = false;
    for (int j = 0; j < s; ++j) {
        double t = F.shift[static_cast<size_t>(j)] - G.shift[static_cast<size_t>(j)];
        t -= std::round(t);  // compare mod Z
        if (t != 0.0) any = true;
        c(d + j) = Cplx(t, 0.0);
    }
    if (any) diff.add_coeff(FreqVec(static_cast<size_t>(d + s), 0), c);
    return cr_majorant(diff, 0);
}

}  // namespace torconj
