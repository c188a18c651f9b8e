#include "torconj/splitting.hpp"

#include <stdexcept>

namespace torconj {

namespace {

// twisted difference Delta_M^eta omega = omega(Mx,y) - eta*omega, scalar maps
FourierMap twisted_diff(const FourierMap& w, const LatticeMatrix& M, Cplx eta) {
    return pullback(w, M) - eta * w;
}

void check_pair(const LatticeMatrix& A, const LatticeMatrix& B) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    if (!is_ergodic(A) || !is_ergodic(B)) throw std::invalid_argument("generators must be ergodic");
}

}  // namespace

FourierMap op_L1(const FourierMap& f1, const FourierMap& g1, const LatticeMatrix& A,
                 const LatticeMatrix& B) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    Eigen::MatrixXcd Ad = A.to_double().cast<Cplx>(), Bd = B.to_double().cast<Cplx>();
    return (pullback(f1, B) - f1.matrix_applied(Bd)) - (pullback(g1, A) - g1.matrix_applied(Ad));
}

FourierMap op_L2(const FourierMap& f2, const FourierMap& g2, const LatticeMatrix& A,
                 const LatticeMatrix& B) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    return (pullback(f2, B) - f2) - (pullback(g2, A) - g2);
}

SplitResult split_twisted(const FourierMap& f1, const FourierMap& g1, const LatticeMatrix& A,
                          const LatticeMatrix& B, const OrbitSumParams& p) {
    check_pair(A, B);
    PairSpectrum ps = simultaneous_spectrum(A, B);
    if (!ps.semisimple) throw std::runtime_error("Jordan blocks unsupported");
    int d = f1.base_dim(), s = f1.fiber_dim(), k = f1.target_dim();

    LatticeMatrix Ad = dual(A);
    SpectralSplitting split = spectral_splitting(Ad);
    FourierMap theta = f1.matrix_applied(ps.basisInv);

    SplitResult out;
    out.projF = FourierMap(d, s, k);
    out.projG = FourierMap(d, s, k);
    out.avgF = FourierMap(d, s, k);
    out.avgG = FourierMap(d, s, k);
    bool warn = false;
    for (int i = 0; i < k; ++i) {
        FourierMap w = scalar_eta_solve(theta.component(i), Ad, split, ps.lambdaA(i),
                                        ZeroModePolicy::Solve, p, &warn);
        FourierMap pf = twisted_diff(w, A, ps.lambdaA(i));
        FourierMap pg = twisted_diff(w, B, ps.muB(i));
        for (const auto& [f, v] : pf.coeffs()) out.projF.add_coeff(f, ps.basis.col(i) * v(0));
        for (const auto& [f, v] : pg.coeffs()) out.projG.add_coeff(f, ps.basis.col(i) * v(0));
    }
    out.projF.symmetrize_reality();
    out.projG.symmetrize_reality();
    out.errF = f1 - out.projF;
    out.errG = g1 - out.projG;

    out.diag.projMajorant0 = std::max(cr_majorant(out.projF, 0), cr_majorant(out.projG, 0));
    out.diag.errMajorant0 = std::max(cr_majorant(out.errF, 0), cr_majorant(out.errG, 0));
    out.diag.LofProj = cr_majorant(op_L1(out.projF, out.projG, A, B), 0);
    out.diag.basisCondition = ps.condition;
    out.diag.truncationWarning = warn;
    return out;
}

SplitResult split_untwisted(const FourierMap& f2, const FourierMap& g2, const LatticeMatrix& A,
                            const LatticeMatrix& B, const OrbitSumParams& p) {
    check_pair(A, B);
    int d = f2.base_dim(), s = f2.fiber_dim(), k = f2.target_dim();

    SplitResult out;
    out.avgF = base_average(f2);
    out.avgG = base_average(g2);
    FourierMap f0 = f2 - out.avgF;

    LatticeMatrix Ad = dual(A);
    SpectralSplitting split = spectral_splitting(Ad);
    out.projF = FourierMap(d, s, k);
    out.projG = FourierMap(d, s, k);
    bool warn = false;
    for (int j = 0; j < k; ++j) {
        FourierMap w = scalar_eta_solve(f0.component(j), Ad, split, Cplx(1.0, 0.0),
                                        ZeroModePolicy::Zero, p, &warn);
        FourierMap pf = twisted_diff(w, A, Cplx(1.0, 0.0));
        FourierMap pg = twisted_diff(w, B, Cplx(1.0, 0.0));
        for (const auto& [f, v] : pf.coeffs()) {
            Eigen::VectorXcd row = Eigen::VectorXcd::Zero(k);
            row(j) = v(0);
            out.projF.add_coeff(f, row);
        }
        for (const auto& [f, v] : pg.coeffs()) {
            Eigen::VectorXcd row = Eigen::VectorXcd::Zero(k);
            row(j) = v(0);
            out.projG.add_coeff(f, row);
        }
    }
    out.projF.symmetrize_reality();
    out.projG.symmetrize_reality();
    out.errF = f2 - out.avgF - out.projF;
    out.errG = g2 - out.avgG - out.projG;

    out.diag.projMajorant0 = std::max(cr_majorant(out.projF, 0), cr_majorant(out.projG, 0));
    out.diag.errMajorant0 = std::max(cr_majorant(out.errF, 0), cr_majorant(out.errG, 0));
    out.diag.avgMajorant0 = std::max(cr_majorant(out.avgF, 0), cr_majorant(out.avgG, 0));
    out.diag.LofProj = cr_majorant(op_L2(out.projF, out.projG, A, B), 0);
    out.diag.truncationWarning = warn;
    return out;
}

}  // namespace torconj
