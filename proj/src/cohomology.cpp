#include "torconj/cohomology.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "torconj/splitting.hpp"

namespace torconj {

namespace {

double matrix_condition(const Eigen::MatrixXcd& V) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    return (smin > 0) ? svd.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

TwistSpectrum twist_spectrum(const LatticeMatrix& A) {
    TwistSpectrum out;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.to_double().cast<Cplx>());
    out.eigenvalues = es.eigenvalues();
    out.basis = es.eigenvectors();
    out.condition = matrix_condition(out.basis);
    if (!std::isfinite(out.condition) || out.condition > 1e8) {
        out.semisimple = false;
        out.basisInv = Eigen::MatrixXcd::Identity(A.dim(), A.dim());
        return out;
    }
    out.basisInv = out.basis.inverse();
    Eigen::MatrixXcd recon = out.basis * out.eigenvalues.asDiagonal() * out.basisInv;
    if ((recon - A.to_double().cast<Cplx>()).norm() > 1e-8) out.semisimple = false;
    return out;
}

PairSpectrum simultaneous_spectrum(const LatticeMatrix& A, const LatticeMatrix& B) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    int d = A.dim();
    TwistSpectrum sa = twist_spectrum(A);
    PairSpectrum out;
    if (!sa.semisimple) {
        out.semisimple = false;
        return out;
    }
    Eigen::MatrixXcd Bd = B.to_double().cast<Cplx>();
    Eigen::MatrixXcd basis(d, d);
    out.lambdaA.resize(d);
    out.muB.resize(d);

    // cluster A's eigenvalues, refine each eigenspace by B
    std::vector<bool> used(static_cast<size_t>(d), false);
    int col = 0;
    for (int i = 0; i < d; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        std::vector<int> cluster;
        for (int j = i; j < d; ++j)
            if (!used[static_cast<size_t>(j)] &&
                std::abs(sa.eigenvalues(j) - sa.eigenvalues(i)) < 1e-8) {
                cluster.push_back(j);
                used[static_cast<size_t>(j)] = true;
            }
        int c = static_cast<int>(cluster.size());
        Eigen::MatrixXcd Vc(d, c);
        for (int j = 0; j < c; ++j) Vc.col(j) = sa.basis.col(cluster[static_cast<size_t>(j)]);
        // coordinates of B's action on the cluster eigenspace
        Eigen::MatrixXcd M =
            (Vc.adjoint() * Vc).ldlt().solve(Vc.adjoint() * (Bd * Vc));
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> esb(M);
        for (int j = 0; j < c; ++j) {
            Eigen::VectorXcd v = Vc * esb.eigenvectors().col(j);
            basis.col(col) = v / v.norm();
            out.lambdaA(col) = sa.eigenvalues(i);
            out.muB(col) = esb.eigenvalues()(j);
            ++col;
        }
    }
    out.basis = basis;
    out.condition = matrix_condition(basis);
    if (!std::isfinite(out.condition) || out.condition > 1e8) {
        out.semisimple = false;
        return out;
    }
    out.basisInv = basis.inverse();
    Eigen::MatrixXcd reconA = basis * out.lambdaA.asDiagonal() * out.basisInv;
    Eigen::MatrixXcd reconB = basis * out.muB.asDiagonal() * out.basisInv;
    if ((reconA - A.to_double().cast<Cplx>()).norm() > 1e-8 ||
        (reconB - Bd).norm() > 1e-8)
        out.semisimple = false;
    return out;
}

Cplx orbit_sum_coefficient(const FourierMap& theta, const LatticeMatrix& Mdual, Cplx eta,
                           const std::vector<int>& n, const std::vector<int>& m, OrbitSide side,
                           const OrbitSumParams& p, bool* truncWarn) {
    if (theta.target_dim() != 1) throw std::invalid_argument("orbit_sum_coefficient: scalar theta required");
    int d = theta.base_dim(), s = theta.fiber_dim();
    if (static_cast<int>(n.size()) != d || static_cast<int>(m.size()) != s)
        throw std::invalid_argument("orbit_sum_coefficient: frequency shape mismatch");

    bool nzero = std::all_of(n.begin(), n.end(), [](int x) { return x == 0; });
    auto lookup = [&](const std::vector<int>& nn) {
        FreqVec f(nn.begin(), nn.end());
        f.insert(f.end(), m.begin(), m.end());
        return theta.coeff(f)(0);
    };
    if (nzero) {
        Cplx t0 = lookup(n);
        if (std::abs(eta - 1.0) < 1e-14) {
            if (std::abs(t0) > p.tailTol) throw std::runtime_error("obstruction at zero mode");
            return Cplx(0.0, 0.0);
        }
        return t0 / (1.0 - eta);
    }

    double suppNorm = 0;
    for (const auto& [f, v] : theta.coeffs()) {
        double nn = 0;
        for (int a = 0; a < d; ++a) nn = std::max(nn, std::abs(static_cast<double>(f[a])));
        suppNorm = std::max(suppNorm, nn);
    }

    LatticeMatrix step = (side == OrbitSide::Forward) ? Mdual : Mdual.inverse();
    std::vector<int> cur = n;
    Cplx acc(0.0, 0.0);
    Cplx etaPow = (side == OrbitSide::Forward) ? (1.0 / eta) : Cplx(1.0, 0.0);
    // forward: -sum_{l>=0} eta^{-(l+1)} theta((A*)^l n)
    // backward: sum_{l<=-1} eta^{-(l+1)} theta((A*)^l n), term l=-1 has weight 1
    if (side == OrbitSide::Backward) cur = step.apply(cur);
    double prev = 0;
    int growStreak = 0;
    for (int it = 0; it < p.maxTerms; ++it) {
        acc += etaPow * lookup(cur);
        double nrm = 0;
        for (int x : cur) nrm = std::max(nrm, std::abs(static_cast<double>(x)));
        growStreak = (nrm > suppNorm && nrm >= prev) ? growStreak + 1 : 0;
        prev = nrm;
        if (growStreak >= 8 || nrm > 1e8) break;  // escaped the support for good
        if (it + 1 == p.maxTerms) {
            if (nrm <= suppNorm && truncWarn) *truncWarn = true;
            break;
        }
        cur = step.apply(cur);
        if (side == OrbitSide::Forward)
            etaPow /= eta;
        else
            etaPow *= eta;
    }
    return (side == OrbitSide::Forward) ? -acc : acc;
}

FourierMap scalar_eta_solve(const FourierMap& theta, const LatticeMatrix& Adual,
                            const SpectralSplitting& dualSplit, Cplx eta, ZeroModePolicy zm,
                            const OrbitSumParams& p, bool* truncWarn) {
    int d = theta.base_dim(), s = theta.fiber_dim();
    if (theta.target_dim() != 1) throw std::invalid_argument("scalar_eta_solve: scalar theta required");

    // base frequencies and fiber indices present in the support
    std::set<std::vector<int>> baseSupp;
    std::set<std::vector<int>> fiberSupp;
    for (const auto& [f, v] : theta.coeffs()) {
        baseSupp.insert(std::vector<int>(f.begin(), f.begin() + d));
        fiberSupp.insert(std::vector<int>(f.begin() + d, f.end()));
    }
    if (fiberSupp.empty()) return FourierMap(d, s, 1);

    // candidate frequencies: support plus orbit predecessors (forward-side
    // reach) and successors (backward-side reach); walks stop once the
    // classification has settled on the non-contributing side
    LatticeMatrix pred = Adual.inverse();
    std::set<std::vector<int>> cands;
    auto is_zero = [](const std::vector<int>& v) {
        return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
    };
    for (const auto& n0 : baseSupp) {
        cands.insert(n0);
        if (is_zero(n0)) continue;
        auto big = [](const std::vector<int>& v) {
            for (int x : v)
                if (std::abs(static_cast<double>(x)) > 1e8) return true;
            return false;
        };
        std::vector<int> cur = n0;
        int settled = 0;
        for (int j = 0; j < p.maxTerms && settled < 3 && !big(cur); ++j) {
            cur = pred.apply(cur);
            cands.insert(cur);
            settled = (classify_mostly_in(cur, dualSplit) == Subspace::S) ? settled + 1 : 0;
        }
        cur = n0;
        settled = 0;
        for (int j = 0; j < p.maxTerms && settled < 3 && !big(cur); ++j) {
            cur = Adual.apply(cur);
            cands.insert(cur);
            settled = (classify_mostly_in(cur, dualSplit) != Subspace::S) ? settled + 1 : 0;
        }
    }

    FourierMap out(d, s, 1);
    for (const auto& n : cands) {
        bool nzero = is_zero(n);
        OrbitSide side = OrbitSide::Forward;
        if (!nzero)
            side = (classify_mostly_in(n, dualSplit) == Subspace::S) ? OrbitSide::Backward
                                                                     : OrbitSide::Forward;
        for (const auto& m : fiberSupp) {
            Cplx a;
            if (nzero) {
                FreqVec f(n.begin(), n.end());
                f.insert(f.end(), m.begin(), m.end());
                Cplx t0 = theta.coeff(f)(0);
                switch (zm) {
                    case ZeroModePolicy::Zero:
                        a = Cplx(0.0, 0.0);
                        break;
                    case ZeroModePolicy::Error:
                        if (std::abs(t0) > p.tailTol) throw std::runtime_error("obstruction at zero mode");
                        a = Cplx(0.0, 0.0);
                        break;
                    case ZeroModePolicy::Solve:
                        a = t0 / (1.0 - eta);
                        break;
                }
            } else {
                a = orbit_sum_coefficient(theta, Adual, eta, n, m, side, p, truncWarn);
            }
            if (std::abs(a) > 0) {
                FreqVec f(n.begin(), n.end());
                f.insert(f.end(), m.begin(), m.end());
                Eigen::VectorXcd v(1);
                v << a;
                out.add_coeff(f, v);
            }
        }
    }
    return out;
}

FourierMap solve_untwisted(const FourierMap& R, const FourierMap& S, const LatticeMatrix& A,
                           const LatticeMatrix& B, const OrbitSumParams& p) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    double scale = std::max({cr_majorant(R, 0), cr_majorant(S, 0), 1e-30});
    if (cr_majorant(base_average(R), 0) > 1e-12 * std::max(scale, 1.0) ||
        cr_majorant(base_average(S), 0) > 1e-12 * std::max(scale, 1.0))
        throw std::runtime_error("obstruction: nonzero average");
    if (cr_majorant(op_L2(R, S, A, B), 0) > p.compatGate * scale)
        throw std::runtime_error("not a cocycle within tolerance");

    LatticeMatrix Ad = dual(A);
    SpectralSplitting split = spectral_splitting(Ad);
    FourierMap out(R.base_dim(), R.fiber_dim(), R.target_dim());
    for (int j = 0; j < R.target_dim(); ++j) {
        FourierMap w = scalar_eta_solve(R.component(j), Ad, split, Cplx(1.0, 0.0),
                                        ZeroModePolicy::Error, p);
        for (const auto& [f, v] : w.coeffs()) {
            Eigen::VectorXcd row = Eigen::VectorXcd::Zero(R.target_dim());
            row(j) = v(0);
            out.add_coeff(f, row);
        }
    }
    out.symmetrize_reality();
    return out;
}

FourierMap solve_twisted(const FourierMap& R, const FourierMap& S, const LatticeMatrix& A,
                         const LatticeMatrix& B, const OrbitSumParams& p) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    if (!is_ergodic(A) || !is_ergodic(B)) throw std::invalid_argument("generators must be ergodic");
    PairSpectrum ps = simultaneous_spectrum(A, B);
    if (!ps.semisimple) throw std::runtime_error("Jordan blocks unsupported");
    double scale = std::max({cr_majorant(R, 0), cr_majorant(S, 0), 1e-30});
    if (cr_majorant(op_L1(R, S, A, B), 0) > p.compatGate * scale)
        throw std::runtime_error("not a cocycle within tolerance");

    LatticeMatrix Ad = dual(A);
    SpectralSplitting split = spectral_splitting(Ad);
    FourierMap Rp = R.matrix_applied(ps.basisInv);
    FourierMap out(R.base_dim(), R.fiber_dim(), R.target_dim());
    for (int i = 0; i < R.target_dim(); ++i) {
        FourierMap w = scalar_eta_solve(Rp.component(i), Ad, split, ps.lambdaA(i),
                                        ZeroModePolicy::Solve, p);
        for (const auto& [f, v] : w.coeffs()) out.add_coeff(f, ps.basis.col(i) * v(0));
    }
    out.symmetrize_reality();
    return out;
}

std::pair<double, double> residual(EquationKind kind, const FourierMap& Omega, const FourierMap& R,
                                   const FourierMap& S, const LatticeMatrix& A,
                                   const LatticeMatrix& B) {
    auto defect = [&](const LatticeMatrix& M, const FourierMap& rhs) {
        FourierMap lin = (kind == EquationKind::Twisted)
                             ? Omega.matrix_applied(M.to_double().cast<Cplx>())
                             : Omega;
        return cr_majorant(pullback(Omega, M) - lin - rhs, 0);
    };
    return {defect(A, R), defect(B, S)};
}

}  // namespace torconj
