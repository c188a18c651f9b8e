// Twisted and untwisted cohomological equations over commuting toral
// automorphisms, solved frequency-wise by dual-orbit coefficient sums.
#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "torconj/fourier.hpp"
#include "torconj/lattice.hpp"

namespace torconj {

struct TwistSpectrum {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd basis, basisInv;
    bool semisimple = true;
    double condition = 1.0;
};

TwistSpectrum twist_spectrum(const LatticeMatrix& A);

// Simultaneous eigen-structure of a commuting semisimple pair: columns of
// basis are joint eigenvectors, lambdaA/muB the per-column eigenvalues.
struct PairSpectrum {
    Eigen::MatrixXcd basis, basisInv;
    Eigen::VectorXcd lambdaA, muB;
    bool semisimple = true;
    double condition = 1.0;
};

PairSpectrum simultaneous_spectrum(const LatticeMatrix& A, const LatticeMatrix& B);

struct OrbitSumParams {
    int maxTerms = 200;
    double tailTol = 1e-14;
    double compatGate = 1e-10;  // relative gate on L1/L2 of the inputs
};

enum class OrbitSide { Forward, Backward };

// Truncated dual-orbit sum for one (n, m); exact for band-limited theta since
// the orbit escapes the support. *truncWarn set when maxTerms is hit with the
// frequency still inside the support ball.
Cplx orbit_sum_coefficient(const FourierMap& theta, const LatticeMatrix& Mdual, Cplx eta,
                           const std::vector<int>& n, const std::vector<int>& m, OrbitSide side,
                           const OrbitSumParams& p, bool* truncWarn = nullptr);

enum class ZeroModePolicy { Error, Zero, Solve };

// Scalar solve of omega(Ax, y) - eta * omega = theta; per-frequency side per
// classify_mostly_in on the splitting of A*. Shared by solvers and splitting.
FourierMap scalar_eta_solve(const FourierMap& theta, const LatticeMatrix& Adual,
                            const SpectralSplitting& dualSplit, Cplx eta, ZeroModePolicy zm,
                            const OrbitSumParams& p, bool* truncWarn = nullptr);

// Omega(Ax,y) - Omega = R and the B-analogue for S. R, S have k = s.
FourierMap solve_untwisted(const FourierMap& R, const FourierMap& S, const LatticeMatrix& A,
                           const LatticeMatrix& B, const OrbitSumParams& p = {});

// Omega(Ax,y) - A Omega = R and the B-analogue. R, S have k = d.
FourierMap solve_twisted(const FourierMap& R, const FourierMap& S, const LatticeMatrix& A,
                         const LatticeMatrix& B, const OrbitSumParams& p = {});

enum class EquationKind { Twisted, Untwisted };

// C0 majorants of both defect maps.
std::pair<double, double> residual(EquationKind kind, const FourierMap& Omega, const FourierMap& R,
                                   const FourierMap& S, const LatticeMatrix& A,
                                   const LatticeMatrix& B);

}  // namespace torconj
