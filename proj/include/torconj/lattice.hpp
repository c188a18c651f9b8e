// Exact integer-matrix algebra for toral automorphisms: duals, ergodicity,
// higher-rank window checks, and the spectral splitting of dual matrices.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace torconj {

// d×d unimodular integer matrix acting on T^d. All arithmetic is exact.
class LatticeMatrix {
public:
    LatticeMatrix(int dim, std::vector<long long> entries);
    static LatticeMatrix identity(int dim);

    int dim() const { return dim_; }
    long long operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }
    const std::vector<long long>& entries() const { return a_; }

    long long det() const;
    LatticeMatrix transpose() const;
    LatticeMatrix inverse() const;          // exact (adjugate / det, det = ±1)
    LatticeMatrix operator*(const LatticeMatrix& o) const;
    LatticeMatrix pow(long long k) const;   // negative exponents allowed

    std::vector<long long> apply(const std::vector<long long>& v) const;
    std::vector<int> apply(const std::vector<int>& v) const;

    Eigen::MatrixXd to_double() const;
    bool operator==(const LatticeMatrix& o) const { return dim_ == o.dim_ && a_ == o.a_; }
    bool operator!=(const LatticeMatrix& o) const { return !(*this == o); }

private:
    int dim_;
    std::vector<long long> a_;  // row-major
};

// A* = (A^T)^{-1}, exact.
LatticeMatrix dual(const LatticeMatrix& M);

// Coefficients of det(xI - M), monic, index i = coefficient of x^i (size d+1).
std::vector<long long> char_poly(const LatticeMatrix& M);

// True iff no eigenvalue of M is a root of unity. Exact integer decision:
// a cyclotomic factor of the characteristic polynomial must be some Phi_k
// with phi(k) <= d, and divisibility by monic Phi_k is exact.
bool is_ergodic(const LatticeMatrix& M);

// Cyclotomic polynomial Phi_k, integer coefficients, ascending order.
std::vector<long long> cyclotomic(int k);

// All k with Euler phi(k) <= d (k <= 2 d^2 suffices).
std::vector<int> cyclotomic_orders_up_to_degree(int d);

enum class Subspace { U, S, C };

struct SpectralSplitting {
    LatticeMatrix source;
    std::vector<Eigen::VectorXd> unstableBasis, centerBasis, stableBasis;
    Eigen::MatrixXd projU, projC, projS;
    double rho = 1.0;        // smallest |lambda| among unstable eigenvalues
    double cEstimate = 1.0;  // fitted growth constant, diagnostics only
    double tolerance = 1e-9;
    bool semisimple = true;
    double basisCondition = 1.0;
};

SpectralSplitting spectral_splitting(const LatticeMatrix& M, double tol = 1e-9);

// Subspace whose projection of n is largest; ties U > S > C. Requires n != 0.
Subspace classify_mostly_in(const std::vector<int>& n, const SpectralSplitting& S);
Subspace classify_mostly_in(const Eigen::VectorXd& n, const SpectralSplitting& S);

// min over 0<|n|<=radius of |pi_u(n)| * |n|^d  (diagnostic lower bound).
double katznelson_gamma_estimate(const SpectralSplitting& S, int radius);

struct HigherRankReport {
    int window = 0;
    std::vector<std::pair<int, int>> failures;  // (l,k) with A^l B^k non-ergodic
    double kappa0Estimate = 0.0;
    bool pass() const { return failures.empty(); }
    std::string verdict() const { return failures.empty() ? "pass-on-window" : "fail"; }
};

HigherRankReport higher_rank_window(const LatticeMatrix& A, const LatticeMatrix& B, int L);

}  // namespace torconj
