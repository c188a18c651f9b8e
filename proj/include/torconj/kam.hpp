// The inductive step (truncate, split, solve, conjugate) and the convergence
// driver with schedule N_{i+1} = N_i^{3/2}, plus a generator of commuting
// perturbed actions with a known conjugacy for testing.
#pragma once

#include <string>
#include <vector>

#include "torconj/cohomology.hpp"
#include "torconj/fourier.hpp"
#include "torconj/lattice.hpp"
#include "torconj/skew.hpp"
#include "torconj/splitting.hpp"

namespace torconj {

// F = T_{A,thetaA} + f, G = T_{B,thetaB} + g; f, g have k = d + s.
struct SkewSystem {
    LatticeMatrix A = LatticeMatrix::identity(1), B = LatticeMatrix::identity(1);
    std::vector<double> thetaA, thetaB;
    FourierMap f, g;
    double commutationDefect = 0.0;
};

SkewMap system_F(const SkewSystem& sys);
SkewMap system_G(const SkewSystem& sys);

// grid options tuned for the iteration: 2x oversampling of the summed
// bandwidths plus an absolute 1e-15 post-prune, both charged to the budget
ComposeOptions kam_compose_defaults();

// majorant of (F o G - G o F); also stored into sys by the callers that track it
double commutation_defect(const SkewSystem& sys, const ComposeOptions& opts = {});

struct GeneratedSystem {
    SkewSystem sys;
    FourierMap h0;  // the hidden conjugacy displacement, for oracle tests
};

// F := (id+h0)^{-1} o T_A o (id+h0) and the B-analogue, h0 random with
// C1 majorant = amplitude
GeneratedSystem generate_commuting_perturbation(const LatticeMatrix& A, const LatticeMatrix& B,
                                                uint64_t seed, double amplitude, int bandwidth,
                                                const ComposeOptions& opts = kam_compose_defaults());

struct KamSchedule {
    double N0 = 4.0;
    double growthExponent = 1.5;  // fixed by the schedule N_{i+1} = N_i^{3/2}
    int maxIters = 20;
    double floorTol = 1e-12;
    int sigma = 4;  // loss-of-regularity parameter, diagnostics only (default d+2)
    SmoothingParams::Profile profile = SmoothingParams::Profile::Smooth;
    double kappa() const { return 6.0 * (sigma + 1); }
    double mu0() const { return 20.0 * (sigma + 1); }
};

struct KamStepDiag {
    double N = 0;
    double epsBefore0 = 0, epsBefore1 = 0;
    double epsAfter0 = 0, epsAfter1 = 0;
    double hMaj0 = 0, hMaj1 = 0;
    double avgTermNorm = 0;  // ||[f~2]||_0, the intersection-property quantity
    double aliasBudget = 0;
    double commutationDefect = 0;
};

struct KamStepResult {
    FourierMap h;
    SkewSystem next;
    KamStepDiag diag;
};

KamStepResult kam_step(const SkewSystem& sys, double N, const OrbitSumParams& p = {},
                       const ComposeOptions& copts = kam_compose_defaults(),
                       SmoothingParams::Profile profile = SmoothingParams::Profile::Smooth);

struct KamIterRecord {
    int iter = 0;
    double N = 0;
    double eps0 = 0, eps1 = 0, epsHighOrder = 0;  // majorants after the step (r = 0, 1, 6)
    double delta1 = 0;                            // C1 majorant of the step conjugacy h
    double commutationDefect = 0;
    double aliasBudget = 0;
    double avgTermNorm = 0;
};

struct KamReport {
    std::vector<KamIterRecord> iterations;
    std::vector<FourierMap> chain;  // h^(i) of each accepted step
    FourierMap composedH;           // displacement of H = H^(1) o ... o H^(l)
    double composedBudget = 0;
    double finalResidualA = 0, finalResidualB = 0;
    bool converged = false;
    bool diverged = false;
    std::string message;
};

KamReport run_kam(const SkewSystem& sys, const KamSchedule& schedule,
                  const OrbitSumParams& p = {}, const ComposeOptions& copts = kam_compose_defaults());

// fixed column order: iter,N,eps0,eps1,epsHighOrder,delta1,commutation_defect,
// alias_budget,avg_term,final_residual_A,final_residual_B (last two on every row)
std::string kam_report_csv(const KamReport& report);

}  // namespace torconj
