#include "torconj/kam.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace torconj {

namespace {

double max_coeff_norm(const FourierMap& f) {
    double m = 0;
    for (const auto& [fr, v] : f.coeffs()) m = std::max(m, v.norm());
    return m;
}

SkewMap identity_map(int d, int s) {
    return SkewMap{LatticeMatrix::identity(d), std::vector<double>(static_cast<size_t>(s), 0.0),
                   FourierMap(d, s, d + s)};
}

}  // namespace

ComposeOptions kam_compose_defaults() {
    ComposeOptions o;
    o.oversample = 2.0;
    o.pruneAbs = 1e-15;
    return o;
}

SkewMap system_F(const SkewSystem& sys) { return SkewMap{sys.A, sys.thetaA, sys.f}; }
SkewMap system_G(const SkewSystem& sys) { return SkewMap{sys.B, sys.thetaB, sys.g}; }

double commutation_defect(const SkewSystem& sys, const ComposeOptions& opts) {
    SkewMap F = system_F(sys), G = system_G(sys);
    SkewMap FG = skew_compose(F, G, opts);
    SkewMap GF = skew_compose(G, F, opts);
    return skew_distance(FG, GF);
}

GeneratedSystem generate_commuting_perturbation(const LatticeMatrix& A, const LatticeMatrix& B,
                                                uint64_t seed, double amplitude, int bandwidth,
                                                const ComposeOptions& opts) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    if (amplitude >= 0.25) throw std::invalid_argument("amplitude too large for a certified conjugacy");
    int d = A.dim();
    int s = 1;  // fiber dimension is fixed by the caller's maps; generator uses s = 1
    GeneratedSystem out;
    out.h0 = random_real_map(d, s, d + s, bandwidth, amplitude, seed, 1);

    SkewMap H{LatticeMatrix::identity(d), {0.0}, out.h0};
    SkewMap Hinv = skew_inverse(H, opts);
    SkewMap F = skew_compose(Hinv, skew_compose(skew_model(A, {0.0}, s), H, opts), opts);
    SkewMap G = skew_compose(Hinv, skew_compose(skew_model(B, {0.0}, s), H, opts), opts);

    out.sys.A = A;
    out.sys.B = B;
    out.sys.thetaA = {0.0};
    out.sys.thetaB = {0.0};
    out.sys.f = F.disp;
    out.sys.g = G.disp;
    out.sys.commutationDefect = commutation_defect(out.sys, opts);
    return out;
}

KamStepResult kam_step(const SkewSystem& sys, double N, const OrbitSumParams& p,
                       const ComposeOptions& copts, SmoothingParams::Profile profile) {
    int d = sys.A.dim(), s = sys.f.fiber_dim();
    KamStepResult out;
    out.diag.N = N;
    out.diag.epsBefore0 = std::max(cr_majorant(sys.f, 0), cr_majorant(sys.g, 0));
    out.diag.epsBefore1 = std::max(cr_majorant(sys.f, 1), cr_majorant(sys.g, 1));

    if (out.diag.epsBefore0 == 0.0) {
        out.h = FourierMap(d, s, d + s);
        out.next = sys;
        return out;
    }
    if (sys.commutationDefect > 1e-6 * out.diag.epsBefore0)
        throw std::runtime_error("kam_step: generators do not commute within tolerance");

    SmoothingParams sp;
    sp.cutoff = N;
    sp.profile = profile;
    FourierMap fN = smooth_truncate(sys.f, sp).first;
    FourierMap gN = smooth_truncate(sys.g, sp).first;

    SplitResult st = split_twisted(fN.components(0, d), gN.components(0, d), sys.A, sys.B, p);
    SplitResult su = split_untwisted(fN.components(d, s), gN.components(d, s), sys.A, sys.B, p);

    FourierMap h1 = solve_twisted(st.projF, st.projG, sys.A, sys.B, p);
    FourierMap h2 = solve_untwisted(su.projF, su.projG, sys.A, sys.B, p);
    out.h = FourierMap::join(h1, h2);
    out.diag.hMaj0 = cr_majorant(out.h, 0);
    out.diag.hMaj1 = cr_majorant(out.h, 1);
    if (out.diag.hMaj1 >= 0.25) throw std::runtime_error("step rejected: conjugacy not certified");

    double budget = 0;
    SkewMap H{LatticeMatrix::identity(d), std::vector<double>(static_cast<size_t>(s), 0.0), out.h};
    SkewMap Hinv = skew_inverse(H, copts, &budget);
    SkewMap newF = skew_compose(Hinv, skew_compose(system_F(sys), H, copts, &budget), copts, &budget);
    SkewMap newG = skew_compose(Hinv, skew_compose(system_G(sys), H, copts, &budget), copts, &budget);

    out.next.A = sys.A;
    out.next.B = sys.B;
    out.next.thetaA = sys.thetaA;
    out.next.thetaB = sys.thetaB;
    out.next.f = newF.disp;
    out.next.g = newG.disp;
    budget += out.next.f.prune(copts.dropTol * max_coeff_norm(out.next.f));
    budget += out.next.g.prune(copts.dropTol * max_coeff_norm(out.next.g));
    // conjugation preserves commutation exactly; only grid work can leak
    out.next.commutationDefect = sys.commutationDefect + budget;

    out.diag.epsAfter0 = std::max(cr_majorant(out.next.f, 0), cr_majorant(out.next.g, 0));
    out.diag.epsAfter1 = std::max(cr_majorant(out.next.f, 1), cr_majorant(out.next.g, 1));
    out.diag.avgTermNorm = cr_majorant(base_average(out.next.f.components(d, s)), 0);
    out.diag.aliasBudget = budget;
    out.diag.commutationDefect = out.next.commutationDefect;
    return out;
}

KamReport run_kam(const SkewSystem& sys, const KamSchedule& schedule, const OrbitSumParams& p,
                  const ComposeOptions& copts) {
    int d = sys.A.dim(), s = sys.f.fiber_dim();
    KamReport rep;
    rep.composedH = FourierMap(d, s, d + s);

    SkewSystem cur = sys;
    double eps = std::max(cr_majorant(cur.f, 0), cr_majorant(cur.g, 0));
    double prevEps = eps;
    int badSteps = 0;

    if (eps >= schedule.floorTol) {
        for (int i = 0; i < schedule.maxIters; ++i) {
            double N = std::pow(schedule.N0, std::pow(schedule.growthExponent, i));
            KamStepResult st = kam_step(cur, N, p, copts, schedule.profile);
            cur = st.next;
            eps = st.diag.epsAfter0;
            rep.chain.push_back(st.h);

            KamIterRecord rec;
            rec.iter = i;
            rec.N = N;
            rec.eps0 = st.diag.epsAfter0;
            rec.eps1 = st.diag.epsAfter1;
            rec.epsHighOrder = std::max(cr_majorant(cur.f, 6), cr_majorant(cur.g, 6));
            rec.delta1 = st.diag.hMaj1;
            rec.commutationDefect = st.diag.commutationDefect;
            rec.aliasBudget = st.diag.aliasBudget;
            rec.avgTermNorm = st.diag.avgTermNorm;
            rep.iterations.push_back(rec);

            if (eps < schedule.floorTol) {
                rep.converged = true;
                break;
            }
            badSteps = (eps > prevEps) ? badSteps + 1 : 0;
            prevEps = eps;
            if (badSteps >= 2) {
                rep.diverged = true;
                rep.message = "divergence detected: error grew on two consecutive steps";
                break;
            }
        }
    } else {
        rep.converged = true;
    }
    if (!rep.converged && !rep.diverged)
        rep.message = "maximum iterations reached before the floor tolerance";

    SkewMap H = identity_map(d, s);
    for (const auto& h : rep.chain) {
        SkewMap Hi{LatticeMatrix::identity(d), std::vector<double>(static_cast<size_t>(s), 0.0), h};
        H = skew_compose(H, Hi, copts, &rep.composedBudget);
    }
    rep.composedH = H.disp;

    SkewMap FH = skew_compose(system_F(sys), H, copts, &rep.composedBudget);
    SkewMap HT = skew_compose(H, skew_model(sys.A, sys.thetaA, s), copts, &rep.composedBudget);
    rep.finalResidualA = skew_distance(FH, HT);
    SkewMap GH = skew_compose(system_G(sys), H, copts, &rep.composedBudget);
    SkewMap HTB = skew_compose(H, skew_model(sys.B, sys.thetaB, s), copts, &rep.composedBudget);
    rep.finalResidualB = skew_distance(GH, HTB);
    return rep;
}

std::string kam_report_csv(const KamReport& report) {
    std::string out =
        "iter,N,eps0,eps1,eps_high_order,delta1,commutation_defect,alias_budget,avg_term,"
        "final_residual_A,final_residual_B\n";
    char buf[512];
    for (const auto& r : report.iterations) {
        std::snprintf(buf, sizeof buf,
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                      r.N, r.eps0, r.eps1, r.epsHighOrder, r.delta1, r.commutationDefect,
                      r.aliasBudget, r.avgTermNorm, report.finalResidualA, report.finalResidualB);
        out += buf;
    }
    return out;
}

}  // namespace torconj
