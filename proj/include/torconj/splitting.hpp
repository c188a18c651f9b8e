// Commutator operators L1/L2 and the tame projection/error splitting of
// approximate cocycles over a commuting pair.
#pragma once

#include "torconj/cohomology.hpp"
#include "torconj/fourier.hpp"
#include "torconj/lattice.hpp"

namespace torconj {

// L1(f1,g1) = (f1(Bx,y) - B f1) - (g1(Ax,y) - A g1), k = d.
FourierMap op_L1(const FourierMap& f1, const FourierMap& g1, const LatticeMatrix& A,
                 const LatticeMatrix& B);

// L2(f2,g2) = (f2(Bx,y) - f2) - (g2(Ax,y) - g2), k = s.
FourierMap op_L2(const FourierMap& f2, const FourierMap& g2, const LatticeMatrix& A,
                 const LatticeMatrix& B);

struct SplitResult {
    FourierMap projF, projG;  // P parts
    FourierMap errF, errG;    // E parts
    FourierMap avgF, avgG;    // base averages (untwisted only; zero maps otherwise)
    struct {
        double projMajorant0 = 0, errMajorant0 = 0, avgMajorant0 = 0;
        double LofProj = 0;  // majorant of L applied to the P parts
        double basisCondition = 1.0;
        bool truncationWarning = false;
    } diag;
};

SplitResult split_twisted(const FourierMap& f1, const FourierMap& g1, const LatticeMatrix& A,
                          const LatticeMatrix& B, const OrbitSumParams& p = {});

SplitResult split_untwisted(const FourierMap& f2, const FourierMap& g2, const LatticeMatrix& A,
                            const LatticeMatrix& B, const OrbitSumParams& p = {});

}  // namespace torconj
