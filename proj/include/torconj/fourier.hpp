// Sparse Fourier representation of smooth maps T^d x T^s -> R^k (or C^k for
// internal eigen-component work): evaluation, pullbacks, majorant norms,
// smoothing cutoffs, grid transforms, and composition with near-identity maps.
#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "torconj/lattice.hpp"

namespace torconj {

using Cplx = std::complex<double>;
using FreqVec = std::vector<int>;  // concatenated (n in Z^d, m in Z^s)

class FourierMap {
public:
    FourierMap() = default;
    FourierMap(int baseDim, int fiberDim, int targetDim)
        : d_(baseDim), s_(fiberDim), k_(targetDim) {}

    int base_dim() const { return d_; }
    int fiber_dim() const { return s_; }
    int target_dim() const { return k_; }
    int ambient_dim() const { return d_ + s_; }

    const std::map<FreqVec, Eigen::VectorXcd>& coeffs() const { return c_; }
    bool empty() const { return c_.empty(); }
    size_t support_size() const { return c_.size(); }

    Eigen::VectorXcd coeff(const FreqVec& f) const;
    void set_coeff(const FreqVec& f, const Eigen::VectorXcd& v);   // drops ~zero rows
    void add_coeff(const FreqVec& f, const Eigen::VectorXcd& v);

    // max |.|_inf of supported frequencies, per-axis and overall
    int bandwidth() const;
    std::vector<int> per_axis_bandwidth() const;

    // real part of the trigonometric sum at z = (x, y); |Im| tracked by tests
    Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const;
    Eigen::VectorXcd evaluate_complex(const Eigen::VectorXd& z) const;

    // arithmetic
    FourierMap& operator+=(const FourierMap& o);
    FourierMap& operator-=(const FourierMap& o);
    FourierMap& operator*=(Cplx a);
    friend FourierMap operator+(FourierMap a, const FourierMap& b) { return a += b; }
    friend FourierMap operator-(FourierMap a, const FourierMap& b) { return a -= b; }
    friend FourierMap operator*(Cplx a, FourierMap f) { return f *= a; }

    // drop coefficients with row norm < tol (absolute); returns dropped mass
    double prune(double tol);

    bool is_real_symmetric(double tol = 1e-9) const;
    // average with the conjugate mirror; returns the asymmetry defect removed
    double symmetrize_reality();

    // target-space ops
    FourierMap component(int j) const;                          // k=1 slice
    FourierMap components(int lo, int count) const;
    static FourierMap join(const FourierMap& top, const FourierMap& bottom);
    FourierMap matrix_applied(const Eigen::MatrixXcd& T) const; // coeff -> T coeff

private:
    int d_ = 0, s_ = 0, k_ = 0;
    std::map<FreqVec, Eigen::VectorXcd> c_;
};

// f(Mx, y): reindex base frequency n -> M^T n, coefficients unchanged.
FourierMap pullback(const FourierMap& f, const LatticeMatrix& M);
// f(Mx, y + theta): pullback plus the fiber phase e^{2 pi i <m, theta>}.
FourierMap model_precompose(const FourierMap& f, const LatticeMatrix& M,
                            const std::vector<double>& theta);

// sum over support of (1 + 2 pi |(n,m)|_2)^r |coeff|_2
double cr_majorant(const FourierMap& f, int r);

struct SmoothingParams {
    double cutoff = 1.0;  // N > 0
    enum class Profile { Sharp, Smooth } profile = Profile::Smooth;
};

// (S_N f, R_N f); S_N scales by chi(|(n,m)|/N), R_N = f - S_N f exactly.
std::pair<FourierMap, FourierMap> smooth_truncate(const FourierMap& f, const SmoothingParams& p);

FourierMap base_average(const FourierMap& f);          // n = 0 part
FourierMap subtract_base_average(const FourierMap& f);

// ---- grids -------------------------------------------------------------

struct GridSpec {
    std::vector<int> sizes;  // one per axis, ambient order (base then fiber)
    int64_t points() const {
        int64_t p = 1;
        for (int g : sizes) p *= g;
        return p;
    }
};

int next_5smooth(int n);
// per-axis sizes >= oversample * bw + 1, 5-smooth, capped; flags the cap
GridSpec grid_for_bandwidth(const std::vector<int>& bw, double oversample, int cap, bool* capped = nullptr);

struct GridData {
    GridSpec spec;
    int k = 0;
    std::vector<Cplx> vals;  // point-major, row-major over axes, k per point
};

// row-major grid points in [0,1)^{d+s}, npts x dim flat array
std::vector<double> grid_points(const GridSpec& spec);

// forward sampling via evaluation at all grid points (uses the point kernel)
GridData sample_on_grid(const FourierMap& f, const GridSpec& spec, int threads = 1);

// inverse transform: FFT per axis, drops |coeff| < dropTol * maxMag, adds the
// dropped mass to *droppedMass when given
FourierMap grid_to_fourier(const GridData& g, int baseDim, int fiberDim,
                           double dropTol = 1e-14, double* droppedMass = nullptr);

// ---- point-evaluation kernels (OpenMP + serial reference) --------------

// out: npts x k reals (real parts). pts: npts x (d+s) flat.
void evaluate_at_points(const FourierMap& f, const std::vector<double>& pts,
                        std::vector<double>& out, int threads = 1);
void evaluate_at_points_serial(const FourierMap& f, const std::vector<double>& pts,
                               std::vector<double>& out);

// in-place mixed-radix FFT along each axis of a multi-axis array; sign = +1
// turns spectral indices into samples, -1 inverts (unnormalized).
void fft_axes(std::vector<Cplx>& data, const GridSpec& spec, int k, int sign, int threads = 1);
void fft_axes_serial(std::vector<Cplx>& data, const GridSpec& spec, int k, int sign);

// ---- composition --------------------------------------------------------

struct ComposeOptions {
    double oversample = 4.0;
    double dropTol = 1e-14;
    int threads = 1;
    int gridCap = 1296;    // per-axis hard cap
    double pruneAbs = 0.0; // absolute post-prune threshold; dropped mass goes to the budget
};

// f o (id + h); h maps T^{d+s} -> R^{d+s}. Requires cr_majorant(h,1) < 1/4.
FourierMap compose_with_map(const FourierMap& f, const FourierMap& h,
                            const ComposeOptions& opts = {}, double* aliasBudget = nullptr);

// g with (id+h) o (id+g) = id, via the pointwise fixed point g <- -h o (id+g).
FourierMap invert_near_identity(const FourierMap& h, const ComposeOptions& opts = {},
                                double* defect = nullptr);

// deterministic band-limited random real map, normalized so that
// cr_majorant(., normOrder) == amplitude (when nonzero)
FourierMap random_real_map(int d, int s, int k, int bandwidth, double amplitude,
                           uint64_t seed, int normOrder = 1);

}  // namespace torconj
