#include "torconj/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef TORCONJ_HAVE_OPENMP
#include <omp.h>
#endif

namespace torconj {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kZeroRow = 1e-300;

struct SplitMix {
    uint64_t s;
    explicit SplitMix(uint64_t seed) : s(seed) {}
    uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double sym() { return 2.0 * (static_cast<double>(next() >> 11) * 0x1p-53) - 1.0; }
};

FreqVec negate(const FreqVec& f) {
    FreqVec g(f.size());
    for (size_t i = 0; i < f.size(); ++i) g[i] = -f[i];
    return g;
}

double freq_norm(const FreqVec& f) {
    double s = 0;
    for (int v : f) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

}  // namespace

Eigen::VectorXcd FourierMap::coeff(const FreqVec& f) const {
    auto it = c_.find(f);
    if (it != c_.end()) return it->second;
    return Eigen::VectorXcd::Zero(k_);
}

void FourierMap::set_coeff(const FreqVec& f, const Eigen::VectorXcd& v) {
    if (static_cast<int>(f.size()) != d_ + s_ || v.size() != k_)
        throw std::invalid_argument("FourierMap::set_coeff: shape mismatch");
    if (v.norm() < kZeroRow)
        c_.erase(f);
    else
        c_[f] = v;
}

void FourierMap::add_coeff(const FreqVec& f, const Eigen::VectorXcd& v) {
    set_coeff(f, coeff(f) + v);
}

int FourierMap::bandwidth() const {
    int b = 0;
    for (const auto& [f, v] : c_)
        for (int x : f) b = std::max(b, std::abs(x));
    return b;
}

std::vector<int> FourierMap::per_axis_bandwidth() const {
    std::vector<int> b(static_cast<size_t>(d_ + s_), 0);
    for (const auto& [f, v] : c_)
        for (size_t a = 0; a < f.size(); ++a) b[a] = std::max(b[a], std::abs(f[a]));
    return b;
}

Eigen::VectorXcd FourierMap::evaluate_complex(const Eigen::VectorXd& z) const {
    if (z.size() != d_ + s_) throw std::invalid_argument("evaluate: point dimension mismatch");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(k_);
    for (const auto& [f, v] : c_) {
        double ph = 0;
        for (size_t a = 0; a < f.size(); ++a) ph += f[a] * z(static_cast<int>(a));
        acc += v * std::polar(1.0, kTwoPi * ph);
    }
    return acc;
}

Eigen::VectorXd FourierMap::evaluate(const Eigen::VectorXd& z) const {
    return evaluate_complex(z).real();
}

FourierMap& FourierMap::operator+=(const FourierMap& o) {
    for (const auto& [f, v] : o.c_) add_coeff(f, v);
    return *this;
}

FourierMap& FourierMap::operator-=(const FourierMap& o) {
    for (const auto& [f, v] : o.c_) add_coeff(f, -v);
    return *this;
}

FourierMap& FourierMap::operator*=(Cplx a) {
    if (a == Cplx(0.0, 0.0)) {
        c_.clear();
        return *this;
    }
    for (auto& [f, v] : c_) v *= a;
    return *this;
}

double FourierMap::prune(double tol) {
    double dropped = 0;
    for (auto it = c_.begin(); it != c_.end();) {
        double n = it->second.norm();
        if (n < tol) {
            dropped += n;
            it = c_.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

bool FourierMap::is_real_symmetric(double tol) const {
    for (const auto& [f, v] : c_) {
        auto it = c_.find(negate(f));
        Eigen::VectorXcd mirror = (it == c_.end()) ? Eigen::VectorXcd::Zero(k_) : it->second;
        if ((v - mirror.conjugate()).norm() > tol) return false;
    }
    return true;
}

double FourierMap::symmetrize_reality() {
    double defect = 0;
    std::map<FreqVec, Eigen::VectorXcd> out;
    for (const auto& [f, v] : c_) {
        auto it = c_.find(negate(f));
        Eigen::VectorXcd mirror = (it == c_.end()) ? Eigen::VectorXcd::Zero(k_) : it->second;
        Eigen::VectorXcd sym = 0.5 * (v + mirror.conjugate());
        defect = std::max(defect, (v - sym).norm());
        if (sym.norm() >= kZeroRow) out[f] = sym;
    }
    c_ = std::move(out);
    return defect;
}

FourierMap FourierMap::component(int j) const { return components(j, 1); }

FourierMap FourierMap::components(int lo, int count) const {
    FourierMap out(d_, s_, count);
    for (const auto& [f, v] : c_) out.set_coeff(f, v.segment(lo, count));
    return out;
}

FourierMap FourierMap::join(const FourierMap& top, const FourierMap& bottom) {
    if (top.d_ != bottom.d_ || top.s_ != bottom.s_)
        throw std::invalid_argument("FourierMap::join: dims mismatch");
    FourierMap out(top.d_, top.s_, top.k_ + bottom.k_);
    for (const auto& [f, v] : top.c_) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(out.k_);
        w.head(top.k_) = v;
        out.add_coeff(f, w);
    }
    for (const auto& [f, v] : bottom.c_) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(out.k_);
        w.tail(bottom.k_) = v;
        out.add_coeff(f, w);
    }
    return out;
}

FourierMap FourierMap::matrix_applied(const Eigen::MatrixXcd& T) const {
    if (T.cols() != k_) throw std::invalid_argument("matrix_applied: shape mismatch");
    FourierMap out(d_, s_, static_cast<int>(T.rows()));
    for (const auto& [f, v] : c_) out.set_coeff(f, T * v);
    return out;
}

FourierMap pullback(const FourierMap& f, const LatticeMatrix& M) {
    return model_precompose(f, M, std::vector<double>(static_cast<size_t>(f.fiber_dim()), 0.0));
}

FourierMap model_precompose(const FourierMap& f, const LatticeMatrix& M,
                            const std::vector<double>& theta) {
    if (M.dim() != f.base_dim()) throw std::invalid_argument("model_precompose: base dim mismatch");
    if (static_cast<int>(theta.size()) != f.fiber_dim())
        throw std::invalid_argument("model_precompose: shift dim mismatch");
    LatticeMatrix Mt = M.transpose();
    FourierMap out(f.base_dim(), f.fiber_dim(), f.target_dim());
    for (const auto& [fr, v] : f.coeffs()) {
        std::vector<int> n(fr.begin(), fr.begin() + f.base_dim());
        std::vector<int> nn = Mt.apply(n);
        FreqVec g(fr.size());
        std::copy(nn.begin(), nn.end(), g.begin());
        std::copy(fr.begin() + f.base_dim(), fr.end(), g.begin() + f.base_dim());
        double ph = 0;
        for (int a = 0; a < f.fiber_dim(); ++a) ph += fr[static_cast<size_t>(f.base_dim()) + a] * theta[a];
        out.add_coeff(g, v * std::polar(1.0, kTwoPi * ph));
    }
    return out;
}

double cr_majorant(const FourierMap& f, int r) {
    if (r < 0) throw std::invalid_argument("cr_majorant: r >= 0 required");
    double s = 0;
    for (const auto& [fr, v] : f.coeffs())
        s += std::pow(1.0 + kTwoPi * freq_norm(fr), r) * v.norm();
    return s;
}

namespace {
double chi_smooth(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    auto psi = [](double u) { return (u > 0) ? std::exp(-1.0 / u) : 0.0; };
    double a = psi(1.0 - t), b = psi(t - 0.5);
    return a / (a + b);
}
}  // namespace

std::pair<FourierMap, FourierMap> smooth_truncate(const FourierMap& f, const SmoothingParams& p) {
    if (p.cutoff <= 0) throw std::invalid_argument("smooth_truncate: cutoff must be positive");
    FourierMap sN(f.base_dim(), f.fiber_dim(), f.target_dim());
    FourierMap rN(f.base_dim(), f.fiber_dim(), f.target_dim());
    for (const auto& [fr, v] : f.coeffs()) {
        double t = freq_norm(fr) / p.cutoff;
        double chi = (p.profile == SmoothingParams::Profile::Sharp) ? (t <= 1.0 ? 1.0 : 0.0)
                                                                    : chi_smooth(t);
        Eigen::VectorXcd sv = chi * v;
        if (chi != 0.0) sN.set_coeff(fr, sv);
        if (chi != 1.0) rN.set_coeff(fr, v - sv);  // exact S_N + R_N = id
    }
    return {std::move(sN), std::move(rN)};
}

FourierMap base_average(const FourierMap& f) {
    FourierMap out(f.base_dim(), f.fiber_dim(), f.target_dim());
    for (const auto& [fr, v] : f.coeffs()) {
        bool zero = true;
        for (int a = 0; a < f.base_dim(); ++a) zero = zero && fr[a] == 0;
        if (zero) out.set_coeff(fr, v);
    }
    return out;
}

FourierMap subtract_base_average(const FourierMap& f) { return f - base_average(f); }

// ---- grids --------------------------------------------------------------

int next_5smooth(int n) {
    n = std::max(n, 1);
    for (int c = n;; ++c) {
        int x = c;
        for (int p : {2, 3, 5})
            while (x % p == 0) x /= p;
        if (x == 1) return c;
    }
}

GridSpec grid_for_bandwidth(const std::vector<int>& bw, double oversample, int cap, bool* capped) {
    GridSpec spec;
    if (capped) *capped = false;
    for (int b : bw) {
        int want = static_cast<int>(std::ceil(oversample * std::max(b, 1))) + 1;
        int g = next_5smooth(want);
        if (g > cap) {
            g = cap;
            while (next_5smooth(g) != g) --g;
            if (capped) *capped = true;
        }
        spec.sizes.push_back(g);
    }
    return spec;
}

std::vector<double> grid_points(const GridSpec& spec) {
    int dim = static_cast<int>(spec.sizes.size());
    int64_t npts = spec.points();
    std::vector<double> pts(static_cast<size_t>(npts) * dim);
    std::vector<int> idx(static_cast<size_t>(dim), 0);
    for (int64_t p = 0; p < npts; ++p) {
        for (int a = 0; a < dim; ++a)
            pts[static_cast<size_t>(p) * dim + a] =
                static_cast<double>(idx[a]) / spec.sizes[a];
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[a] < spec.sizes[a]) break;
            idx[a] = 0;
        }
    }
    return pts;
}

// ---- FFT ----------------------------------------------------------------

namespace {

void fft_rec(const Cplx* in, Cplx* out, int n, int stride, int wstep,
             const std::vector<Cplx>& w, int wsize) {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    int p = 2;
    while (n % p != 0) ++p;
    int m = n / p;
    for (int r = 0; r < p; ++r)
        fft_rec(in + static_cast<ptrdiff_t>(r) * stride, out + static_cast<ptrdiff_t>(r) * m,
                m, stride * p, wstep * p, w, wsize);
    std::vector<Cplx> t(static_cast<size_t>(p)), line(static_cast<size_t>(n));
    for (int k2 = 0; k2 < m; ++k2) {
        for (int r = 0; r < p; ++r) t[static_cast<size_t>(r)] = out[static_cast<ptrdiff_t>(r) * m + k2];
        for (int k1 = 0; k1 < p; ++k1) {
            int k = k1 * m + k2;
            Cplx s(0.0, 0.0);
            for (int r = 0; r < p; ++r) {
                int64_t wi = (static_cast<int64_t>(r) * k % n) * wstep;
                s += t[static_cast<size_t>(r)] * w[static_cast<size_t>(wi)];
            }
            line[static_cast<size_t>(k)] = s;
        }
    }
    std::copy(line.begin(), line.end(), out);
}

void fft_axes_impl(std::vector<Cplx>& data, const GridSpec& spec, int k, int sign, int threads) {
    int dim = static_cast<int>(spec.sizes.size());
    int64_t npts = spec.points();
    if (static_cast<int64_t>(data.size()) != npts * k)
        throw std::invalid_argument("fft_axes: data size mismatch");
    for (int a = 0; a < dim; ++a) {
        int G = spec.sizes[a];
        if (G == 1) continue;
        int64_t inner = 1;
        for (int b = a + 1; b < dim; ++b) inner *= spec.sizes[b];
        int64_t outer = npts / (inner * G);
        std::vector<Cplx> w(static_cast<size_t>(G));
        for (int j = 0; j < G; ++j) w[static_cast<size_t>(j)] = std::polar(1.0, sign * kTwoPi * j / G);
        int64_t nlines = outer * inner * k;

#ifdef TORCONJ_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1)) if (threads > 1)
#endif
        for (int64_t ln = 0; ln < nlines; ++ln) {
            int comp = static_cast<int>(ln % k);
            int64_t rest = ln / k;
            int64_t in = rest % inner, out = rest / inner;
            int64_t base = (out * G * inner + in) * k + comp;
            int64_t stridePts = inner * k;
            std::vector<Cplx> lineIn(static_cast<size_t>(G)), lineOut(static_cast<size_t>(G));
            for (int j = 0; j < G; ++j) lineIn[static_cast<size_t>(j)] = data[static_cast<size_t>(base + j * stridePts)];
            fft_rec(lineIn.data(), lineOut.data(), G, 1, 1, w, G);
            for (int j = 0; j < G; ++j) data[static_cast<size_t>(base + j * stridePts)] = lineOut[static_cast<size_t>(j)];
        }
    }
}

}  // namespace

void fft_axes(std::vector<Cplx>& data, const GridSpec& spec, int k, int sign, int threads) {
    fft_axes_impl(data, spec, k, sign, threads);
}

void fft_axes_serial(std::vector<Cplx>& data, const GridSpec& spec, int k, int sign) {
    // reference path: plain per-line DFT, no recursion, no threading
    int dim = static_cast<int>(spec.sizes.size());
    int64_t npts = spec.points();
    for (int a = 0; a < dim; ++a) {
        int G = spec.sizes[a];
        if (G == 1) continue;
        int64_t inner = 1;
        for (int b = a + 1; b < dim; ++b) inner *= spec.sizes[b];
        int64_t outer = npts / (inner * G);
        std::vector<Cplx> w(static_cast<size_t>(G));
        for (int j = 0; j < G; ++j) w[static_cast<size_t>(j)] = std::polar(1.0, sign * kTwoPi * j / G);
        std::vector<Cplx> line(static_cast<size_t>(G));
        for (int64_t out = 0; out < outer; ++out)
            for (int64_t in = 0; in < inner; ++in)
                for (int comp = 0; comp < k; ++comp) {
                    int64_t base = (out * G * inner + in) * k + comp;
                    int64_t stridePts = inner * k;
                    for (int t = 0; t < G; ++t) {
                        Cplx s(0.0, 0.0);
                        for (int j = 0; j < G; ++j)
                            s += data[static_cast<size_t>(base + j * stridePts)] *
                                 w[static_cast<size_t>((static_cast<int64_t>(j) * t) % G)];
                        line[static_cast<size_t>(t)] = s;
                    }
                    for (int t = 0; t < G; ++t) data[static_cast<size_t>(base + t * stridePts)] = line[static_cast<size_t>(t)];
                }
    }
}

GridData sample_on_grid(const FourierMap& f, const GridSpec& spec, int threads) {
    int dim = f.ambient_dim();
    if (static_cast<int>(spec.sizes.size()) != dim)
        throw std::invalid_argument("sample_on_grid: axis count mismatch");
    auto bw = f.per_axis_bandwidth();
    for (int a = 0; a < dim; ++a)
        if (spec.sizes[a] < 2 * bw[a] + 1) throw std::runtime_error("aliasing");

    GridData g;
    g.spec = spec;
    g.k = f.target_dim();
    g.vals.assign(static_cast<size_t>(spec.points()) * g.k, Cplx(0.0, 0.0));
    for (const auto& [fr, v] : f.coeffs()) {
        int64_t idx = 0;
        for (int a = 0; a < dim; ++a) {
            int q = fr[a] % spec.sizes[a];
            if (q < 0) q += spec.sizes[a];
            idx = idx * spec.sizes[a] + q;
        }
        for (int j = 0; j < g.k; ++j) g.vals[static_cast<size_t>(idx) * g.k + j] += v(j);
    }
    fft_axes(g.vals, spec, g.k, +1, threads);
    return g;
}

FourierMap grid_to_fourier(const GridData& g, int baseDim, int fiberDim,
                           double dropTol, double* droppedMass) {
    int dim = static_cast<int>(g.spec.sizes.size());
    if (dim != baseDim + fiberDim) throw std::invalid_argument("grid_to_fourier: dims mismatch");
    int64_t npts = g.spec.points();
    std::vector<Cplx> spec = g.vals;
    fft_axes(spec, g.spec, g.k, -1, 1);
    double scale = 1.0 / static_cast<double>(npts);

    double maxMag = 0;
    for (int64_t p = 0; p < npts; ++p) {
        double n2 = 0;
        for (int j = 0; j < g.k; ++j) n2 += std::norm(spec[static_cast<size_t>(p) * g.k + j]);
        maxMag = std::max(maxMag, std::sqrt(n2));
    }
    maxMag *= scale;
    double cut = dropTol * maxMag;

    FourierMap out(baseDim, fiberDim, g.k);
    double dropped = 0;
    std::vector<int> idx(static_cast<size_t>(dim), 0);
    for (int64_t p = 0; p < npts; ++p) {
        Eigen::VectorXcd v(g.k);
        for (int j = 0; j < g.k; ++j) v(j) = spec[static_cast<size_t>(p) * g.k + j] * scale;
        double nrm = v.norm();
        if (nrm >= cut && nrm >= kZeroRow) {
            FreqVec fr(static_cast<size_t>(dim));
            for (int a = 0; a < dim; ++a) {
                int G = g.spec.sizes[a];
                fr[a] = (idx[a] <= G / 2) ? idx[a] : idx[a] - G;
            }
            out.set_coeff(fr, v);
        } else {
            dropped += nrm;
        }
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[a] < g.spec.sizes[a]) break;
            idx[a] = 0;
        }
    }
    if (droppedMass) *droppedMass += dropped;
    return out;
}

// ---- point kernels ------------------------------------------------------

namespace {

void eval_points_cplx(const FourierMap& f, const std::vector<double>& pts,
                      std::vector<Cplx>& out, int threads) {
    int dim = f.ambient_dim(), k = f.target_dim();
    int64_t npts = static_cast<int64_t>(pts.size()) / dim;
    out.assign(static_cast<size_t>(npts) * k, Cplx(0.0, 0.0));
    if (f.empty()) return;
    // flatten coefficients for tight loops; map order fixes the summation order
    std::vector<int> freqs;
    std::vector<Cplx> coef;
    freqs.reserve(f.support_size() * dim);
    coef.reserve(f.support_size() * k);
    for (const auto& [fr, v] : f.coeffs()) {
        for (int a = 0; a < dim; ++a) freqs.push_back(fr[a]);
        for (int j = 0; j < k; ++j) coef.push_back(v(j));
    }
    int64_t nsup = static_cast<int64_t>(f.support_size());

    // per-point per-axis power tables: e^{2 pi i <nu, z>} factors into axis
    // powers, so each coefficient costs dim multiplies instead of a polar call
    auto bw = f.per_axis_bandwidth();
    std::vector<int> off(static_cast<size_t>(dim), 0);
    int tabSize = 0;
    for (int a = 0; a < dim; ++a) {
        off[static_cast<size_t>(a)] = tabSize;
        tabSize += 2 * bw[a] + 1;
    }

#ifdef TORCONJ_HAVE_OPENMP
#pragma omp parallel num_threads(std::max(threads, 1)) if (threads > 1)
#endif
    {
        std::vector<Cplx> tab(static_cast<size_t>(tabSize));
#ifdef TORCONJ_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
        for (int64_t p = 0; p < npts; ++p) {
            const double* z = &pts[static_cast<size_t>(p) * dim];
            for (int a = 0; a < dim; ++a) {
                Cplx* ta = &tab[static_cast<size_t>(off[static_cast<size_t>(a)])];
                int b = bw[a];
                Cplx w = std::polar(1.0, kTwoPi * z[a]);
                ta[b] = Cplx(1.0, 0.0);
                Cplx up(1.0, 0.0), dn(1.0, 0.0);
                Cplx wc = std::conj(w);
                for (int j = 1; j <= b; ++j) {
                    up *= w;
                    dn *= wc;
                    ta[b + j] = up;
                    ta[b - j] = dn;
                }
            }
            Cplx* o = &out[static_cast<size_t>(p) * k];
            for (int64_t c = 0; c < nsup; ++c) {
                const int* fr = &freqs[static_cast<size_t>(c) * dim];
                Cplx e(1.0, 0.0);
                for (int a = 0; a < dim; ++a)
                    e *= tab[static_cast<size_t>(off[static_cast<size_t>(a)] + bw[a] + fr[a])];
                const Cplx* cv = &coef[static_cast<size_t>(c) * k];
                for (int j = 0; j < k; ++j) o[j] += cv[j] * e;
            }
        }
    }
}

}  // namespace

void evaluate_at_points(const FourierMap& f, const std::vector<double>& pts,
                        std::vector<double>& out, int threads) {
    std::vector<Cplx> tmp;
    eval_points_cplx(f, pts, tmp, threads);
    out.resize(tmp.size());
    for (size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].real();
}

void evaluate_at_points_serial(const FourierMap& f, const std::vector<double>& pts,
                               std::vector<double>& out) {
    // reference: per-point evaluate(), no flattening, no threads
    int dim = f.ambient_dim(), k = f.target_dim();
    int64_t npts = static_cast<int64_t>(pts.size()) / dim;
    out.assign(static_cast<size_t>(npts) * k, 0.0);
    Eigen::VectorXd z(dim);
    for (int64_t p = 0; p < npts; ++p) {
        for (int a = 0; a < dim; ++a) z(a) = pts[static_cast<size_t>(p) * dim + a];
        Eigen::VectorXd v = f.evaluate(z);
        for (int j = 0; j < k; ++j) out[static_cast<size_t>(p) * k + j] = v(j);
    }
}

// ---- composition --------------------------------------------------------

FourierMap compose_with_map(const FourierMap& f, const FourierMap& h,
                            const ComposeOptions& opts, double* aliasBudget) {
    int dim = f.ambient_dim();
    if (h.target_dim() != dim || h.ambient_dim() != dim)
        throw std::invalid_argument("compose_with_map: displacement shape mismatch");
    if (cr_majorant(h, 1) >= 0.25) throw std::runtime_error("not a certified diffeomorphism");

    auto bwf = f.per_axis_bandwidth();
    auto bwh = h.per_axis_bandwidth();
    std::vector<int> bw(static_cast<size_t>(dim));
    for (int a = 0; a < dim; ++a) bw[a] = bwf[a] + bwh[a];
    bool capped = false;
    GridSpec spec = grid_for_bandwidth(bw, opts.oversample, opts.gridCap, &capped);

    auto pts = grid_points(spec);
    int64_t npts = spec.points();

    std::vector<double> hv;
    evaluate_at_points(h, pts, hv, opts.threads);
    std::vector<double> displaced(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) displaced[i] = pts[i] + hv[i];

    std::vector<Cplx> fv;
    eval_points_cplx(f, displaced, fv, opts.threads);

    GridData g;
    g.spec = spec;
    g.k = f.target_dim();
    g.vals = std::move(fv);
    double dropped = capped ? 1e-30 : 0.0;  // cap leaves an unquantified tail; flag it
    FourierMap out = grid_to_fourier(g, f.base_dim(), f.fiber_dim(), opts.dropTol, &dropped);
    if (opts.pruneAbs > 0) dropped += out.prune(opts.pruneAbs);
    if (aliasBudget) *aliasBudget += dropped;
    (void)npts;
    return out;
}

FourierMap invert_near_identity(const FourierMap& h, const ComposeOptions& opts, double* defect) {
    int dim = h.ambient_dim();
    if (h.target_dim() != dim) throw std::invalid_argument("invert_near_identity: shape mismatch");
    if (cr_majorant(h, 1) >= 0.25) throw std::runtime_error("not a certified diffeomorphism");

    bool capped = false;
    GridSpec spec = grid_for_bandwidth(h.per_axis_bandwidth(), opts.oversample, opts.gridCap, &capped);
    auto pts = grid_points(spec);
    int64_t npts = spec.points();

    std::vector<double> g(pts.size(), 0.0), cur = pts, hv;
    double change = 0;
    int it = 0;
    for (; it < 50; ++it) {
        evaluate_at_points(h, cur, hv, opts.threads);
        change = 0;
        for (size_t i = 0; i < g.size(); ++i) {
            double gn = -hv[i];
            change = std::max(change, std::abs(gn - g[i]));
            g[i] = gn;
            cur[i] = pts[i] + gn;
        }
        if (change < 1e-12) break;
    }
    evaluate_at_points(h, cur, hv, opts.threads);
    double def = 0;
    for (size_t i = 0; i < g.size(); ++i) def = std::max(def, std::abs(g[i] + hv[i]));
    if (change >= 1e-12)
        throw std::runtime_error("invert_near_identity: no convergence in 50 iterations, defect " +
                                 std::to_string(def));
    if (defect) *defect = def;

    GridData gd;
    gd.spec = spec;
    gd.k = dim;
    gd.vals.resize(static_cast<size_t>(npts) * dim);
    for (size_t i = 0; i < g.size(); ++i) gd.vals[i] = Cplx(g[i], 0.0);
    FourierMap out = grid_to_fourier(gd, h.base_dim(), h.fiber_dim(), opts.dropTol, nullptr);
    if (opts.pruneAbs > 0 && defect) *defect += out.prune(opts.pruneAbs);
    else if (opts.pruneAbs > 0) out.prune(opts.pruneAbs);
    out.symmetrize_reality();
    return out;
}

FourierMap random_real_map(int d, int s, int k, int bandwidth, double amplitude,
                           uint64_t seed, int normOrder) {
    FourierMap out(d, s, k);
    if (amplitude == 0.0) return out;
    SplitMix rng(seed);
    int dim = d + s;
    std::vector<int> fr(static_cast<size_t>(dim), -bandwidth);
    while (true) {
        // canonical representative: first nonzero entry positive
        int firstNonzero = 0;
        for (int a = 0; a < dim; ++a)
            if (fr[a] != 0) {
                firstNonzero = fr[a];
                break;
            }
        if (firstNonzero > 0) {
            Eigen::VectorXcd v(k);
            for (int j = 0; j < k; ++j) v(j) = Cplx(rng.sym(), rng.sym());
            out.set_coeff(fr, v);
            out.set_coeff(negate(fr), v.conjugate());
        } else if (firstNonzero == 0) {
            Eigen::VectorXcd v(k);
            for (int j = 0; j < k; ++j) v(j) = Cplx(rng.sym(), 0.0);
            out.set_coeff(fr, v);
        }
        int a = dim - 1;
        while (a >= 0 && fr[a] == bandwidth) fr[a--] = -bandwidth;
        if (a < 0) break;
        ++fr[a];
    }
    double m = cr_majorant(out, normOrder);
    if (m > 0) out *= Cplx(amplitude / m, 0.0);
    return out;
}

}  // namespace torconj
