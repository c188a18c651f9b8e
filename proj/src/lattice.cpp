#include "torconj/lattice.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>

namespace torconj {

namespace {

using i128 = __int128;

long long checked_ll(i128 v, const char* where) {
    if (v > i128(INT64_MAX) / 4 || v < i128(INT64_MIN) / 4)
        throw std::overflow_error(std::string("integer overflow in ") + where);
    return static_cast<long long>(v);
}

// Fraction-free Bareiss determinant.
i128 det128(std::vector<i128> m, int n) {
    i128 sign = 1, prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m[k * n + k] == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (m[i * n + k] != 0) { p = i; break; }
            if (p < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[p * n + j]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
        prev = m[k * n + k];
    }
    return sign * m[(n - 1) * n + (n - 1)];
}

}  // namespace

LatticeMatrix::LatticeMatrix(int dim, std::vector<long long> entries)
    : dim_(dim), a_(std::move(entries)) {
    if (dim <= 0 || a_.size() != static_cast<size_t>(dim) * dim)
        throw std::invalid_argument("LatticeMatrix: bad shape");
    long long d = det();
    if (d != 1 && d != -1)
        throw std::invalid_argument("LatticeMatrix: matrix is not unimodular (det=" + std::to_string(d) + ")");
}

LatticeMatrix LatticeMatrix::identity(int dim) {
    std::vector<long long> e(static_cast<size_t>(dim) * dim, 0);
    for (int i = 0; i < dim; ++i) e[static_cast<size_t>(i) * dim + i] = 1;
    return LatticeMatrix(dim, std::move(e));
}

long long LatticeMatrix::det() const {
    std::vector<i128> m(a_.begin(), a_.end());
    return checked_ll(det128(std::move(m), dim_), "det");
}

LatticeMatrix LatticeMatrix::transpose() const {
    std::vector<long long> e(a_.size());
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            e[static_cast<size_t>(j) * dim_ + i] = (*this)(i, j);
    return LatticeMatrix(dim_, std::move(e));
}

LatticeMatrix LatticeMatrix::inverse() const {
    // adjugate via signed minors; det = ±1 so division is exact.
    int n = dim_;
    long long d = det();
    std::vector<long long> inv(a_.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::vector<i128> minor;
            minor.reserve(static_cast<size_t>(n - 1) * (n - 1));
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                for (int c = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor.push_back((*this)(r, c));
                }
            }
            i128 cof = (n == 1) ? 1 : det128(std::move(minor), n - 1);
            if ((i + j) % 2 != 0) cof = -cof;
            // adj(M)_{ji} = cof; inverse = adj / det.
            inv[static_cast<size_t>(j) * n + i] = checked_ll(cof * d, "inverse");  // d = ±1: 1/d = d
        }
    }
    return LatticeMatrix(n, std::move(inv));
}

LatticeMatrix LatticeMatrix::operator*(const LatticeMatrix& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("LatticeMatrix: dim mismatch");
    int n = dim_;
    std::vector<long long> e(a_.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            i128 s = 0;
            for (int k = 0; k < n; ++k) s += i128((*this)(i, k)) * o(k, j);
            e[static_cast<size_t>(i) * n + j] = checked_ll(s, "matrix product");
        }
    return LatticeMatrix(n, std::move(e));
}

LatticeMatrix LatticeMatrix::pow(long long k) const {
    LatticeMatrix base = (k >= 0) ? *this : inverse();
    long long e = std::llabs(k);
    LatticeMatrix r = identity(dim_);
    while (e > 0) {
        if (e & 1) r = r * base;
        base = base * base;
        e >>= 1;
    }
    return r;
}

std::vector<long long> LatticeMatrix::apply(const std::vector<long long>& v) const {
    if (static_cast<int>(v.size()) != dim_) throw std::invalid_argument("apply: size mismatch");
    std::vector<long long> r(dim_);
    for (int i = 0; i < dim_; ++i) {
        i128 s = 0;
        for (int j = 0; j < dim_; ++j) s += i128((*this)(i, j)) * v[j];
        r[i] = checked_ll(s, "apply");
    }
    return r;
}

std::vector<int> LatticeMatrix::apply(const std::vector<int>& v) const {
    std::vector<long long> w(v.begin(), v.end());
    auto r = apply(w);
    std::vector<int> out(r.size());
    for (size_t i = 0; i < r.size(); ++i) {
        if (r[i] > INT32_MAX || r[i] < INT32_MIN) throw std::overflow_error("apply: frequency overflow");
        out[i] = static_cast<int>(r[i]);
    }
    return out;
}

Eigen::MatrixXd LatticeMatrix::to_double() const {
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) m(i, j) = static_cast<double>((*this)(i, j));
    return m;
}

LatticeMatrix dual(const LatticeMatrix& M) { return M.transpose().inverse(); }

std::vector<long long> char_poly(const LatticeMatrix& M) {
    // Faddeev–LeVerrier; all divisions are exact.
    int n = M.dim();
    std::vector<i128> Mi(M.entries().begin(), M.entries().end());
    std::vector<i128> Nk(static_cast<size_t>(n) * n, 0);  // running matrix
    for (int i = 0; i < n; ++i) Nk[static_cast<size_t>(i) * n + i] = 1;  // N_0 = I
    std::vector<long long> c(static_cast<size_t>(n) + 1, 0);
    c[n] = 1;
    std::vector<i128> MN(static_cast<size_t>(n) * n);
    for (int k = 1; k <= n; ++k) {
        // MN = M * Nk
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                i128 s = 0;
                for (int l = 0; l < n; ++l) s += Mi[static_cast<size_t>(i) * n + l] * Nk[static_cast<size_t>(l) * n + j];
                MN[static_cast<size_t>(i) * n + j] = s;
            }
        i128 tr = 0;
        for (int i = 0; i < n; ++i) tr += MN[static_cast<size_t>(i) * n + i];
        i128 ck = -tr / k;  // exact
        c[n - k] = checked_ll(ck, "char_poly");
        Nk = MN;
        for (int i = 0; i < n; ++i) Nk[static_cast<size_t>(i) * n + i] += ck;
    }
    return c;
}

std::vector<int> cyclotomic_orders_up_to_degree(int d) {
    auto phi = [](int k) {
        int r = k;
        for (int p = 2; p * p <= k; ++p)
            if (k % p == 0) {
                r -= r / p;
                while (k % p == 0) k /= p;
            }
        if (k > 1) r -= r / k;
        return r;
    };
    std::vector<int> out;
    for (int k = 1; k <= 2 * d * d + 2; ++k)
        if (phi(k) <= d) out.push_back(k);
    return out;
}

namespace {

// Exact division of monic-divisor integer polynomials; returns false if remainder != 0.
bool poly_divide(const std::vector<long long>& p, const std::vector<long long>& q,
                 std::vector<long long>* quotient) {
    if (q.empty() || q.back() != 1) throw std::invalid_argument("poly_divide: divisor must be monic");
    std::vector<i128> r(p.begin(), p.end());
    int dp = static_cast<int>(p.size()) - 1, dq = static_cast<int>(q.size()) - 1;
    if (dp < dq) return false;
    std::vector<i128> qt(static_cast<size_t>(dp - dq) + 1, 0);
    for (int k = dp - dq; k >= 0; --k) {
        i128 f = r[static_cast<size_t>(k) + dq];
        qt[k] = f;
        for (int j = 0; j <= dq; ++j) r[static_cast<size_t>(k) + j] -= f * q[j];
    }
    for (i128 v : r)
        if (v != 0) return false;
    if (quotient) {
        quotient->resize(qt.size());
        for (size_t i = 0; i < qt.size(); ++i) (*quotient)[i] = checked_ll(qt[i], "poly_divide");
    }
    return true;
}

}  // namespace

std::vector<long long> cyclotomic(int k) {
    // Phi_k = (x^k - 1) / prod_{d|k, d<k} Phi_d.
    std::vector<long long> num(static_cast<size_t>(k) + 1, 0);
    num[0] = -1;
    num[k] = 1;
    for (int d = 1; d < k; ++d) {
        if (k % d != 0) continue;
        auto phi_d = cyclotomic(d);
        std::vector<long long> q;
        if (!poly_divide(num, phi_d, &q))
            throw std::logic_error("cyclotomic: non-exact division");
        num = q;
    }
    return num;
}

bool is_ergodic(const LatticeMatrix& M) {
    auto p = char_poly(M);
    for (int k : cyclotomic_orders_up_to_degree(M.dim())) {
        auto phi = cyclotomic(k);
        if (phi.size() > p.size()) continue;
        if (poly_divide(p, phi, nullptr)) return false;
    }
    return true;
}

SpectralSplitting spectral_splitting(const LatticeMatrix& M, double tol) {
    int n = M.dim();
    SpectralSplitting out{M};
    out.tolerance = tol;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M.to_double());
    Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::MatrixXcd V = es.eigenvectors();

    double cond;
    {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        cond = (smin > 0) ? svd.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
    }
    out.basisCondition = cond;
    Eigen::MatrixXcd recon = V * ev.asDiagonal() * V.inverse();
    if (!std::isfinite(cond) || cond > 1e8 ||
        (recon - M.to_double().cast<std::complex<double>>()).norm() > 1e-6)
        out.semisimple = false;

    auto cls = [&](std::complex<double> l) {
        double m = std::abs(l);
        if (m > 1 + tol) return Subspace::U;
        if (m < 1 - tol) return Subspace::S;
        return Subspace::C;
    };

    Eigen::MatrixXcd selU = Eigen::MatrixXcd::Zero(n, n), selC = selU, selS = selU;
    out.rho = std::numeric_limits<double>::infinity();
    bool anyU = false;
    for (int i = 0; i < n; ++i) {
        Subspace s = cls(ev(i));
        (s == Subspace::U ? selU : s == Subspace::S ? selS : selC)(i, i) = 1.0;
        if (s == Subspace::U) {
            anyU = true;
            out.rho = std::min(out.rho, std::abs(ev(i)));
        }
    }
    if (!anyU) out.rho = 1.0;

    Eigen::MatrixXcd Vi = V.inverse();
    out.projU = (V * selU * Vi).real();
    out.projC = (V * selC * Vi).real();
    out.projS = (V * selS * Vi).real();

    // Real bases: real eigenvector, or (Re, Im) once per conjugate pair.
    for (int i = 0; i < n; ++i) {
        Subspace s = cls(ev(i));
        auto* dst = (s == Subspace::U)   ? &out.unstableBasis
                    : (s == Subspace::S) ? &out.stableBasis
                                         : &out.centerBasis;
        Eigen::VectorXcd v = V.col(i);
        if (std::abs(ev(i).imag()) < 1e-12) {
            Eigen::VectorXd re = v.real();
            if (re.norm() < 1e-12) re = v.imag();
            dst->push_back(re / re.norm());
        } else if (ev(i).imag() > 0) {
            Eigen::VectorXd re = v.real(), im = v.imag();
            if (re.norm() > 1e-12) dst->push_back(re / re.norm());
            if (im.norm() > 1e-12) dst->push_back(im / im.norm());
        }
    }

    // cEstimate: min over unstable basis vectors and 0<=i<=10 of |M^i v| / (rho^i |v|).
    if (anyU) {
        double c = std::numeric_limits<double>::infinity();
        Eigen::MatrixXd Md = M.to_double();
        for (const auto& v0 : out.unstableBasis) {
            Eigen::VectorXd v = out.projU * v0;
            if (v.norm() < 1e-12) continue;
            Eigen::VectorXd w = v;
            for (int i = 0; i <= 10; ++i) {
                c = std::min(c, w.norm() / (std::pow(out.rho, i) * v.norm()));
                w = Md * w;
            }
        }
        out.cEstimate = std::isfinite(c) ? c : 1.0;
    }
    return out;
}

Subspace classify_mostly_in(const Eigen::VectorXd& n, const SpectralSplitting& S) {
    if (n.norm() == 0.0) throw std::invalid_argument("classify_mostly_in: zero vector");
    double u = (S.projU * n).norm(), s = (S.projS * n).norm(), c = (S.projC * n).norm();
    if (u >= s && u >= c) return Subspace::U;
    if (s >= c) return Subspace::S;
    return Subspace::C;
}

Subspace classify_mostly_in(const std::vector<int>& n, const SpectralSplitting& S) {
    Eigen::VectorXd v(n.size());
    for (size_t i = 0; i < n.size(); ++i) v(static_cast<int>(i)) = n[i];
    return classify_mostly_in(v, S);
}

namespace {
void scan_lattice(int dim, int radius, const std::function<void(const Eigen::VectorXd&)>& fn) {
    std::vector<int> v(dim, -radius);
    while (true) {
        bool zero = std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
        if (!zero) {
            Eigen::VectorXd x(dim);
            for (int i = 0; i < dim; ++i) x(i) = v[i];
            if (x.norm() <= radius) fn(x);
        }
        int i = dim - 1;
        while (i >= 0 && v[i] == radius) v[i--] = -radius;
        if (i < 0) break;
        ++v[i];
    }
}
}  // namespace

double katznelson_gamma_estimate(const SpectralSplitting& S, int radius) {
    if (S.unstableBasis.empty()) throw std::runtime_error("no expanding directions");
    int d = S.source.dim();
    double best = std::numeric_limits<double>::infinity();
    scan_lattice(d, radius, [&](const Eigen::VectorXd& n) {
        best = std::min(best, (S.projU * n).norm() * std::pow(n.norm(), d));
    });
    return best;
}

HigherRankReport higher_rank_window(const LatticeMatrix& A, const LatticeMatrix& B, int L) {
    if (A * B != B * A) throw std::invalid_argument("generators do not commute");
    if (L < 1) throw std::invalid_argument("higher_rank_window: L >= 1 required");
    HigherRankReport rep;
    rep.window = L;
    for (int l = -L; l <= L; ++l)
        for (int k = -L; k <= L; ++k) {
            if (std::max(std::abs(l), std::abs(k)) == 0) continue;
            if (!is_ergodic(A.pow(l) * B.pow(k))) rep.failures.emplace_back(l, k);
        }

    // kappa0: least-squares slope of min_n log|(A*)^l (B*)^k n| vs max(|l|,|k|).
    LatticeMatrix Ad = dual(A), Bd = dual(B);
    int d = A.dim();
    std::vector<Eigen::VectorXd> sample;
    scan_lattice(d, 2, [&](const Eigen::VectorXd& n) { sample.push_back(n); });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int l = -L; l <= L; ++l)
        for (int k = -L; k <= L; ++k) {
            int r = std::max(std::abs(l), std::abs(k));
            if (r == 0) continue;
            Eigen::MatrixXd P = (Ad.pow(l) * Bd.pow(k)).to_double();
            double mn = std::numeric_limits<double>::infinity();
            for (const auto& n : sample) mn = std::min(mn, (P * n).norm());
            double x = r, y = std::log(std::max(mn, 1e-300));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++cnt;
        }
    double denom = cnt * sxx - sx * sx;
    rep.kappa0Estimate = (denom != 0) ? std::max(0.0, (cnt * sxy - sx * sy) / denom) : 0.0;
    return rep;
}

}  // namespace torconj
