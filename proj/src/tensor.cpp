// SPDX-License-Identifier: Apache-2.0
#include "ellopt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ellopt {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

void check_same(int a, int b) {
    if (a != b) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

Vec::Vec(int dim) : dim_(dim) { check_dim(dim); }

Vec::Vec(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    check_dim(dim_);
    int i = 0;
    for (double x : xs) v_[static_cast<std::size_t>(i++)] = x;
}

Vec Vec::zero(int dim) { return Vec(dim); }

Vec Vec::axis(int dim, int k) {
    Vec e(dim);
    if (k < 0 || k >= dim) throw std::invalid_argument("axis out of range");
    e[k] = 1.0;
    return e;
}

double Vec::dot(const Vec& o) const {
    check_same(dim_, o.dim_);
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (*this)[i] * o[i];
    return s;
}

double Vec::norm() const { return std::sqrt(dot(*this)); }

Vec Vec::normalized() const {
    const double n = norm();
    if (n < 1e-300) throw std::invalid_argument("cannot normalize zero vector");
    return *this * (1.0 / n);
}

bool Vec::is_unit(double tol) const { return std::abs(norm() - 1.0) <= tol; }

Vec Vec::operator+(const Vec& o) const {
    check_same(dim_, o.dim_);
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = (*this)[i] + o[i];
    return r;
}

Vec Vec::operator-(const Vec& o) const {
    check_same(dim_, o.dim_);
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = (*this)[i] - o[i];
    return r;
}

Vec Vec::operator*(double s) const {
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = (*this)[i] * s;
    return r;
}

Vec Vec::operator-() const { return *this * -1.0; }

Vec rot90(const Vec& v) {
    if (v.dim() != 2) throw std::invalid_argument("rot90 requires dim 2");
    return Vec{-v[1], v[0]};
}

Vec orthogonal_unit(const Vec& v) {
    const Vec u = v.normalized();
    if (u.dim() == 2) return rot90(u);
    if (u.dim() != 3) throw std::invalid_argument("orthogonal_unit requires dim 2 or 3");
    // Axis least aligned with u, then Gram-Schmidt.
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(u[i]) < std::abs(u[k])) k = i;
    Vec e = Vec::axis(3, k);
    Vec w = e - u * u.dot(e);
    return w.normalized();
}

SMat::SMat(int dim) : dim_(dim) { check_dim(dim); }

int SMat::tri_index(int i, int j) {
    if (i > j) std::swap(i, j);
    // (0,0)->0 (0,1)->1 (0,2)->2 (1,1)->3 (1,2)->4 (2,2)->5
    static constexpr int base[3] = {0, 3, 5};
    return base[i] + (j - i);
}

double SMat::operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(tri_index(i, j))];
}

void SMat::set(int i, int j, double value) {
    a_[static_cast<std::size_t>(tri_index(i, j))] = value;
}

void SMat::add(int i, int j, double value) {
    a_[static_cast<std::size_t>(tri_index(i, j))] += value;
}

SMat SMat::identity(int dim) {
    SMat m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

SMat SMat::diag(std::initializer_list<double> d) {
    SMat m(static_cast<int>(d.size()));
    int i = 0;
    for (double x : d) {
        m.set(i, i, x);
        ++i;
    }
    return m;
}

SMat SMat::outer(const Vec& v) {
    SMat m(v.dim());
    for (int i = 0; i < v.dim(); ++i)
        for (int j = i; j < v.dim(); ++j) m.set(i, j, v[i] * v[j]);
    return m;
}

SMat SMat::sym_outer(const Vec& a, const Vec& b) {
    check_same(a.dim(), b.dim());
    SMat m(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = i; j < a.dim(); ++j) m.set(i, j, 0.5 * (a[i] * b[j] + b[i] * a[j]));
    return m;
}

Vec SMat::apply(const Vec& x) const {
    check_same(dim_, x.dim());
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

double SMat::quad(const Vec& x) const { return x.dot(apply(x)); }

double SMat::bilinear(const Vec& x, const Vec& y) const { return x.dot(apply(y)); }

double SMat::frobenius() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
}

double SMat::trace() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
    return s;
}

SMat SMat::operator+(const SMat& o) const {
    check_same(dim_, o.dim_);
    SMat r(dim_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
}

SMat SMat::operator-(const SMat& o) const {
    check_same(dim_, o.dim_);
    SMat r(dim_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
    return r;
}

SMat SMat::operator*(double s) const {
    SMat r(dim_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * s;
    return r;
}

SMat congruence(const SMat& d, const SMat& m) {
    check_same(d.dim(), m.dim());
    const int n = d.dim();
    // W = M D (general), then R = D W, symmetrized against round-off.
    double w[3][3] = {};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += m(i, k) * d(k, j);
            w[i][j] = s;
        }
    SMat r(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0, t = 0.0;
            for (int k = 0; k < n; ++k) {
                s += d(i, k) * w[k][j];
                t += d(j, k) * w[k][i];
            }
            r.set(i, j, 0.5 * (s + t));
        }
    return r;
}

namespace {

EigenDecomposition eig1(const SMat& m) {
    EigenDecomposition e;
    e.dim = 1;
    e.values[0] = m(0, 0);
    e.vectors[0] = Vec{1.0};
    return e;
}

EigenDecomposition eig2(const SMat& m) {
    EigenDecomposition e;
    e.dim = 2;
    const double a = m(0, 0), b = m(0, 1), c = m(1, 1);
    const double mid = 0.5 * (a + c);
    const double rad = 0.5 * std::hypot(a - c, 2.0 * b);
    e.values[0] = mid - rad;
    e.values[1] = mid + rad;
    if (rad <= 1e-30 * (std::abs(mid) + 1e-300)) {
        e.vectors[0] = Vec{1.0, 0.0};
        e.vectors[1] = Vec{0.0, 1.0};
        return e;
    }
    // Eigenvector for the larger eigenvalue from the better-conditioned row.
    Vec v1(2);
    const double r1 = a - e.values[1], r2 = c - e.values[1];
    if (std::abs(r1) >= std::abs(r2))
        v1 = Vec{-b, r1};
    else
        v1 = Vec{r2, -b};
    if (v1.norm() < 1e-300) v1 = Vec{1.0, 0.0};
    v1 = v1.normalized();
    e.vectors[1] = v1;
    e.vectors[0] = rot90(v1);
    return e;
}

EigenDecomposition eig3(const SMat& m) {
    // Cyclic Jacobi with rotation accumulation.
    double a[3][3];
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);

    const double scale = std::max(m.frobenius(), 1e-300);
    constexpr int max_sweeps = 50;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
        if (off <= 1e-14 * scale) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) <= 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = cs * vkp - sn * vkq;
                    v[k][q] = sn * vkp + cs * vkq;
                }
            }
    }
    EigenDecomposition e;
    e.dim = 3;
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int i, int j) { return a[i][i] < a[j][j]; });
    for (int k = 0; k < 3; ++k) {
        e.values[static_cast<std::size_t>(k)] = a[order[k]][order[k]];
        Vec vk(3);
        for (int i = 0; i < 3; ++i) vk[i] = v[i][order[k]];
        e.vectors[static_cast<std::size_t>(k)] = vk;
    }
    return e;
}

}  // namespace

EigenDecomposition sym_eigen(const SMat& m) {
    switch (m.dim()) {
        case 1: return eig1(m);
        case 2: return eig2(m);
        default: return eig3(m);
    }
}

bool is_spd(const SMat& m) {
    const EigenDecomposition e = sym_eigen(m);
    const double lo = e.values[0];
    const double hi = e.values[static_cast<std::size_t>(m.dim() - 1)];
    return lo > 1e-12 * std::max(hi, 0.0) && lo > 0.0;
}

namespace {

SMat spd_function(const SMat& m, double (*fn)(double), const char* what) {
    if (!is_spd(m)) throw std::invalid_argument(std::string(what) + ": matrix is not SPD");
    const EigenDecomposition e = sym_eigen(m);
    SMat r(m.dim());
    for (int k = 0; k < m.dim(); ++k) {
        const double fk = fn(e.values[static_cast<std::size_t>(k)]);
        const Vec& vk = e.vectors[static_cast<std::size_t>(k)];
        for (int i = 0; i < m.dim(); ++i)
            for (int j = i; j < m.dim(); ++j) r.add(i, j, fk * vk[i] * vk[j]);
    }
    return r;
}

}  // namespace

SMat spd_inverse(const SMat& m) {
    return spd_function(m, [](double x) { return 1.0 / x; }, "spd_inverse");
}

SMat spd_sqrt(const SMat& m) {
    return spd_function(m, [](double x) { return std::sqrt(x); }, "spd_sqrt");
}

SphereMax pair_max_bilinear(const Vec& xi, const Vec& eta) {
    if (xi.dim() < 2) throw std::invalid_argument("pair_max_bilinear requires dim >= 2");
    if (xi.dim() != eta.dim()) throw std::invalid_argument("dimension mismatch");
    const int n = xi.dim();
    const double nx = xi.norm(), ny = eta.norm();

    SphereMax out;
    if (nx == 0.0 || ny == 0.0) {
        out.value = 0.0;
        out.maximizer = Vec::axis(n, 0);
        return out;
    }
    out.value = 0.5 * (nx * ny + xi.dot(eta));

    const Vec ux = xi * (1.0 / nx), uy = eta * (1.0 / ny);
    const Vec bisector = ux + uy;
    if (bisector.norm() < 1e-14) {
        // Antiparallel: the maximum 0 is attained on the orthogonal complement.
        out.maximizer = orthogonal_unit(ux);
        return out;
    }
    out.maximizer = bisector.normalized();
    return out;
}

SMat laminate_matrix(const SMat& b1, const SMat& b2, double alpha, const Vec& mu) {
    if (b1.dim() != b2.dim() || b1.dim() != mu.dim())
        throw std::invalid_argument("laminate_matrix: dimension mismatch");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("laminate_matrix: alpha must lie in (0,1)");
    const SMat diff = b2 - b1;
    const Vec w = diff.apply(mu);
    const SMat mix = b2 * alpha + b1 * (1.0 - alpha);  // alpha B2 + (1-alpha) B1
    const double denom = mix.quad(mu);
    return b1 * alpha + b2 * (1.0 - alpha) - SMat::outer(w) * (alpha * (1.0 - alpha) / denom);
}

double harmonic_identity_residual(const SMat& b1, const SMat& b2, double alpha) {
    const SMat diff = b2 - b1;
    const SMat c = b2 * alpha + b1 * (1.0 - alpha);
    const SMat lhs =
        b1 * alpha + b2 * (1.0 - alpha) - congruence(diff, spd_inverse(c)) * (alpha * (1.0 - alpha));
    const SMat rhs = spd_inverse(spd_inverse(b1) * alpha + spd_inverse(b2) * (1.0 - alpha));
    return (lhs - rhs).frobenius();
}

}  // namespace ellopt
