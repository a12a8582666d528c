// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>

namespace ellopt {

/// Dense vector of dimension 1..3.  Fixed capacity, runtime dimension.
class Vec {
public:
    Vec() = default;
    explicit Vec(int dim);
    Vec(std::initializer_list<double> xs);

    static Vec zero(int dim);
    static Vec axis(int dim, int k);

    int dim() const { return dim_; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

    double dot(const Vec& o) const;
    double norm() const;
    Vec normalized() const;  // throws on (near-)zero input
    bool is_unit(double tol = 1e-12) const;

    Vec operator+(const Vec& o) const;
    Vec operator-(const Vec& o) const;
    Vec operator*(double s) const;
    Vec operator-() const;

private:
    int dim_ = 0;
    std::array<double, 3> v_{};
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

/// Rotate a 2-vector by 90 degrees counterclockwise.
Vec rot90(const Vec& v);

/// Deterministic unit vector orthogonal to v (dim 2 or 3).
/// Dim 2: rot90 of the normalization.  Dim 3: Gram-Schmidt against the
/// standard basis axis least aligned with v.
Vec orthogonal_unit(const Vec& v);

/// Symmetric matrix of dimension 1..3, upper-triangular storage.
/// Symmetry holds by construction.
class SMat {
public:
    SMat() = default;
    explicit SMat(int dim);  // zero matrix

    static SMat identity(int dim);
    static SMat diag(std::initializer_list<double> d);
    static SMat outer(const Vec& v);                     // v v^T
    static SMat sym_outer(const Vec& a, const Vec& b);   // (a b^T + b a^T)/2

    int dim() const { return dim_; }
    double operator()(int i, int j) const;
    void set(int i, int j, double value);
    void add(int i, int j, double value);

    Vec apply(const Vec& x) const;                 // M x
    double quad(const Vec& x) const;               // x^T M x
    double bilinear(const Vec& x, const Vec& y) const;  // x^T M y
    double frobenius() const;
    double trace() const;

    SMat operator+(const SMat& o) const;
    SMat operator-(const SMat& o) const;
    SMat operator*(double s) const;

private:
    static int tri_index(int i, int j);
    int dim_ = 0;
    std::array<double, 6> a_{};  // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
};

inline SMat operator*(double s, const SMat& m) { return m * s; }

/// D * M * D for symmetric D, M (result symmetric by construction).
SMat congruence(const SMat& d, const SMat& m);

struct EigenDecomposition {
    int dim = 0;
    std::array<double, 3> values{};   // ascending
    std::array<Vec, 3> vectors{};     // orthonormal, vectors[k] pairs values[k]
};

/// Symmetric eigendecomposition: closed form for dim <= 2, cyclic Jacobi
/// for dim 3 (off-diagonal tolerance 1e-14 relative, max 50 sweeps).
EigenDecomposition sym_eigen(const SMat& m);

/// SPD acceptance gate: smallest eigenvalue > 1e-12 * largest.
bool is_spd(const SMat& m);

SMat spd_inverse(const SMat& m);  // throws std::invalid_argument unless SPD
SMat spd_sqrt(const SMat& m);     // throws std::invalid_argument unless SPD

struct SphereMax {
    double value = 0.0;
    Vec maximizer;
};

/// max over unit mu of <mu,xi><mu,eta> = (|xi||eta| + <xi,eta>)/2, dim >= 2.
/// Maximizer is the normalized bisector of the two directions.  Ties:
/// zero input -> (0, e1); exactly antiparallel inputs -> value 0 with mu
/// orthogonal to xi (90-degree rotation in dim 2, Gram-Schmidt in dim 3).
SphereMax pair_max_bilinear(const Vec& xi, const Vec& eta);

/// Effective matrix of a two-phase rank-one laminate with phases b1 (weight
/// alpha) and b2, layered along mu:
///   G = a b1 + (1-a) b2 - a(1-a) (b2-b1) mu mu^T (b2-b1) / mu^T[a b2 + (1-a) b1]mu.
/// Scale-invariant in mu.  Lies between the weighted harmonic and arithmetic
/// means in the SPD order.
SMat laminate_matrix(const SMat& b1, const SMat& b2, double alpha, const Vec& mu);

/// Frobenius residual of the exact identity obtained when the rank-one
/// correction is replaced by the full inverse of C = a b2 + (1-a) b1:
///   a b1 + (1-a) b2 - a(1-a)(b2-b1) C^-1 (b2-b1) = [a b1^-1 + (1-a) b2^-1]^-1.
double harmonic_identity_residual(const SMat& b1, const SMat& b2, double alpha);

}  // namespace ellopt
