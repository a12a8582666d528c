// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ellopt/tensor.hpp"

namespace ellopt {

/// Structured triangulation of the unit square: m x m grid cells, each split
/// along the same diagonal into two positively oriented triangles.
struct Mesh {
    int m = 0;
    std::vector<std::array<double, 2>> nodes;      // (m+1)^2
    std::vector<std::array<int, 3>> elements;      // 2 m^2 node triples, CCW
    std::vector<std::uint8_t> boundary;            // per node

    // Per-element precomputed data (P1).
    std::vector<double> area;                      // all 1/(2 m^2)
    std::vector<std::array<double, 2>> centroid;
    std::vector<std::array<Vec, 3>> grad;          // basis gradients, constant

    int node_count() const { return static_cast<int>(nodes.size()); }
    int element_count() const { return static_cast<int>(elements.size()); }
    int node_id(int i, int j) const { return j * (m + 1) + i; }
};

Mesh build_mesh(int m);  // throws std::invalid_argument for m < 2

using StateField = std::vector<double>;            // nodal values, (m+1)^2
using ElementMatrixField = std::vector<SMat>;      // one SMat per element
using ElementScalarField = std::vector<double>;    // one value per element

/// Value of a P1 nodal field at an element centroid (mean of its vertices).
double centroid_value(const Mesh& mesh, std::span<const double> field, int e);

/// Gradient of a P1 nodal field on an element (constant).
Vec element_gradient(const Mesh& mesh, std::span<const double> field, int e);

/// Symmetric sparse system over interior nodes (CSR) with right-hand side.
struct LinearSystem {
    int unknowns = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;
    std::vector<double> rhs;
    std::vector<int> interior_to_node;  // unknown index -> node id
    std::vector<int> node_to_interior;  // node id -> unknown index or -1
};

/// Stiffness + reaction matrix over all nodes (no boundary elimination),
/// kept for structure checks; row-major CSR.
struct FullMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;
    std::vector<double> row_sum() const;
};

FullMatrix assemble_full(const Mesh& mesh, const ElementMatrixField& coeff,
                         const ElementScalarField& reaction);

/// Assemble the interior system for
///   -div(coeff grad y) + reaction * y  (weak form, centroid quadrature for
///   the reaction term), homogeneous Dirichlet by boundary elimination.
/// Reactions must be >= 0; rhs starts at zero.
LinearSystem assemble(const Mesh& mesh, const ElementMatrixField& coeff,
                      const ElementScalarField& reaction);

/// Nodal load of a per-element density g: entry i = sum over elements
/// touching i of g_e * area/3 (centroid quadrature).
std::vector<double> load_scalar(const Mesh& mesh, const ElementScalarField& g);

/// Weak form of the source div(theta grad w): entry i =
///   -sum_e area (theta_e grad w_e) . grad phi_i.
std::vector<double> load_divergence(const Mesh& mesh, const ElementMatrixField& theta,
                                    std::span<const double> w);

/// Restrict a full nodal vector to the system unknowns (interior nodes).
void set_rhs(LinearSystem& sys, std::span<const double> nodal);

struct CgOptions {
    double rtol = 1e-12;    // relative residual target
    long max_iter = 0;      // 0 -> 20 * unknowns
};

struct CgResult {
    bool converged = false;
    long iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients.  Returns the full nodal field
/// (zeros at boundary nodes).  Throws std::runtime_error on non-convergence,
/// reporting the final residual.
StateField solve_cg(const Mesh& mesh, const LinearSystem& sys, CgOptions opts = {},
                    CgResult* stats = nullptr);

/// Same solver on the interior unknowns only.
std::vector<double> solve_cg_raw(const LinearSystem& sys, CgOptions opts = {},
                                 CgResult* stats = nullptr);

/// Scatter an interior vector into a full nodal field (zeros on the boundary).
StateField scatter_interior(const Mesh& mesh, const LinearSystem& sys,
                            std::span<const double> interior);

/// Matrix-vector product on the interior unknowns.
void apply_system(const LinearSystem& sys, std::span<const double> x, std::span<double> y);

struct FieldNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
};

/// Exact P1 norms: L2 via the consistent mass matrix, H1 seminorm from the
/// constant element gradients.
FieldNorms norms(const Mesh& mesh, std::span<const double> field);

double integrate(const Mesh& mesh, const ElementScalarField& g);

std::vector<double> subtract(std::span<const double> a, std::span<const double> b);

}  // namespace ellopt
