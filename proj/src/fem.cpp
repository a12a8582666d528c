// SPDX-License-Identifier: Apache-2.0
#include "ellopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ellopt {

namespace {

Vec perp(double x, double y) { return Vec{-y, x}; }

struct TripletBuffer {
    // Row-bucketed accumulation; structured meshes have <= 7 couplings/row.
    explicit TripletBuffer(int n) : cols(static_cast<std::size_t>(n)), vals(static_cast<std::size_t>(n)) {}
    std::vector<std::vector<int>> cols;
    std::vector<std::vector<double>> vals;

    void add(int i, int j, double v) {
        auto& ci = cols[static_cast<std::size_t>(i)];
        auto& vi = vals[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < ci.size(); ++k)
            if (ci[k] == j) {
                vi[k] += v;
                return;
            }
        ci.push_back(j);
        vi.push_back(v);
    }
};

}  // namespace

Mesh build_mesh(int m) {
    if (m < 2) throw std::invalid_argument("build_mesh: resolution must be >= 2");
    Mesh mesh;
    mesh.m = m;
    const int n1 = m + 1;
    mesh.nodes.resize(static_cast<std::size_t>(n1 * n1));
    mesh.boundary.assign(static_cast<std::size_t>(n1 * n1), 0);
    const double h = 1.0 / m;
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i) {
            const int id = mesh.node_id(i, j);
            mesh.nodes[static_cast<std::size_t>(id)] = {i * h, j * h};
            if (i == 0 || i == m || j == 0 || j == m) mesh.boundary[static_cast<std::size_t>(id)] = 1;
        }

    mesh.elements.reserve(static_cast<std::size_t>(2 * m * m));
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const int p00 = mesh.node_id(i, j), p10 = mesh.node_id(i + 1, j);
            const int p01 = mesh.node_id(i, j + 1), p11 = mesh.node_id(i + 1, j + 1);
            mesh.elements.push_back({p00, p10, p11});
            mesh.elements.push_back({p00, p11, p01});
        }

    const int ne = mesh.element_count();
    mesh.area.resize(static_cast<std::size_t>(ne));
    mesh.centroid.resize(static_cast<std::size_t>(ne));
    mesh.grad.resize(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
        const auto& a = mesh.nodes[static_cast<std::size_t>(tri[0])];
        const auto& b = mesh.nodes[static_cast<std::size_t>(tri[1])];
        const auto& c = mesh.nodes[static_cast<std::size_t>(tri[2])];
        const double twice_area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (twice_area <= 0.0) throw std::logic_error("build_mesh: negatively oriented element");
        mesh.area[static_cast<std::size_t>(e)] = 0.5 * twice_area;
        mesh.centroid[static_cast<std::size_t>(e)] = {(a[0] + b[0] + c[0]) / 3.0,
                                                      (a[1] + b[1] + c[1]) / 3.0};
        auto& g = mesh.grad[static_cast<std::size_t>(e)];
        g[0] = perp(c[0] - b[0], c[1] - b[1]) * (1.0 / twice_area);
        g[1] = perp(a[0] - c[0], a[1] - c[1]) * (1.0 / twice_area);
        g[2] = perp(b[0] - a[0], b[1] - a[1]) * (1.0 / twice_area);
    }
    return mesh;
}

double centroid_value(const Mesh& mesh, std::span<const double> field, int e) {
    const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
    return (field[static_cast<std::size_t>(tri[0])] + field[static_cast<std::size_t>(tri[1])] +
            field[static_cast<std::size_t>(tri[2])]) /
           3.0;
}

Vec element_gradient(const Mesh& mesh, std::span<const double> field, int e) {
    const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
    const auto& g = mesh.grad[static_cast<std::size_t>(e)];
    Vec r(2);
    for (int k = 0; k < 3; ++k) {
        const double v = field[static_cast<std::size_t>(tri[k])];
        r = r + g[static_cast<std::size_t>(k)] * v;
    }
    return r;
}

std::vector<double> FullMatrix::row_sum() const {
    std::vector<double> s(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            s[static_cast<std::size_t>(i)] += val[static_cast<std::size_t>(k)];
    return s;
}

namespace {

void check_assembly_inputs(const Mesh& mesh, const ElementMatrixField& coeff,
                           const ElementScalarField& reaction) {
    const std::size_t ne = static_cast<std::size_t>(mesh.element_count());
    if (coeff.size() != ne || reaction.size() != ne)
        throw std::invalid_argument("assemble: field sizes do not match the mesh");
    for (double r : reaction)
        if (r < 0.0) throw std::invalid_argument("assemble: negative reaction coefficient");
}

void accumulate_element(const Mesh& mesh, const ElementMatrixField& coeff,
                        const ElementScalarField& reaction, int e, TripletBuffer& buf) {
    const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
    const auto& g = mesh.grad[static_cast<std::size_t>(e)];
    const double area = mesh.area[static_cast<std::size_t>(e)];
    const SMat& M = coeff[static_cast<std::size_t>(e)];
    const double r = reaction[static_cast<std::size_t>(e)];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            // One-point (centroid) quadrature for the reaction: phi_i phi_j -> 1/9.
            const double kij = area * M.bilinear(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]) +
                               area * r / 9.0;
            buf.add(tri[i], tri[j], kij);
        }
}

}  // namespace

FullMatrix assemble_full(const Mesh& mesh, const ElementMatrixField& coeff,
                         const ElementScalarField& reaction) {
    check_assembly_inputs(mesh, coeff, reaction);
    const int n = mesh.node_count();
    TripletBuffer buf(n);
    for (int e = 0; e < mesh.element_count(); ++e) accumulate_element(mesh, coeff, reaction, e, buf);

    FullMatrix full;
    full.n = n;
    full.row_ptr.resize(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        // Sort columns for a deterministic layout.
        auto& ci = buf.cols[static_cast<std::size_t>(i)];
        auto& vi = buf.vals[static_cast<std::size_t>(i)];
        std::vector<int> order(ci.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return ci[static_cast<std::size_t>(a)] < ci[static_cast<std::size_t>(b)]; });
        for (int k : order) {
            full.col.push_back(ci[static_cast<std::size_t>(k)]);
            full.val.push_back(vi[static_cast<std::size_t>(k)]);
        }
        full.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(full.col.size());
    }
    return full;
}

LinearSystem assemble(const Mesh& mesh, const ElementMatrixField& coeff,
                      const ElementScalarField& reaction) {
    const FullMatrix full = assemble_full(mesh, coeff, reaction);
    const int n = mesh.node_count();

    LinearSystem sys;
    sys.node_to_interior.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i)
        if (!mesh.boundary[static_cast<std::size_t>(i)]) {
            sys.node_to_interior[static_cast<std::size_t>(i)] = static_cast<int>(sys.interior_to_node.size());
            sys.interior_to_node.push_back(i);
        }
    sys.unknowns = static_cast<int>(sys.interior_to_node.size());
    sys.rhs.assign(static_cast<std::size_t>(sys.unknowns), 0.0);

    sys.row_ptr.resize(static_cast<std::size_t>(sys.unknowns) + 1, 0);
    for (int u = 0; u < sys.unknowns; ++u) {
        const int i = sys.interior_to_node[static_cast<std::size_t>(u)];
        for (int k = full.row_ptr[static_cast<std::size_t>(i)]; k < full.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const int jv = sys.node_to_interior[static_cast<std::size_t>(full.col[static_cast<std::size_t>(k)])];
            if (jv < 0) continue;  // homogeneous Dirichlet column
            sys.col.push_back(jv);
            sys.val.push_back(full.val[static_cast<std::size_t>(k)]);
        }
        sys.row_ptr[static_cast<std::size_t>(u) + 1] = static_cast<int>(sys.col.size());
    }
    return sys;
}

std::vector<double> load_scalar(const Mesh& mesh, const ElementScalarField& g) {
    if (g.size() != static_cast<std::size_t>(mesh.element_count()))
        throw std::invalid_argument("load_scalar: size mismatch");
    std::vector<double> b(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (int e = 0; e < mesh.element_count(); ++e) {
        const double w = g[static_cast<std::size_t>(e)] * mesh.area[static_cast<std::size_t>(e)] / 3.0;
        for (int k = 0; k < 3; ++k) b[static_cast<std::size_t>(mesh.elements[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)])] += w;
    }
    return b;
}

std::vector<double> load_divergence(const Mesh& mesh, const ElementMatrixField& theta,
                                    std::span<const double> w) {
    if (theta.size() != static_cast<std::size_t>(mesh.element_count()) ||
        w.size() != static_cast<std::size_t>(mesh.node_count()))
        throw std::invalid_argument("load_divergence: size mismatch");
    std::vector<double> b(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (int e = 0; e < mesh.element_count(); ++e) {
        const Vec flux = theta[static_cast<std::size_t>(e)].apply(element_gradient(mesh, w, e));
        const double area = mesh.area[static_cast<std::size_t>(e)];
        const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
        const auto& g = mesh.grad[static_cast<std::size_t>(e)];
        for (int k = 0; k < 3; ++k)
            b[static_cast<std::size_t>(tri[k])] -= area * flux.dot(g[static_cast<std::size_t>(k)]);
    }
    return b;
}

void set_rhs(LinearSystem& sys, std::span<const double> nodal) {
    for (int u = 0; u < sys.unknowns; ++u)
        sys.rhs[static_cast<std::size_t>(u)] = nodal[static_cast<std::size_t>(sys.interior_to_node[static_cast<std::size_t>(u)])];
}

void apply_system(const LinearSystem& sys, std::span<const double> x, std::span<double> y) {
    for (int i = 0; i < sys.unknowns; ++i) {
        double s = 0.0;
        for (int k = sys.row_ptr[static_cast<std::size_t>(i)]; k < sys.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            s += sys.val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(sys.col[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(i)] = s;
    }
}

StateField scatter_interior(const Mesh& mesh, const LinearSystem& sys,
                            std::span<const double> interior) {
    StateField field(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (int u = 0; u < sys.unknowns; ++u)
        field[static_cast<std::size_t>(sys.interior_to_node[static_cast<std::size_t>(u)])] =
            interior[static_cast<std::size_t>(u)];
    return field;
}

StateField solve_cg(const Mesh& mesh, const LinearSystem& sys, CgOptions opts, CgResult* stats) {
    return scatter_interior(mesh, sys, solve_cg_raw(sys, opts, stats));
}

std::vector<double> solve_cg_raw(const LinearSystem& sys, CgOptions opts, CgResult* stats) {
    const int n = sys.unknowns;
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    if (n == 0) return x;
    std::vector<double> r = sys.rhs;
    std::vector<double> z(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n)), Ap(static_cast<std::size_t>(n));

    std::vector<double> inv_diag(static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i < n; ++i)
        for (int k = sys.row_ptr[static_cast<std::size_t>(i)]; k < sys.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            if (sys.col[static_cast<std::size_t>(k)] == i && sys.val[static_cast<std::size_t>(k)] != 0.0)
                inv_diag[static_cast<std::size_t>(i)] = 1.0 / sys.val[static_cast<std::size_t>(k)];

    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double t : v) s += t * t;
        return std::sqrt(s);
    };

    const double bnorm = norm2(sys.rhs);
    CgResult res;
    if (bnorm == 0.0) {
        res.converged = true;
        if (stats) *stats = res;
        return x;
    }

    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    p = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];

    const long max_iter = opts.max_iter > 0 ? opts.max_iter : 20L * n;
    double rel = 1.0;
    for (long it = 0; it < max_iter; ++it) {
        apply_system(sys, p, Ap);
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += p[static_cast<std::size_t>(i)] * Ap[static_cast<std::size_t>(i)];
        if (pAp <= 0.0) throw std::runtime_error("solve_cg: matrix is not positive definite");
        const double akk = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] += akk * p[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(i)] -= akk * Ap[static_cast<std::size_t>(i)];
        }
        res.iterations = it + 1;
        rel = norm2(r) / bnorm;
        if (rel <= opts.rtol) {
            res.converged = true;
            break;
        }
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) {
            z[static_cast<std::size_t>(i)] = inv_diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
            rz_new += r[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    }
    res.relative_residual = rel;
    if (!res.converged)
        throw std::runtime_error("solve_cg: no convergence after " + std::to_string(res.iterations) +
                                 " iterations, relative residual " + std::to_string(rel));
    if (stats) *stats = res;
    return x;
}

FieldNorms norms(const Mesh& mesh, std::span<const double> field) {
    FieldNorms out;
    double l2sq = 0.0, h1sq = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& tri = mesh.elements[static_cast<std::size_t>(e)];
        const double area = mesh.area[static_cast<std::size_t>(e)];
        const double y0 = field[static_cast<std::size_t>(tri[0])];
        const double y1 = field[static_cast<std::size_t>(tri[1])];
        const double y2 = field[static_cast<std::size_t>(tri[2])];
        // Exact P1 mass: area/12 * [2 1 1; 1 2 1; 1 1 2].
        l2sq += area / 12.0 *
                (2.0 * (y0 * y0 + y1 * y1 + y2 * y2) + 2.0 * (y0 * y1 + y0 * y2 + y1 * y2));
        const Vec g = element_gradient(mesh, field, e);
        h1sq += area * g.dot(g);
    }
    out.l2 = std::sqrt(std::max(0.0, l2sq));
    out.h1_semi = std::sqrt(std::max(0.0, h1sq));
    return out;
}

double integrate(const Mesh& mesh, const ElementScalarField& g) {
    if (g.size() != static_cast<std::size_t>(mesh.element_count()))
        throw std::invalid_argument("integrate: size mismatch");
    double s = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) s += mesh.area[static_cast<std::size_t>(e)] * g[static_cast<std::size_t>(e)];
    return s;
}

std::vector<double> subtract(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("subtract: size mismatch");
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

}  // namespace ellopt
