// SPDX-License-Identifier: Apache-2.0
#include "ellopt/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ellopt {

CellData make_cell(const Problem& pb, int element, const ControlField& ubar,
                   const StateField& ybar, const StateField& psibar) {
    CellData cell;
    cell.element = element;
    cell.ubar_label = ubar[static_cast<std::size_t>(element)];
    cell.ybar = centroid_value(pb.mesh, ybar, element);
    cell.psibar = centroid_value(pb.mesh, psibar, element);
    cell.grad_y = element_gradient(pb.mesh, ybar, element);
    cell.grad_psi = element_gradient(pb.mesh, psibar, element);
    cell.A.reserve(static_cast<std::size_t>(pb.label_count));
    cell.f.reserve(static_cast<std::size_t>(pb.label_count));
    cell.f0.reserve(static_cast<std::size_t>(pb.label_count));
    for (int v = 0; v < pb.label_count; ++v) {
        cell.A.push_back(pb.A(element, v));
        cell.f.push_back(pb.f(element, cell.ybar, v));
        cell.f0.push_back(pb.f0(element, cell.ybar, v));
    }
    return cell;
}

std::vector<CellData> make_cells(const Problem& pb, const ControlField& ubar,
                                 const StateField& ybar, const StateField& psibar) {
    pb.check_control(ubar);
    std::vector<CellData> cells;
    cells.reserve(static_cast<std::size_t>(pb.mesh.element_count()));
    for (int e = 0; e < pb.mesh.element_count(); ++e)
        cells.push_back(make_cell(pb, e, ubar, ybar, psibar));
    return cells;
}

namespace {

void check_label(const CellData& cell, int v) {
    if (v < 0 || v >= static_cast<int>(cell.A.size()))
        throw std::invalid_argument("unknown control label");
}

}  // namespace

double hamiltonian(const CellData& cell, int v) {
    check_label(cell, v);
    return cell.psibar * cell.f[static_cast<std::size_t>(v)] - cell.f0[static_cast<std::size_t>(v)] -
           cell.A[static_cast<std::size_t>(v)].bilinear(cell.grad_y, cell.grad_psi);
}

FocTerms foc_terms(const CellData& cell, int v) {
    check_label(cell, v);
    FocTerms t;
    if (v == cell.ubar_label) return t;

    t.h_gap = hamiltonian(cell, cell.ubar_label) - hamiltonian(cell, v);
    const SMat gap = cell.A[static_cast<std::size_t>(cell.ubar_label)] - cell.A[static_cast<std::size_t>(v)];
    if (gap.frobenius() > 0.0) {
        const SMat root = spd_sqrt(spd_inverse(cell.A[static_cast<std::size_t>(v)]));
        const Vec xi = root.apply(gap.apply(cell.grad_y));
        const Vec eta = root.apply(gap.apply(cell.grad_psi));
        t.max_term = pair_max_bilinear(xi, eta).value;
    }
    t.gap = t.h_gap - t.max_term;
    return t;
}

double foc_gap(const CellData& cell, int v) { return foc_terms(cell, v).gap; }

double direction_quotient(const CellData& cell, int v, const Vec& ell) {
    check_label(cell, v);
    const SMat gap = cell.A[static_cast<std::size_t>(cell.ubar_label)] - cell.A[static_cast<std::size_t>(v)];
    const double num = gap.apply(cell.grad_y).dot(ell) * gap.apply(cell.grad_psi).dot(ell);
    return num / cell.A[static_cast<std::size_t>(v)].quad(ell);
}

Vec select_direction(const CellData& cell, int v) {
    check_label(cell, v);
    const SMat gap = cell.A[static_cast<std::size_t>(cell.ubar_label)] - cell.A[static_cast<std::size_t>(v)];
    const SMat root = spd_sqrt(spd_inverse(cell.A[static_cast<std::size_t>(v)]));
    const Vec xi = root.apply(gap.apply(cell.grad_y));
    const Vec eta = root.apply(gap.apply(cell.grad_psi));
    const Vec nu = pair_max_bilinear(xi, eta).maximizer;
    return root.apply(nu).normalized();
}

const char* to_string(ElementStatus s) {
    switch (s) {
        case ElementStatus::agrees: return "agrees";
        case ElementStatus::singular: return "singular";
        case ElementStatus::weakly_singular: return "weakly-singular";
        default: return "strict";
    }
}

double default_tol_sing(const std::vector<CellData>& cells) {
    double scale = 0.0;
    for (const CellData& cell : cells)
        scale = std::max(scale, std::abs(hamiltonian(cell, cell.ubar_label)));
    return std::max(1e-8, 1e-6 * scale);
}

CandidateClassification classify_candidate(const Problem& pb, const std::vector<CellData>& cells,
                                           const ControlField& u, const DirectionField* ell,
                                           double tol_sing, const std::string& name) {
    pb.check_control(u);
    if (ell) pb.check_direction(*ell);

    CandidateClassification out;
    out.name = name;
    out.elements.resize(cells.size());

    for (std::size_t e = 0; e < cells.size(); ++e) {
        const CellData& cell = cells[e];
        ElementClassification& ec = out.elements[e];
        const int v = u[e];

        if (v == cell.ubar_label) {
            ec.status = ElementStatus::agrees;
            ec.is_singular = true;
            ec.is_weakly_singular = true;
            ec.orth_y = ec.orth_psi = true;
            ec.direction = ell ? (*ell)[e] : Vec{1.0, 0.0};
            ++out.agree_count;
            continue;
        }

        const FocTerms terms = foc_terms(cell, v);
        ec.h_gap = terms.h_gap;
        ec.max_term = terms.max_term;
        ec.direction = ell ? (*ell)[e] : select_direction(cell, v);
        ec.quotient = direction_quotient(cell, v, ec.direction);

        ec.is_singular = std::abs(ec.h_gap) <= tol_sing;
        ec.is_weakly_singular = std::abs(ec.h_gap - ec.quotient) <= tol_sing;

        const SMat gap = cell.A[static_cast<std::size_t>(cell.ubar_label)] - cell.A[static_cast<std::size_t>(v)];
        const Vec gy = gap.apply(cell.grad_y);
        const Vec gp = gap.apply(cell.grad_psi);
        ec.orth_y = std::abs(gy.dot(ec.direction)) <= 1e-8 * (1.0 + gy.norm());
        ec.orth_psi = std::abs(gp.dot(ec.direction)) <= 1e-8 * (1.0 + gp.norm());

        if (ec.is_singular) {
            ec.status = ElementStatus::singular;
            ++out.singular_count;
        } else if (ec.is_weakly_singular) {
            ec.status = ElementStatus::weakly_singular;
            ++out.weak_count;
        } else {
            ec.status = ElementStatus::strict;
            ++out.strict_count;
        }
        out.max_abs_h_gap = std::max(out.max_abs_h_gap, std::abs(ec.h_gap));
        out.max_foc_violation = std::max(out.max_foc_violation, ec.max_term - ec.h_gap);
    }

    out.trivial = out.agree_count == static_cast<int>(cells.size());
    if (!out.trivial) {
        out.singular = true;
        out.weakly_singular = true;
        out.orthogonality = true;
        for (const ElementClassification& ec : out.elements) {
            out.singular = out.singular && ec.is_singular;
            out.weakly_singular = out.weakly_singular && ec.is_weakly_singular;
            out.orthogonality = out.orthogonality && ec.orth_y && ec.orth_psi;
        }
    }
    out.max_foc_violation = std::max(out.max_foc_violation, 0.0);
    return out;
}

SingularityReport classify(const Problem& pb, const ControlField& ubar,
                           const std::vector<ProbeCandidate>& candidates, const SolverOptions& opts) {
    const StateField ybar = solve_state(pb, ubar, opts);
    const StateField psibar = solve_adjoint(pb, ubar, ybar, opts);
    const std::vector<CellData> cells = make_cells(pb, ubar, ybar, psibar);

    SingularityReport report;
    report.tol_sing = default_tol_sing(cells);

    int nontrivial = 0, n_sing = 0, n_weak = 0;
    for (const ProbeCandidate& cand : candidates) {
        const DirectionField* ell = cand.direction ? &*cand.direction : nullptr;
        CandidateClassification cc =
            classify_candidate(pb, cells, cand.control, ell, report.tol_sing, cand.name);
        if (cc.trivial) {
            report.trivial_candidate_seen = true;
        } else {
            ++nontrivial;
            if (cc.singular) ++n_sing;
            if (cc.weakly_singular) ++n_weak;
        }
        report.candidates.push_back(std::move(cc));
    }

    const PontryaginCheck pc = verify_pontryagin(pb, cells);
    report.max_violation = pc.max_violation;

    if (nontrivial == 0)
        report.global = "nonsingular";
    else if (n_sing == nontrivial)
        report.global = "fully singular";
    else if (n_weak == nontrivial)
        report.global = "fully weakly singular";
    else if (n_sing > 0)
        report.global = "partially singular";
    else if (n_weak > 0)
        report.global = "partially weakly singular";
    else
        report.global = "nonsingular";
    return report;
}

PontryaginCheck verify_pontryagin(const Problem& pb, const std::vector<CellData>& cells) {
    PontryaginCheck out;
    double worst = -1e300;
    for (const CellData& cell : cells)
        for (int v = 0; v < pb.label_count; ++v) {
            if (v == cell.ubar_label) continue;
            const double violation = -foc_terms(cell, v).gap;
            if (violation > worst) {
                worst = violation;
                out.worst_element = cell.element;
                out.worst_label = v;
            }
        }
    out.max_violation = std::max(0.0, worst == -1e300 ? 0.0 : worst);
    return out;
}

PontryaginCheck verify_pontryagin(const Problem& pb, const ControlField& ubar,
                                  const SolverOptions& opts) {
    const StateField ybar = solve_state(pb, ubar, opts);
    const StateField psibar = solve_adjoint(pb, ubar, ybar, opts);
    return verify_pontryagin(pb, make_cells(pb, ubar, ybar, psibar));
}

}  // namespace ellopt
