// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ellopt/semilinear.hpp"

namespace ellopt {

/// Pointwise data at one element under the incumbent control: state/adjoint
/// centroid values, exact P1 gradients, and per-label coefficient, reaction
/// and cost samples at y = ybar.
struct CellData {
    int element = 0;
    int ubar_label = 0;
    double ybar = 0.0;
    double psibar = 0.0;
    Vec grad_y;
    Vec grad_psi;
    std::vector<SMat> A;       // per label
    std::vector<double> f;     // f(e, ybar, v)
    std::vector<double> f0;    // f0(e, ybar, v)
};

CellData make_cell(const Problem& pb, int element, const ControlField& ubar,
                   const StateField& ybar, const StateField& psibar);

std::vector<CellData> make_cells(const Problem& pb, const ControlField& ubar,
                                 const StateField& ybar, const StateField& psibar);

/// Hamiltonian H = psi f - f0 - <A grad_y, grad_psi> at label v.
double hamiltonian(const CellData& cell, int v);

struct FocTerms {
    double h_gap = 0.0;     // H(ubar) - H(v)
    double max_term = 0.0;  // closed-form maximum of the direction quotient
    double gap = 0.0;       // h_gap - max_term
};

/// First-order-condition gap H(ubar) - H(v) - max_mu quotient, the max-term
/// computed in closed form through the sphere-maximum identity.
FocTerms foc_terms(const CellData& cell, int v);
double foc_gap(const CellData& cell, int v);

/// Direction quotient <[A(ubar)-A(v)] grad_y, l> <[A(ubar)-A(v)] grad_psi, l>
///                    / <A(v) l, l>  at a given unit direction.
double direction_quotient(const CellData& cell, int v, const Vec& ell);

/// Constructive maximizing direction: the sphere maximizer mapped back
/// through A(v)^{-1/2} and normalized.  Attains the max-term exactly.
Vec select_direction(const CellData& cell, int v);

enum class ElementStatus { agrees, singular, weakly_singular, strict };

const char* to_string(ElementStatus s);

struct ElementClassification {
    ElementStatus status = ElementStatus::agrees;
    bool is_singular = false;        // |h_gap| <= tol
    bool is_weakly_singular = false; // |h_gap - quotient(ell)| <= tol
    bool orth_y = false;             // <[A(ubar)-A(u)] grad_y, ell> ~ 0
    bool orth_psi = false;
    double h_gap = 0.0;
    double max_term = 0.0;
    double quotient = 0.0;
    Vec direction;
};

struct CandidateClassification {
    std::string name;
    bool trivial = false;            // candidate equals the incumbent everywhere
    bool singular = false;           // singular on every differing element
    bool weakly_singular = false;    // weak-singularity equality on every element
    bool orthogonality = false;      // both gap pairings vanish on every element
    int singular_count = 0;
    int weak_count = 0;
    int strict_count = 0;
    int agree_count = 0;
    double max_abs_h_gap = 0.0;
    double max_foc_violation = 0.0;  // max over elements of (max_term - h_gap)+
    std::vector<ElementClassification> elements;
};

struct SingularityReport {
    double tol_sing = 0.0;
    double max_violation = 0.0;      // of the first-order condition, clamped at 0
    std::string global;              // nonsingular | partially singular | fully singular
                                     // | partially weakly singular | fully weakly singular
    bool trivial_candidate_seen = false;
    std::vector<CandidateClassification> candidates;
};

struct ProbeCandidate {
    std::string name;
    ControlField control;
    std::optional<DirectionField> direction;  // default: select_direction per element
};

double default_tol_sing(const std::vector<CellData>& cells);

CandidateClassification classify_candidate(const Problem& pb, const std::vector<CellData>& cells,
                                           const ControlField& u, const DirectionField* ell,
                                           double tol_sing, const std::string& name = "");

/// Classification of one or more candidates against the incumbent per the
/// singular / weakly singular dichotomy; solves state and adjoint internally.
SingularityReport classify(const Problem& pb, const ControlField& ubar,
                           const std::vector<ProbeCandidate>& candidates,
                           const SolverOptions& opts = {});

struct PontryaginCheck {
    double max_violation = 0.0;
    int worst_element = -1;
    int worst_label = -1;
};

PontryaginCheck verify_pontryagin(const Problem& pb, const std::vector<CellData>& cells);
PontryaginCheck verify_pontryagin(const Problem& pb, const ControlField& ubar,
                                  const SolverOptions& opts = {});

}  // namespace ellopt
