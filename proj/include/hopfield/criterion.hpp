#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopfield/envelope.hpp"
#include "hopfield/matrix_analysis.hpp"
#include "hopfield/model.hpp"

namespace hopfield {

enum class verdict_kind {
    attractive_bounded,     // bounded activations, limsup matrix is an M-matrix
    attractive_sublinear,   // sublinear activations, sup matrix singular irreducible
    attractive_autonomous,  // constant coefficients, single criterion matrix
    inconclusive
};

inline const char* to_string(verdict_kind v) {
    switch (v) {
        case verdict_kind::attractive_bounded: return "attractive (bounded-activation criterion)";
        case verdict_kind::attractive_sublinear: return "attractive (sublinear-activation criterion)";
        case verdict_kind::attractive_autonomous: return "attractive (autonomous criterion)";
        case verdict_kind::inconclusive: return "inconclusive";
    }
    return "?";
}

struct criterion_report {
    hypothesis_report hypotheses;
    coefficient_summary summaries;
    bool summaries_valid = false;
    square_matrix m_plus, m_hat;
    matrix_classification m_plus_class, m_hat_class;
    bool matrices_valid = false;
    verdict_kind verdict = verdict_kind::inconclusive;
    std::vector<std::string> justification;
    std::optional<std::vector<double>> null_vector;
    std::optional<bound_iteration> bound_trace;
    std::vector<std::string> provenance_flags;
    bool autonomous = false;

    bool attractive() const { return verdict != verdict_kind::inconclusive; }

    /// Heuristic provenance (sampled sups, sampled delay drift) downgrades the
    /// displayed label; the guarantee is conditional on facts only sampled here.
    std::string display_verdict() const {
        std::string base = to_string(verdict);
        if (attractive() && !provenance_flags.empty()) base += " [sampled hypotheses]";
        return base;
    }
};

struct decide_options {
    long horizon = 10000;
    check_tolerances tolerances{};
    double tol_minor = 1e-9;
    double tol_null = 1e-10;
    std::vector<double> start_vector;  // plus-regime bound start, all-ones when empty
    int q_cap = 10000;
    double tol_fix = 1e-9;
    bool with_bound_trace = true;
};

/// Full pipeline: hypotheses, summaries, criterion matrices, classification,
/// verdict. All failures fold into an inconclusive verdict with the failed
/// conditions named; the criteria are sufficient only, so inconclusive never
/// claims instability.
inline criterion_report decide(const model_spec& spec, const decide_options& opts = {}) {
    criterion_report rep;
    rep.autonomous = spec.autonomous();
    rep.hypotheses = check_hypotheses(spec, opts.horizon, opts.tolerances);
    for (const auto& p : rep.hypotheses.provenance) rep.provenance_flags.push_back(p);

    auto fail = [&](const std::string& why) { rep.justification.push_back(why); };

    const hypothesis_report& H = rep.hypotheses;
    if (!H.h1.ok()) fail("hypothesis (H1) failed: " + H.h1.detail);
    if (!H.h2.ok()) fail("hypothesis (H2) failed: " + H.h2.detail);
    if (!H.h3.ok()) fail("hypothesis (H3) failed: " + H.h3.detail);
    if (!H.h4.ok()) fail("hypothesis (H4) failed: " + H.h4.detail);
    if (!H.h5.ok()) fail("hypothesis (H5) failed: " + H.h5.detail);
    if (!H.h6.ok()) fail("activation hypothesis failed: " + H.h6.detail);

    if (H.h1.ok() && H.h3.ok()) {
        try {
            rep.summaries = summarize_coefficients(spec, opts.horizon);
            rep.summaries_valid = true;
            if (rep.summaries.sampled_heuristic)
                rep.provenance_flags.push_back("coefficient summaries sampled, not declared");
        } catch (const validation_error& e) {
            fail(std::string("coefficient summary failed: ") + e.what());
        }
    }
    if (!rep.summaries_valid) {
        fail("criterion matrices unavailable without coefficient summaries");
        rep.justification.push_back("the criteria are sufficient conditions only; no instability is claimed");
        return rep;
    }

    criterion_matrices mats = build_criterion_matrices(spec, rep.summaries);
    rep.m_plus = mats.m_plus;
    rep.m_hat = mats.m_hat;
    rep.m_plus_class = classify(rep.m_plus, opts.tol_minor);
    rep.m_hat_class = classify(rep.m_hat, opts.tol_minor);
    rep.matrices_valid = true;

    const bool core = H.core_ok() && H.h6.ok();
    const bool hat_is_m = rep.m_hat_class.m_class != m_matrix_class::not_m;
    const bool plus_singular_irreducible =
        rep.m_plus_class.m_class == m_matrix_class::singular_m && rep.m_plus_class.irreducible;
    const bool eligible_bounded = core && H.all_bounded_regime && hat_is_m;
    const bool eligible_sublinear = core && H.all_sublinear_ok && plus_singular_irreducible;

    auto attach_trace = [&](bound_regime regime) {
        if (!opts.with_bound_trace) return;
        try {
            std::span<const double> start;
            if (regime == bound_regime::plus && !opts.start_vector.empty())
                start = opts.start_vector;
            rep.bound_trace = iterate_bound(spec, rep.summaries, regime, start, opts.q_cap, opts.tol_fix);
        } catch (const error& e) {
            rep.justification.push_back(std::string("bound iteration unavailable: ") + e.what());
        }
    };
    auto attach_null_vector = [&]() {
        try {
            rep.null_vector = positive_null_vector(rep.m_plus, opts.tol_null);
        } catch (const error& e) {
            rep.justification.push_back(std::string("null vector unavailable: ") + e.what());
        }
    };

    if (eligible_bounded) {
        // the bounded-activation arm has the weaker matrix requirement; report it
        // as primary and note the other arm when it also applies
        rep.verdict = rep.autonomous ? verdict_kind::attractive_autonomous : verdict_kind::attractive_bounded;
        rep.justification.push_back(std::string("limsup criterion matrix is a ") +
                                    to_string(rep.m_hat_class.m_class) + " and all activations are bounded");
        if (eligible_sublinear) {
            rep.justification.push_back("the sublinear arm applies as well (sup matrix singular irreducible)");
            attach_null_vector();
        }
        attach_trace(bound_regime::hat);
    } else if (eligible_sublinear) {
        rep.verdict = rep.autonomous ? verdict_kind::attractive_autonomous : verdict_kind::attractive_sublinear;
        rep.justification.push_back("sup criterion matrix is a singular irreducible M-matrix and all "
                                    "activations are sublinear");
        attach_null_vector();
        attach_trace(bound_regime::plus);
    } else {
        rep.verdict = verdict_kind::inconclusive;
        if (core) {
            if (!H.all_bounded_regime)
                fail("bounded-activation arm: not all activations are declared bounded");
            else if (!hat_is_m)
                fail("bounded-activation arm: limsup criterion matrix is not an M-matrix");
            if (!H.all_sublinear_ok)
                fail("sublinear arm: not every activation passed the sublinear check");
            else if (!plus_singular_irreducible)
                fail(std::string("sublinear arm: sup criterion matrix is ") +
                     to_string(rep.m_plus_class.m_class) +
                     (rep.m_plus_class.irreducible ? "" : ", reducible") +
                     " (needs singular irreducible M-matrix)");
        }
        rep.justification.push_back("the criteria are sufficient conditions only; no instability is claimed");
    }

    if (rep.autonomous && rep.attractive()) {
        double diff = 0.0;
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j)
                diff = std::max(diff, std::fabs(rep.m_plus.at(i, j) - rep.m_hat.at(i, j)));
        if (diff > 1e-12)
            rep.justification.push_back("declared sup/limsup summaries disagree on an autonomous model");
        else
            rep.justification.push_back("autonomous model: the two criterion matrices coincide");
    }
    return rep;
}

/// Diagnostic change of variables y_i = x_i / d_i: coefficients and inputs of
/// row i are divided by d_i and activations pre-compose with multiplication by
/// d_j, so simulating the rescaled model reproduces the original trajectory
/// divided by d.
inline model_spec rescale_model(const model_spec& spec, std::span<const double> d) {
    if (static_cast<int>(d.size()) != spec.n) throw error("rescale_model: dimension mismatch");
    for (double v : d)
        if (!(v > 0.0)) throw error("rescale_model: d must be positive componentwise");

    model_spec out = spec;
    using binop = detail::expr_node::binop;
    auto divide = [](const expr& e, double den, const char* var) {
        if (den == 1.0) return e;
        return expr::binary(binop::div, e, expr::constant(den, var));
    };
    for (int i = 0; i < spec.n; ++i) {
        double di = d[static_cast<std::size_t>(i)];
        out.I[i].fx = divide(spec.I[i].fx, di, "m");
        if (out.I[i].cert == input_certificate::declared) out.I[i].total /= di;
        if (spec.declared.a_sup[i]) out.declared.a_sup[i] = spec.declared.a_sup[i];
        for (int j = 0; j < spec.n; ++j) {
            double dj = d[static_cast<std::size_t>(j)];
            out.c[i][j] = divide(spec.c[i][j], di, "m");
            if (dj != 1.0) {
                out.g[i][j].fx = spec.g[i][j].fx.substitute_affine(dj, 0.0);
                out.g[i][j].bound = spec.g[i][j].bound * dj;
            }
            if (spec.declared.c_sup[i][j]) out.declared.c_sup[i][j] = *spec.declared.c_sup[i][j] / di;
            if (spec.declared.c_limsup[i][j]) out.declared.c_limsup[i][j] = *spec.declared.c_limsup[i][j] / di;
            for (int p = 0; p < spec.P; ++p) {
                out.b[i][j][p] = divide(spec.b[i][j][p], di, "m");
                if (dj != 1.0) {
                    out.f[i][j][p].fx = spec.f[i][j][p].fx.substitute_affine(dj, 0.0);
                    out.f[i][j][p].bound = spec.f[i][j][p].bound * dj;
                }
                if (spec.declared.b_sup[i][j][p])
                    out.declared.b_sup[i][j][p] = *spec.declared.b_sup[i][j][p] / di;
                if (spec.declared.b_limsup[i][j][p])
                    out.declared.b_limsup[i][j][p] = *spec.declared.b_limsup[i][j][p] / di;
            }
        }
    }
    if (!out.name.empty()) out.name += " (rescaled)";
    return out;
}

}  // namespace hopfield
