#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hopfield/criterion.hpp"
#include "hopfield/envelope.hpp"
#include "hopfield/matrix_analysis.hpp"
#include "hopfield/simulator.hpp"

namespace hopfield {

inline std::string format_sig(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Matrix file: first line the order n, then n whitespace-separated rows.
/// Entries may be decimals or exact fractions like "2/3".
inline square_matrix parse_matrix_stream(std::istream& in) {
    int n = 0;
    if (!(in >> n) || n < 1) throw config_error("matrix file: expected the order n on the first line");
    if (n > 4096) throw config_error("matrix file: order is implausibly large");
    square_matrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::string tok;
            if (!(in >> tok))
                throw config_error("matrix file: missing entry (" + std::to_string(i + 1) + "," +
                                   std::to_string(j + 1) + ")");
            std::size_t slash = tok.find('/');
            try {
                if (slash != std::string::npos) {
                    double num = std::stod(tok.substr(0, slash));
                    double den = std::stod(tok.substr(slash + 1));
                    if (den == 0.0) throw config_error("matrix file: zero denominator in '" + tok + "'");
                    m.at(i, j) = num / den;
                } else {
                    m.at(i, j) = std::stod(tok);
                }
            } catch (const std::invalid_argument&) {
                throw config_error("matrix file: malformed entry '" + tok + "'");
            } catch (const std::out_of_range&) {
                throw config_error("matrix file: entry out of range '" + tok + "'");
            }
            if (!std::isfinite(m.at(i, j)))
                throw config_error("matrix file: non-finite entry '" + tok + "'");
        }
    return m;
}

inline void write_matrix(std::ostream& os, const square_matrix& m, int digits = 6,
                         const char* indent = "  ") {
    for (int i = 0; i < m.n; ++i) {
        os << indent;
        for (int j = 0; j < m.n; ++j) os << (j ? "  " : "") << format_sig(m.at(i, j), digits);
        os << '\n';
    }
}

inline void write_trajectory_csv(std::ostream& os, const simulation_report& rep) {
    const int n = rep.trajectory.empty() ? 0 : static_cast<int>(rep.trajectory.front().size());
    os << "m";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    os << ",sup_norm,tail_err\n";
    for (std::size_t k = 0; k < rep.trajectory.size(); ++k) {
        os << (rep.sigma + static_cast<long>(k) + 1);
        for (double v : rep.trajectory[k]) os << ',' << format_sig(v, 17);
        os << ',' << format_sig(rep.sup_norm_series[k], 17) << ','
           << format_sig(rep.truncation_budget[k], 17) << '\n';
    }
}

inline void write_bound_csv(std::ostream& os, const bound_iteration& it) {
    const int n = it.trace.empty() ? 0 : static_cast<int>(it.trace.front().size());
    os << "q";
    for (int i = 1; i <= n; ++i) os << ",S_" << i;
    os << '\n';
    for (std::size_t q = 0; q < it.trace.size(); ++q) {
        os << q;
        for (double v : it.trace[q]) os << ',' << format_sig(v, 17);
        os << '\n';
    }
}

inline void write_matrix_report(std::ostream& os, const square_matrix& m,
                                const matrix_classification& cls, bool with_minors = true) {
    os << "order: " << m.n << "\n";
    os << "entries:\n";
    write_matrix(os, m);
    os << "Z-matrix: " << (cls.is_z ? "yes" : "no") << "\n";
    os << "class: " << to_string(cls.m_class) << "\n";
    os << "irreducible: " << (cls.irreducible ? "yes" : "no") << "\n";
    os << "spectral test: shift s = " << format_sig(cls.spectral.shift, 6)
       << ", rho(B) = " << format_sig(cls.spectral.rho, 6)
       << (cls.spectral.used_squaring_fallback ? " (power iteration cycled; squaring fallback)" : "")
       << "\n";
    if (cls.m_class == m_matrix_class::singular_m && cls.irreducible) {
        try {
            auto d = positive_null_vector(m);
            os << "positive null vector d (max-normalized):";
            for (double v : d) os << ' ' << format_sig(v, 6);
            os << "\n";
        } catch (const error& e) {
            os << "positive null vector: " << e.what() << "\n";
        }
    }
    if (with_minors && m.n <= 12) {
        os << "principal minors:\n";
        for (const auto& entry : principal_minors(m)) {
            os << "  {";
            for (std::size_t k = 0; k < entry.index_set.size(); ++k)
                os << (k ? "," : "") << entry.index_set[k] + 1;
            os << "}: " << format_sig(entry.value, 6) << "\n";
        }
    }
}

inline void write_hypothesis_report(std::ostream& os, const hypothesis_report& h) {
    auto line = [&](const char* name, const hypothesis_result& r) {
        os << "  " << name << ": " << to_string(r.status);
        if (!r.detail.empty()) os << " - " << r.detail;
        os << "\n";
    };
    line("(H1) leakage contraction", h.h1);
    line("(H2) delay drift", h.h2);
    line("(H3) coefficient boundedness", h.h3);
    line("(H4) kernel mass", h.h4);
    line("(H5) input summability", h.h5);
    line("(H6) activation bounds", h.h6);
}

inline void write_criterion_report(std::ostream& os, const criterion_report& rep,
                                   const std::string& model_name) {
    os << "model: " << (model_name.empty() ? "(unnamed)" : model_name) << "\n";
    os << "hypotheses:\n";
    write_hypothesis_report(os, rep.hypotheses);
    if (rep.matrices_valid) {
        os << "sup criterion matrix (M+): " << to_string(rep.m_plus_class.m_class)
           << (rep.m_plus_class.irreducible ? ", irreducible" : ", reducible") << "\n";
        write_matrix(os, rep.m_plus);
        os << "limsup criterion matrix (M^): " << to_string(rep.m_hat_class.m_class)
           << (rep.m_hat_class.irreducible ? ", irreducible" : ", reducible") << "\n";
        write_matrix(os, rep.m_hat);
    }
    if (rep.null_vector) {
        os << "positive null vector d:";
        for (double v : *rep.null_vector) os << ' ' << format_sig(v, 6);
        os << "\n";
    }
    if (rep.bound_trace) {
        os << "bound iteration (" << to_string(rep.bound_trace->regime) << "): "
           << rep.bound_trace->iterations << " iterations, "
           << (rep.bound_trace->converged ? "converged" : "not converged") << ", final S =";
        for (double v : rep.bound_trace->converged_to) os << ' ' << format_sig(v, 6);
        os << "\n";
    }
    os << "verdict: " << rep.display_verdict() << "\n";
    for (const auto& j : rep.justification) os << "  - " << j << "\n";
    if (!rep.provenance_flags.empty()) {
        os << "heuristic provenance:\n";
        for (const auto& p : rep.provenance_flags) os << "  - " << p << "\n";
    }
}

}  // namespace hopfield
