#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopfield/expr.hpp"
#include "hopfield/matrix_analysis.hpp"

namespace hopfield {

class config_error : public error {
    using error::error;
};
class validation_error : public error {
    using error::error;
};

enum class activation_regime { bounded, sublinear, lipschitz };

inline const char* to_string(activation_regime r) {
    switch (r) {
        case activation_regime::bounded: return "bounded";
        case activation_regime::sublinear: return "sublinear";
        case activation_regime::lipschitz: return "lipschitz";
    }
    return "?";
}

/// Activation together with its declared bound constant (F or G).
struct activation_spec {
    expr fx = expr::constant(0.0, "u");
    double bound = 1.0;
    activation_regime regime = activation_regime::bounded;

    bool identically_zero() const { return fx.is_constant() && fx.eval(0.0) == 0.0; }
};

enum class kernel_form { zero, geometric, telescoping_inverse_quadratic, closed_form };

/// Summable kernel of a distributed-delay term. Geometric kernels are
/// scale*ratio^l; the telescoping form is 1/((l+1)(l+2)) whose absolute tail
/// from l is exactly 1/(l+1).
struct kernel_spec {
    kernel_form form = kernel_form::zero;
    double ratio = 0.0;
    double scale = 0.0;
    expr closed = expr::constant(0.0, "l");
    double declared_total = 0.0;  // claimed sum of |zeta_l|

    double weight(long l) const {
        switch (form) {
            case kernel_form::zero: return 0.0;
            case kernel_form::geometric: return scale * std::pow(ratio, static_cast<double>(l));
            case kernel_form::telescoping_inverse_quadratic:
                return 1.0 / (static_cast<double>(l + 1) * static_cast<double>(l + 2));
            case kernel_form::closed_form:
            default: return closed.eval(static_cast<double>(l));
        }
    }

    bool has_analytic_abs_tail() const { return form != kernel_form::closed_form; }

    /// Upper bound for sum_{k>=l} |zeta_k| (analytic forms only).
    double abs_tail(double l) const {
        switch (form) {
            case kernel_form::zero: return 0.0;
            case kernel_form::geometric:
                return std::fabs(scale) * std::pow(std::fabs(ratio), l) / (1.0 - std::fabs(ratio));
            case kernel_form::telescoping_inverse_quadratic: return 1.0 / (l + 1.0);
            case kernel_form::closed_form:
            default: return declared_total;  // refined against prefix sums by the caller
        }
    }

    std::optional<double> signed_tail(double l) const {
        switch (form) {
            case kernel_form::zero: return 0.0;
            case kernel_form::geometric:
                return scale * std::pow(ratio, l) / (1.0 - ratio);
            case kernel_form::telescoping_inverse_quadratic: return 1.0 / (l + 1.0);
            case kernel_form::closed_form:
            default: return std::nullopt;
        }
    }

    std::optional<double> signed_total() const { return signed_tail(0.0); }
};

enum class input_certificate { geometric, p_series, finite_support, declared };

/// External input with a summability certificate backing hypothesis (H5).
struct input_spec {
    expr fx = expr::constant(0.0, "m");
    input_certificate cert = input_certificate::finite_support;
    double ratio = 0.0;     // geometric
    double exponent = 0.0;  // p_series
    long last_m = 0;        // finite_support
    double total = 0.0;     // declared
};

struct declared_summaries {
    std::vector<std::optional<double>> a_sup, a_limsup;
    std::vector<std::vector<std::vector<std::optional<double>>>> b_sup, b_limsup;
    std::vector<std::vector<std::optional<double>>> c_sup, c_limsup;

    void resize(int n, int P) {
        a_sup.assign(n, std::nullopt);
        a_limsup.assign(n, std::nullopt);
        b_sup.assign(n, std::vector<std::vector<std::optional<double>>>(
                            n, std::vector<std::optional<double>>(P, std::nullopt)));
        b_limsup = b_sup;
        c_sup.assign(n, std::vector<std::optional<double>>(n, std::nullopt));
        c_limsup = c_sup;
    }
};

/// Complete parameterization of the network update
///   x_i(m+1) = a_i(m) x_i(m - nu_i(m))
///            + sum_j sum_p b_ijp(m) f_ijp(x_j(m - tau_ijp(m)))
///            + sum_j c_ij(m) sum_l zeta_ijl g_ij(x_j(m-l)) + I_i(m).
struct model_spec {
    int n = 0;
    int P = 0;
    std::vector<expr> a, nu;                                  // n, variable m
    std::vector<std::vector<std::vector<expr>>> b, tau;       // n x n x P
    std::vector<std::vector<expr>> c;                         // n x n
    std::vector<std::vector<kernel_spec>> zeta;               // n x n
    std::vector<std::vector<std::vector<activation_spec>>> f; // n x n x P
    std::vector<std::vector<activation_spec>> g;              // n x n
    std::vector<input_spec> I;                                // n
    declared_summaries declared;
    long check_start = 0;
    std::string name;
    std::vector<std::string> notes;

    static bool zero_expr(const expr& e) { return e.is_constant() && e.eval(0.0) == 0.0; }

    bool b_used(int i, int j, int p) const { return !zero_expr(b[i][j][p]); }
    bool c_used(int i, int j) const { return !zero_expr(c[i][j]); }

    bool autonomous() const {
        for (const auto& e : a)
            if (!e.is_constant()) return false;
        for (const auto& e : nu)
            if (!e.is_constant()) return false;
        for (const auto& bi : b)
            for (const auto& bij : bi)
                for (const auto& e : bij)
                    if (!e.is_constant()) return false;
        for (const auto& ti : tau)
            for (const auto& tij : ti)
                for (const auto& e : tij)
                    if (!e.is_constant()) return false;
        for (const auto& ci : c)
            for (const auto& e : ci)
                if (!e.is_constant()) return false;
        for (const auto& in : I)
            if (!in.fx.is_constant()) return false;
        return true;
    }
};

// --- config loading ----------------------------------------------------------

namespace detail {

inline double constant_value(const nlohmann::json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        expr e;
        try {
            e = expr::parse(v.get<std::string>(), "\x01");  // no identifier can match
        } catch (const parse_error& pe) {
            throw config_error(where + ": " + pe.what());
        }
        if (!e.is_constant()) throw config_error(where + ": expected a constant value");
        return e.eval(0.0);
    }
    throw config_error(where + ": expected number or constant string");
}

inline expr expr_field(const nlohmann::json& v, const char* var, const std::string& where) {
    if (v.is_null()) return expr::constant(0.0, var);
    if (v.is_number()) return expr::constant(v.get<double>(), var);
    if (!v.is_string()) throw config_error(where + ": expected expression string");
    try {
        return expr::parse(v.get<std::string>(), var);
    } catch (const parse_error& pe) {
        throw config_error(where + ": " + pe.what());
    }
}

inline kernel_spec kernel_field(const nlohmann::json& v, const std::string& where) {
    kernel_spec k;
    if (v.is_null()) return k;
    if (!v.is_object()) throw config_error(where + ": expected kernel object");
    std::string form = v.value("form", "");
    const nlohmann::json params = v.contains("params") ? v.at("params") : nlohmann::json::object();
    if (form == "zero") {
        k.form = kernel_form::zero;
    } else if (form == "geometric") {
        k.form = kernel_form::geometric;
        if (!params.contains("ratio") || !params.contains("scale"))
            throw config_error(where + ": geometric kernel needs params.ratio and params.scale");
        k.ratio = constant_value(params.at("ratio"), where + ".ratio");
        k.scale = constant_value(params.at("scale"), where + ".scale");
        if (std::fabs(k.ratio) >= 1.0) throw config_error(where + ": |ratio| must be < 1");
        k.declared_total = std::fabs(k.scale) / (1.0 - std::fabs(k.ratio));
    } else if (form == "telescoping_inverse_quadratic") {
        k.form = kernel_form::telescoping_inverse_quadratic;
        k.declared_total = 1.0;
    } else if (form == "closed_form") {
        k.form = kernel_form::closed_form;
        if (!params.contains("expr")) throw config_error(where + ": closed_form kernel needs params.expr");
        k.closed = expr_field(params.at("expr"), "l", where + ".expr");
        if (!v.contains("total")) throw config_error(where + ": closed_form kernel needs total");
    } else {
        throw config_error(where + ": unknown kernel form '" + form + "'");
    }
    if (v.contains("total")) k.declared_total = constant_value(v.at("total"), where + ".total");
    return k;
}

inline activation_spec activation_field(const nlohmann::json& v, const std::string& where) {
    activation_spec act;
    if (v.is_null()) return act;
    if (!v.is_object()) throw config_error(where + ": expected activation object");
    if (!v.contains("expr")) throw config_error(where + ": activation needs expr");
    act.fx = expr_field(v.at("expr"), "u", where + ".expr");
    act.bound = v.contains("bound") ? constant_value(v.at("bound"), where + ".bound") : 1.0;
    if (!(act.bound > 0.0)) throw config_error(where + ": bound must be positive");
    std::string regime = v.value("regime", "bounded");
    if (regime == "bounded") act.regime = activation_regime::bounded;
    else if (regime == "sublinear") act.regime = activation_regime::sublinear;
    else if (regime == "lipschitz") act.regime = activation_regime::lipschitz;
    else throw config_error(where + ": unknown regime '" + regime + "'");
    return act;
}

inline input_spec input_field(const nlohmann::json& v, const std::string& where) {
    input_spec in;
    if (v.is_null()) return in;
    if (!v.is_object()) throw config_error(where + ": expected input object");
    if (!v.contains("expr")) throw config_error(where + ": input needs expr");
    in.fx = expr_field(v.at("expr"), "m", where + ".expr");
    if (!v.contains("certificate")) throw config_error(where + ": input needs certificate");
    const nlohmann::json& cert = v.at("certificate");
    std::string type = cert.value("type", "");
    if (type == "geometric") {
        in.cert = input_certificate::geometric;
        in.ratio = constant_value(cert.at("ratio"), where + ".certificate.ratio");
    } else if (type == "p_series") {
        in.cert = input_certificate::p_series;
        in.exponent = constant_value(cert.at("p"), where + ".certificate.p");
    } else if (type == "finite_support") {
        in.cert = input_certificate::finite_support;
        in.last_m = cert.at("last_m").get<long>();
    } else if (type == "declared") {
        in.cert = input_certificate::declared;
        in.total = constant_value(cert.at("total"), where + ".certificate.total");
    } else {
        throw config_error(where + ": unknown certificate type '" + type + "'");
    }
    return in;
}

template <typename T>
inline void parse_declared_vector(const nlohmann::json& j, const char* key, int n,
                                  std::vector<std::optional<double>>& out) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
        throw config_error(std::string("declared.") + key + ": expected array of length " +
                           std::to_string(n));
    for (int i = 0; i < n; ++i)
        if (!arr[i].is_null()) out[i] = constant_value(arr[i], std::string("declared.") + key);
}

}  // namespace detail

/// Parse a model configuration from JSON text. Structural validation only;
/// hypothesis checking is a separate step.
inline model_spec load_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config must be a JSON object");
    model_spec spec;
    if (!j.contains("n") || !j.contains("P")) throw config_error("config needs n and P");
    spec.n = j.at("n").get<int>();
    spec.P = j.at("P").get<int>();
    if (spec.n < 1 || spec.P < 1) throw config_error("n and P must be >= 1");
    if (spec.n > 64) throw config_error("n too large (limit 64)");
    spec.name = j.value("name", "");
    spec.check_start = j.value("check_start", 0L);
    if (spec.check_start < 0) throw config_error("check_start must be >= 0");
    if (j.contains("notes"))
        for (const auto& note : j.at("notes")) spec.notes.push_back(note.get<std::string>());

    const int n = spec.n, P = spec.P;
    auto outer = [&](const char* key, int expect) -> nlohmann::json {
        if (!j.contains(key)) return nlohmann::json::array();
        const auto& arr = j.at(key);
        if (!arr.is_array() || static_cast<int>(arr.size()) > expect)
            throw config_error(std::string(key) + ": expected array of length <= " + std::to_string(expect));
        return arr;
    };
    auto element = [](const nlohmann::json& arr, int idx) -> nlohmann::json {
        if (idx < static_cast<int>(arr.size())) return arr[idx];
        return nlohmann::json();  // null
    };

    if (!j.contains("a")) throw config_error("config needs a (leakage coefficients)");
    const auto a_arr = outer("a", n);
    if (static_cast<int>(a_arr.size()) != n) throw config_error("a: expected exactly n entries");
    const auto nu_arr = outer("nu", n);
    const auto b_arr = outer("b", n);
    const auto tau_arr = outer("tau", n);
    const auto c_arr = outer("c", n);
    const auto zeta_arr = outer("zeta", n);
    const auto f_arr = outer("f", n);
    const auto g_arr = outer("g", n);
    const auto i_arr = outer("I", n);

    spec.a.reserve(n);
    spec.nu.reserve(n);
    for (int i = 0; i < n; ++i) {
        spec.a.push_back(detail::expr_field(element(a_arr, i), "m", "a[" + std::to_string(i) + "]"));
        spec.nu.push_back(detail::expr_field(element(nu_arr, i), "m", "nu[" + std::to_string(i) + "]"));
        spec.I.push_back(detail::input_field(element(i_arr, i), "I[" + std::to_string(i) + "]"));
    }

    spec.b.resize(n);
    spec.tau.resize(n);
    spec.c.resize(n);
    spec.zeta.resize(n);
    spec.f.resize(n);
    spec.g.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto bi = element(b_arr, i), ti = element(tau_arr, i), ci = element(c_arr, i);
        const auto zi = element(zeta_arr, i), fi = element(f_arr, i), gi = element(g_arr, i);
        auto inner = [&](const nlohmann::json& row, int idx) -> nlohmann::json {
            if (row.is_null()) return nlohmann::json();
            if (!row.is_array()) throw config_error("expected nested array in coupling field");
            return idx < static_cast<int>(row.size()) ? row[idx] : nlohmann::json();
        };
        spec.b[i].resize(n);
        spec.tau[i].resize(n);
        spec.c[i].reserve(n);
        spec.zeta[i].reserve(n);
        spec.f[i].resize(n);
        spec.g[i].reserve(n);
        for (int jj = 0; jj < n; ++jj) {
            const auto bij = inner(bi, jj), tij = inner(ti, jj), fij = inner(fi, jj);
            for (int p = 0; p < P; ++p) {
                std::string tag = "[" + std::to_string(i) + "][" + std::to_string(jj) + "][" +
                                  std::to_string(p) + "]";
                spec.b[i][jj].push_back(detail::expr_field(inner(bij, p), "m", "b" + tag));
                spec.tau[i][jj].push_back(detail::expr_field(inner(tij, p), "m", "tau" + tag));
                spec.f[i][jj].push_back(detail::activation_field(inner(fij, p), "f" + tag));
            }
            std::string tag2 = "[" + std::to_string(i) + "][" + std::to_string(jj) + "]";
            spec.c[i].push_back(detail::expr_field(inner(ci, jj), "m", "c" + tag2));
            spec.zeta[i].push_back(detail::kernel_field(inner(zi, jj), "zeta" + tag2));
            spec.g[i].push_back(detail::activation_field(inner(gi, jj), "g" + tag2));
        }
    }

    spec.declared.resize(n, P);
    if (j.contains("declared")) {
        const auto& d = j.at("declared");
        detail::parse_declared_vector<double>(d, "a_sup", n, spec.declared.a_sup);
        detail::parse_declared_vector<double>(d, "a_limsup", n, spec.declared.a_limsup);
        auto nested3 = [&](const char* key,
                           std::vector<std::vector<std::vector<std::optional<double>>>>& out) {
            if (!d.contains(key)) return;
            const auto& arr = d.at(key);
            for (int i = 0; i < n && i < static_cast<int>(arr.size()); ++i) {
                if (arr[i].is_null()) continue;
                for (int jj = 0; jj < n && jj < static_cast<int>(arr[i].size()); ++jj) {
                    if (arr[i][jj].is_null()) continue;
                    for (int p = 0; p < P && p < static_cast<int>(arr[i][jj].size()); ++p)
                        if (!arr[i][jj][p].is_null())
                            out[i][jj][p] = detail::constant_value(arr[i][jj][p], std::string("declared.") + key);
                }
            }
        };
        auto nested2 = [&](const char* key, std::vector<std::vector<std::optional<double>>>& out) {
            if (!d.contains(key)) return;
            const auto& arr = d.at(key);
            for (int i = 0; i < n && i < static_cast<int>(arr.size()); ++i) {
                if (arr[i].is_null()) continue;
                for (int jj = 0; jj < n && jj < static_cast<int>(arr[i].size()); ++jj)
                    if (!arr[i][jj].is_null())
                        out[i][jj] = detail::constant_value(arr[i][jj], std::string("declared.") + key);
            }
        };
        nested3("b_sup", spec.declared.b_sup);
        nested3("b_limsup", spec.declared.b_limsup);
        nested2("c_sup", spec.declared.c_sup);
        nested2("c_limsup", spec.declared.c_limsup);
    }
    return spec;
}

// --- hypothesis checking -----------------------------------------------------

enum class check_status { verified_analytic, verified_sampled, failed, undecidable };

inline const char* to_string(check_status s) {
    switch (s) {
        case check_status::verified_analytic: return "verified (analytic)";
        case check_status::verified_sampled: return "verified (sampled)";
        case check_status::failed: return "failed";
        case check_status::undecidable: return "undecidable";
    }
    return "?";
}

struct hypothesis_result {
    check_status status = check_status::undecidable;
    std::string detail;
    bool ok() const {
        return status == check_status::verified_analytic || status == check_status::verified_sampled;
    }
};

struct check_tolerances {
    double tol_sup = 1e-9;
    double tol_sum = 1e-9;
    double tol_eq = 1e-10;
    double tol_act = 1e-9;
};

struct hypothesis_report {
    hypothesis_result h1, h2, h3, h4, h5, h6;
    bool all_bounded_regime = false;  // every used activation declared bounded
    bool all_sublinear_ok = false;    // every used activation passed the sublinear grid check
    std::vector<double> input_total_bounds;  // certified bound for sum_m |I_i(m)| per neuron
    std::vector<std::string> provenance;
    bool core_ok() const { return h1.ok() && h2.ok() && h3.ok() && h4.ok() && h5.ok(); }
};

namespace detail {

inline long snap_nonneg_int(double v, const std::string& where) {
    double r = std::nearbyint(v);
    if (std::fabs(v - r) > 1e-9)
        throw validation_error(where + ": value " + std::to_string(v) + " is not an integer");
    if (r < 0.0) throw validation_error(where + ": negative value " + std::to_string(v));
    return static_cast<long>(r);
}

struct activation_check_result {
    bool zero_at_origin = false;
    bool sublinear_ok = false;
    bool bounded_ok = false;
    bool lipschitz_ok = false;
    std::string detail;
};

inline std::vector<double> activation_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 96; ++k) {
        double u = static_cast<double>(k) / 96.0;
        grid.push_back(u);
        grid.push_back(-u);
    }
    for (int k = 1; k <= 160; ++k) {
        double u = 1.0 + 99.0 * static_cast<double>(k) / 160.0;
        grid.push_back(u);
        grid.push_back(-u);
    }
    return grid;
}

inline activation_check_result check_activation(const activation_spec& act, double tol_act) {
    activation_check_result res;
    static const std::vector<double> grid = activation_grid();
    const double F = act.bound;
    try {
        res.zero_at_origin = act.fx.eval(0.0) == 0.0;
        res.sublinear_ok = true;
        double inner_sup = 0.0, outer_sup = 0.0;
        for (double u : grid) {
            double fu = std::fabs(act.fx.eval(u));
            if (fu > F * std::fabs(u) + tol_act * std::max(1.0, F * std::fabs(u))) {
                res.sublinear_ok = false;
                res.detail = "violates |f(u)| <= F|u| at u = " + std::to_string(u);
            }
            if (std::fabs(u) >= 50.0)
                outer_sup = std::max(outer_sup, fu);
            else
                inner_sup = std::max(inner_sup, fu);
        }
        res.bounded_ok = outer_sup <= 1.05 * inner_sup + tol_act;
        if (!res.bounded_ok && res.detail.empty())
            res.detail = "still growing on |u| in [50,100]; looks unbounded";

        res.lipschitz_ok = true;
        const std::size_t g = grid.size();
        for (std::size_t k = 0; k < g; k += 3) {
            double u = grid[k];
            double v = grid[(k * 7 + 13) % g];
            double lhs = std::fabs(act.fx.eval(u) - act.fx.eval(v));
            double rhs = F * std::fabs(u - v);
            if (lhs > rhs + tol_act * std::max(1.0, rhs)) {
                res.lipschitz_ok = false;
                if (res.detail.empty())
                    res.detail = "violates the Lipschitz bound between u = " + std::to_string(u) +
                                 " and v = " + std::to_string(v);
            }
        }
    } catch (const eval_error& e) {
        res = {};
        res.detail = std::string("expression domain error on the check grid: ") + e.what();
    }
    return res;
}

inline double sample_abs_max(const expr& e, long from, long to) {
    double best = 0.0;
    for (long m = from; m <= to; ++m) best = std::max(best, std::fabs(e.eval(static_cast<double>(m))));
    return best;
}

}  // namespace detail

inline hypothesis_report check_hypotheses(const model_spec& spec, long horizon = 10000,
                                          check_tolerances tol = {}) {
    if (horizon < 1) throw error("check_hypotheses: horizon must be >= 1");
    hypothesis_report rep;
    const int n = spec.n, P = spec.P;
    const long m0 = spec.check_start;

    // (H1): sup |a_i| < 1
    {
        bool all_const = true;
        std::string fail;
        for (int i = 0; i < n && fail.empty(); ++i) {
            if (spec.declared.a_sup[i] && *spec.declared.a_sup[i] >= 1.0)
                fail = "declared a_sup[" + std::to_string(i) + "] >= 1";
            if (spec.a[i].is_constant()) {
                if (std::fabs(spec.a[i].eval(0.0)) >= 1.0)
                    fail = "|a_" + std::to_string(i + 1) + "| >= 1";
            } else {
                all_const = false;
                for (long m = m0; m <= horizon; ++m) {
                    if (std::fabs(spec.a[i].eval(static_cast<double>(m))) >= 1.0) {
                        fail = "|a_" + std::to_string(i + 1) + "(" + std::to_string(m) + ")| >= 1";
                        break;
                    }
                }
            }
        }
        if (!fail.empty())
            rep.h1 = {check_status::failed, fail};
        else
            rep.h1 = {all_const ? check_status::verified_analytic : check_status::verified_sampled,
                      "strict leakage contraction on the sampled horizon"};
    }

    // (H2): m - nu_i(m) and m - tau_ijp(m) drift to infinity. Sampled heuristic:
    // delays stay integer, below the sublinear cap, and the final window of
    // m - delay(m) clears everything seen in the first half.
    {
        bool all_const = true;
        std::string fail;
        auto check_delay = [&](const expr& d, const std::string& label) {
            if (!fail.empty()) return;
            try {
                if (d.is_constant()) {
                    detail::snap_nonneg_int(d.eval(0.0), label);
                    return;
                }
                all_const = false;
                double first_half_max = -1e300, tail_min = 1e300;
                for (long m = m0; m <= horizon; ++m) {
                    long dv = detail::snap_nonneg_int(d.eval(static_cast<double>(m)), label);
                    double reach = static_cast<double>(m - dv);
                    if (dv > 0.95 * static_cast<double>(m) + 64.0) {
                        fail = label + ": delay is not sublinear at m = " + std::to_string(m);
                        return;
                    }
                    if (m <= m0 + (horizon - m0) / 2) first_half_max = std::max(first_half_max, reach);
                    if (m > horizon - 50) tail_min = std::min(tail_min, reach);
                }
                if (!(tail_min > first_half_max))
                    fail = label + ": lookback horizon does not advance";
            } catch (const validation_error& e) {
                fail = e.what();
            } catch (const eval_error& e) {
                fail = label + ": " + e.what();
            }
        };
        for (int i = 0; i < n; ++i) check_delay(spec.nu[i], "nu[" + std::to_string(i) + "]");
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
                for (int p = 0; p < P; ++p)
                    if (spec.b_used(i, jj, p))
                        check_delay(spec.tau[i][jj][p], "tau[" + std::to_string(i) + "][" +
                                                            std::to_string(jj) + "][" + std::to_string(p) + "]");
        if (!fail.empty())
            rep.h2 = {check_status::failed, fail};
        else if (all_const)
            rep.h2 = {check_status::verified_analytic, "all delays constant"};
        else {
            rep.h2 = {check_status::verified_sampled, "delay drift verified on the sampled horizon"};
            rep.provenance.push_back("H2 verified by sampling only");
        }
    }

    // (H3): b and c bounded. Constant coefficients are analytic; otherwise a
    // two-window growth heuristic.
    {
        bool all_const = true;
        std::string fail;
        auto check_bounded = [&](const expr& e, const std::string& label) {
            if (!fail.empty() || e.is_constant()) return;
            all_const = false;
            try {
                long mid = m0 + (horizon - m0) / 2;
                double early = detail::sample_abs_max(e, m0, mid);
                double late = detail::sample_abs_max(e, mid + 1, horizon);
                if (late > 1.2 * early + tol.tol_sup)
                    fail = label + ": still growing across the sampled horizon";
            } catch (const eval_error& ee) {
                fail = label + ": " + ee.what();
            }
        };
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) {
                check_bounded(spec.c[i][jj], "c[" + std::to_string(i) + "][" + std::to_string(jj) + "]");
                for (int p = 0; p < P; ++p)
                    check_bounded(spec.b[i][jj][p], "b[" + std::to_string(i) + "][" +
                                                        std::to_string(jj) + "][" + std::to_string(p) + "]");
            }
        if (!fail.empty())
            rep.h3 = {check_status::failed, fail};
        else
            rep.h3 = {all_const ? check_status::verified_analytic : check_status::verified_sampled,
                      "coefficient magnitudes level off on the sampled horizon"};
    }

    // (H4): sum_l |zeta_ijl| = 1 for every used distributed coupling.
    {
        bool any_sampled = false;
        std::string fail;
        for (int i = 0; i < n && fail.empty(); ++i)
            for (int jj = 0; jj < n && fail.empty(); ++jj) {
                if (!spec.c_used(i, jj)) continue;
                const kernel_spec& k = spec.zeta[i][jj];
                std::string label = "zeta[" + std::to_string(i) + "][" + std::to_string(jj) + "]";
                switch (k.form) {
                    case kernel_form::zero:
                        fail = label + ": coupling used but kernel missing";
                        break;
                    case kernel_form::geometric: {
                        double total = std::fabs(k.scale) / (1.0 - std::fabs(k.ratio));
                        if (std::fabs(total - 1.0) > tol.tol_sum)
                            fail = label + ": |scale|/(1-|ratio|) = " + std::to_string(total) + " != 1";
                        break;
                    }
                    case kernel_form::telescoping_inverse_quadratic:
                        break;  // sums to exactly 1
                    case kernel_form::closed_form: {
                        any_sampled = true;
                        if (std::fabs(k.declared_total - 1.0) > tol.tol_sum) {
                            fail = label + ": declared total != 1";
                            break;
                        }
                        double partial = 0.0;
                        for (long l = 0; l < 100000; ++l) {
                            double w = std::fabs(k.weight(l));
                            partial += w;
                            if (partial > k.declared_total + tol.tol_sum) {
                                fail = label + ": partial sums exceed the declared total at l = " +
                                       std::to_string(l);
                                break;
                            }
                            if (w < 1e-15 && l > 64) break;
                        }
                        break;
                    }
                }
            }
        if (!fail.empty())
            rep.h4 = {check_status::failed, fail};
        else
            rep.h4 = {any_sampled ? check_status::verified_sampled : check_status::verified_analytic,
                      "kernel mass equals 1 for every used coupling"};
    }

    // (H5): summable inputs, via the per-input certificate.
    {
        rep.input_total_bounds.assign(n, 0.0);
        bool all_zero = true;
        std::string fail;
        for (int i = 0; i < n && fail.empty(); ++i) {
            const input_spec& in = spec.I[i];
            std::string label = "I[" + std::to_string(i) + "]";
            if (model_spec::zero_expr(in.fx)) continue;
            all_zero = false;
            try {
                switch (in.cert) {
                    case input_certificate::geometric: {
                        double r = std::fabs(in.ratio);
                        if (!(r > 0.0 && r < 1.0)) {
                            fail = label + ": geometric certificate needs 0 < |ratio| < 1";
                            break;
                        }
                        double K = 0.0;
                        long fit_end = std::min<long>(horizon, 512);
                        for (long m = 0; m <= fit_end; ++m)
                            K = std::max(K, std::fabs(in.fx.eval(static_cast<double>(m))) /
                                                std::pow(r, static_cast<double>(m)));
                        for (long m = 0; m <= horizon; ++m) {
                            double cap = K * std::pow(r, static_cast<double>(m));
                            if (std::fabs(in.fx.eval(static_cast<double>(m))) > cap * (1.0 + 1e-9) + 1e-300) {
                                fail = label + ": sample at m = " + std::to_string(m) +
                                       " escapes the geometric envelope";
                                break;
                            }
                        }
                        rep.input_total_bounds[i] = K / (1.0 - r);
                        break;
                    }
                    case input_certificate::p_series: {
                        double p = in.exponent;
                        if (!(p > 1.0)) {
                            fail = label + ": p_series certificate needs p > 1";
                            break;
                        }
                        double K = 0.0;
                        for (long m = 0; m <= horizon; ++m) {
                            double w = std::pow(static_cast<double>(m + 1), p);
                            K = std::max(K, std::fabs(in.fx.eval(static_cast<double>(m))) * w);
                        }
                        rep.input_total_bounds[i] = K * (1.0 + 1.0 / (p - 1.0));
                        break;
                    }
                    case input_certificate::finite_support: {
                        double total = 0.0;
                        for (long m = 0; m <= in.last_m; ++m)
                            total += std::fabs(in.fx.eval(static_cast<double>(m)));
                        for (long m = in.last_m + 1; m <= horizon; ++m)
                            if (in.fx.eval(static_cast<double>(m)) != 0.0) {
                                fail = label + ": nonzero sample past last_m at m = " + std::to_string(m);
                                break;
                            }
                        rep.input_total_bounds[i] = total;
                        break;
                    }
                    case input_certificate::declared: {
                        double partial = 0.0;
                        for (long m = 0; m <= horizon; ++m)
                            partial += std::fabs(in.fx.eval(static_cast<double>(m)));
                        if (partial > in.total + tol.tol_sum) {
                            fail = label + ": partial sum exceeds the declared total";
                            break;
                        }
                        rep.input_total_bounds[i] = in.total;
                        break;
                    }
                }
            } catch (const eval_error& e) {
                fail = label + ": " + e.what();
            }
        }
        if (!fail.empty())
            rep.h5 = {check_status::failed, fail};
        else
            rep.h5 = {all_zero ? check_status::verified_analytic : check_status::verified_sampled,
                      "inputs summable per their certificates"};
    }

    // (H6)/(H6*)/(H6+): per-activation grid checks. Bounded activations are
    // required to dominate |f(u)| <= F|u| on the whole grid (which is what the
    // criterion actually consumes) plus a saturation heuristic; strictness of
    // the inequalities is assumed from the config.
    {
        bool all_bounded = true, all_sublinear = true;
        std::string fail;
        auto run_check = [&](const activation_spec& act, const std::string& label) {
            if (!fail.empty()) return;
            if (act.identically_zero()) return;
            auto res = detail::check_activation(act, tol.tol_act);
            switch (act.regime) {
                case activation_regime::bounded:
                    if (!res.zero_at_origin) fail = label + ": f(0) != 0";
                    else if (!res.sublinear_ok) fail = label + ": " + res.detail;
                    else if (!res.bounded_ok) fail = label + ": " + res.detail;
                    break;
                case activation_regime::sublinear:
                    all_bounded = false;
                    if (!res.zero_at_origin) fail = label + ": f(0) != 0";
                    else if (!res.sublinear_ok) fail = label + ": " + res.detail;
                    break;
                case activation_regime::lipschitz:
                    all_bounded = false;
                    if (!res.lipschitz_ok) fail = label + ": " + res.detail;
                    if (!(res.zero_at_origin && res.sublinear_ok)) all_sublinear = false;
                    break;
            }
        };
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) {
                if (spec.c_used(i, jj))
                    run_check(spec.g[i][jj], "g[" + std::to_string(i) + "][" + std::to_string(jj) + "]");
                for (int p = 0; p < P; ++p)
                    if (spec.b_used(i, jj, p))
                        run_check(spec.f[i][jj][p], "f[" + std::to_string(i) + "][" +
                                                        std::to_string(jj) + "][" + std::to_string(p) + "]");
            }
        if (!fail.empty()) {
            rep.h6 = {check_status::failed, fail};
            rep.all_bounded_regime = false;
            rep.all_sublinear_ok = false;
        } else {
            rep.h6 = {check_status::verified_sampled, "activation bounds verified on a sampled grid"};
            rep.all_bounded_regime = all_bounded;
            rep.all_sublinear_ok = all_sublinear;
            rep.provenance.push_back("activation inequalities sampled; strictness assumed from config");
        }
    }

    for (const auto& note : spec.notes) rep.provenance.push_back("config note: " + note);
    return rep;
}

// --- coefficient summaries ---------------------------------------------------

enum class summary_provenance { declared, sampled };

struct summary_entry {
    double value = 0.0;
    summary_provenance prov = summary_provenance::declared;
};

struct coefficient_summary {
    int n = 0, P = 0;
    std::vector<summary_entry> a_sup, a_limsup;
    std::vector<std::vector<std::vector<summary_entry>>> b_sup, b_limsup;
    std::vector<std::vector<summary_entry>> c_sup, c_limsup;
    long horizon = 0;
    bool sampled_heuristic = false;  // some entry came from sampling a non-constant coefficient
};

namespace detail {

inline summary_entry summarize_sup(const expr& e, const std::optional<double>& declared, long m0,
                                   long horizon, double tol_sup, const std::string& label,
                                   bool& sampled_flag) {
    if (declared) {
        double cap = *declared + tol_sup;
        if (e.is_constant()) {
            if (std::fabs(e.eval(0.0)) > cap)
                throw validation_error(label + ": declared sup contradicted by the constant value");
        } else {
            for (long m = m0; m <= horizon; ++m)
                if (std::fabs(e.eval(static_cast<double>(m))) > cap)
                    throw validation_error(label + ": declared sup contradicted by sample at m = " +
                                           std::to_string(m));
        }
        return {*declared, summary_provenance::declared};
    }
    if (e.is_constant()) return {std::fabs(e.eval(0.0)), summary_provenance::declared};
    sampled_flag = true;
    return {sample_abs_max(e, m0, horizon), summary_provenance::sampled};
}

inline summary_entry summarize_limsup(const expr& e, const std::optional<double>& declared,
                                      const summary_entry& sup, long m0, long horizon,
                                      double tol_sup, const std::string& label, bool& sampled_flag) {
    if (declared) {
        if (*declared < 0.0 || *declared > sup.value + tol_sup)
            throw validation_error(label + ": declared limsup outside [0, sup]");
        return {*declared, summary_provenance::declared};
    }
    if (e.is_constant()) return {std::fabs(e.eval(0.0)), summary_provenance::declared};
    sampled_flag = true;
    long from = std::max(m0, horizon / 2);
    return {sample_abs_max(e, from, horizon), summary_provenance::sampled};
}

}  // namespace detail

/// Sup and limsup magnitudes of every time-varying coefficient. Declared
/// values are validated against samples and win; otherwise the sampled
/// maximum is used and flagged as heuristic.
inline coefficient_summary summarize_coefficients(const model_spec& spec, long horizon = 10000) {
    coefficient_summary s;
    s.n = spec.n;
    s.P = spec.P;
    s.horizon = horizon;
    const long m0 = spec.check_start;
    const double tol = 1e-9;

    s.a_sup.resize(spec.n);
    s.a_limsup.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        std::string label = "a[" + std::to_string(i) + "]";
        s.a_sup[i] = detail::summarize_sup(spec.a[i], spec.declared.a_sup[i], m0, horizon, tol, label,
                                           s.sampled_heuristic);
        s.a_limsup[i] = detail::summarize_limsup(spec.a[i], spec.declared.a_limsup[i], s.a_sup[i], m0,
                                                 horizon, tol, label, s.sampled_heuristic);
        if (s.a_sup[i].value >= 1.0)
            throw validation_error(label + ": sup >= 1, hypothesis (H1) must hold before summarizing");
    }

    s.b_sup.assign(spec.n, std::vector<std::vector<summary_entry>>(spec.n, std::vector<summary_entry>(spec.P)));
    s.b_limsup = s.b_sup;
    s.c_sup.assign(spec.n, std::vector<summary_entry>(spec.n));
    s.c_limsup = s.c_sup;
    for (int i = 0; i < spec.n; ++i)
        for (int jj = 0; jj < spec.n; ++jj) {
            for (int p = 0; p < spec.P; ++p) {
                std::string label = "b[" + std::to_string(i) + "][" + std::to_string(jj) + "][" +
                                    std::to_string(p) + "]";
                s.b_sup[i][jj][p] = detail::summarize_sup(spec.b[i][jj][p], spec.declared.b_sup[i][jj][p],
                                                          m0, horizon, tol, label, s.sampled_heuristic);
                s.b_limsup[i][jj][p] =
                    detail::summarize_limsup(spec.b[i][jj][p], spec.declared.b_limsup[i][jj][p],
                                             s.b_sup[i][jj][p], m0, horizon, tol, label, s.sampled_heuristic);
            }
            std::string label = "c[" + std::to_string(i) + "][" + std::to_string(jj) + "]";
            s.c_sup[i][jj] = detail::summarize_sup(spec.c[i][jj], spec.declared.c_sup[i][jj], m0, horizon,
                                                   tol, label, s.sampled_heuristic);
            s.c_limsup[i][jj] = detail::summarize_limsup(spec.c[i][jj], spec.declared.c_limsup[i][jj],
                                                         s.c_sup[i][jj], m0, horizon, tol, label,
                                                         s.sampled_heuristic);
        }
    return s;
}

struct criterion_matrices {
    square_matrix m_plus;  // from sups
    square_matrix m_hat;   // from limsups
};

/// Assemble the two criterion matrices: diag(1 - a_i) minus the bound-weighted
/// coupling magnitudes. Both are Z-matrices by construction and m_plus <= m_hat.
inline criterion_matrices build_criterion_matrices(const model_spec& spec,
                                                   const coefficient_summary& s) {
    criterion_matrices out;
    out.m_plus = square_matrix(spec.n);
    out.m_hat = square_matrix(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        for (int jj = 0; jj < spec.n; ++jj) {
            double coupling_plus = s.c_sup[i][jj].value * spec.g[i][jj].bound;
            double coupling_hat = s.c_limsup[i][jj].value * spec.g[i][jj].bound;
            for (int p = 0; p < spec.P; ++p) {
                coupling_plus += s.b_sup[i][jj][p].value * spec.f[i][jj][p].bound;
                coupling_hat += s.b_limsup[i][jj][p].value * spec.f[i][jj][p].bound;
            }
            out.m_plus.at(i, jj) = (i == jj ? 1.0 - s.a_sup[i].value : 0.0) - coupling_plus;
            out.m_hat.at(i, jj) = (i == jj ? 1.0 - s.a_limsup[i].value : 0.0) - coupling_hat;
        }
    }
    return out;
}

// --- equilibria ---------------------------------------------------------------

/// Residual max_i |x*_i - RHS_i(x*)| of the fixed-point equation of the
/// autonomous model, with the kernel mass summed analytically.
inline double verify_equilibrium(const model_spec& spec, std::span<const double> x_star) {
    if (!spec.autonomous()) throw error("verify_equilibrium: model is not autonomous");
    if (static_cast<int>(x_star.size()) != spec.n)
        throw error("verify_equilibrium: dimension mismatch");
    double residual = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        double rhs = spec.a[i].eval(0.0) * x_star[i] + spec.I[i].fx.eval(0.0);
        for (int jj = 0; jj < spec.n; ++jj) {
            for (int p = 0; p < spec.P; ++p)
                if (spec.b_used(i, jj, p))
                    rhs += spec.b[i][jj][p].eval(0.0) * spec.f[i][jj][p].fx.eval(x_star[jj]);
            if (spec.c_used(i, jj)) {
                auto total = spec.zeta[i][jj].signed_total();
                if (!total)
                    throw error("verify_equilibrium: kernel without analytic total at (" +
                                std::to_string(i) + "," + std::to_string(jj) + ")");
                rhs += spec.c[i][jj].eval(0.0) * *total * spec.g[i][jj].fx.eval(x_star[jj]);
            }
        }
        residual = std::max(residual, std::fabs(x_star[i] - rhs));
    }
    return residual;
}

/// Change of variables moving a verified equilibrium of an autonomous
/// Lipschitz model to the origin: activations become f(u + x*_j) - f(x*_j),
/// inputs vanish, bound constants carry over, regimes drop to sublinear.
inline model_spec shift_to_equilibrium(const model_spec& spec, std::span<const double> x_star,
                                       double tol_eq = 1e-10) {
    if (!spec.autonomous()) throw error("shift_to_equilibrium: model is not autonomous");
    for (int i = 0; i < spec.n; ++i)
        for (int jj = 0; jj < spec.n; ++jj) {
            if (spec.c_used(i, jj) && spec.g[i][jj].regime != activation_regime::lipschitz)
                throw error("shift_to_equilibrium: activations must be declared lipschitz");
            for (int p = 0; p < spec.P; ++p)
                if (spec.b_used(i, jj, p) && spec.f[i][jj][p].regime != activation_regime::lipschitz)
                    throw error("shift_to_equilibrium: activations must be declared lipschitz");
        }
    double residual = verify_equilibrium(spec, x_star);
    if (residual > tol_eq)
        throw error("shift_to_equilibrium: residual " + std::to_string(residual) +
                    " exceeds tolerance; x* is not an equilibrium");

    model_spec out = spec;
    auto shift_activation = [](activation_spec& act, double xj) {
        if (act.identically_zero()) {
            act.regime = activation_regime::sublinear;
            return;
        }
        double offset = act.fx.eval(xj);
        expr shifted = act.fx.substitute_affine(1.0, xj);
        act.fx = expr::binary(detail::expr_node::binop::sub, std::move(shifted),
                              expr::constant(offset, "u"));
        act.regime = activation_regime::sublinear;
    };
    for (int i = 0; i < spec.n; ++i)
        for (int jj = 0; jj < spec.n; ++jj) {
            shift_activation(out.g[i][jj], x_star[jj]);
            for (int p = 0; p < spec.P; ++p) shift_activation(out.f[i][jj][p], x_star[jj]);
        }
    for (int i = 0; i < spec.n; ++i) {
        out.I[i] = input_spec{};  // identically zero, finite support
    }
    if (!out.name.empty()) out.name += " (shifted)";
    out.notes.push_back("activations shifted to move the equilibrium to the origin");
    return out;
}

}  // namespace hopfield
