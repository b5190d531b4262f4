#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hopfield/model.hpp"

namespace hopfield {

enum class envelope_form { monotone_odd_passthrough, clipped, generic };

/// Non-decreasing majorant f* of |f| on [0, x_max], built from running
/// maxima/minima of f over [0,x] and [-x,0] and tabulated on a uniform grid.
struct envelope {
    double x_max = 0.0;
    double h = 0.0;
    std::vector<double> values;  // f*(k*h), k = 0..K
    activation_regime regime = activation_regime::bounded;
    double bound = 1.0;
    envelope_form form = envelope_form::generic;

    /// Piecewise-linear interpolation; non-decreasing in x. Beyond x_max a
    /// bounded-regime envelope clamps (sets *clamped), other regimes refuse.
    double eval(double x, bool* clamped = nullptr) const {
        if (x < 0.0) throw error("envelope evaluated at negative x");
        if (x > x_max) {
            if (regime == activation_regime::bounded) {
                if (clamped) *clamped = true;
                return values.back();
            }
            throw error("envelope evaluated beyond x_max = " + std::to_string(x_max) +
                        " under a non-saturating regime");
        }
        double pos = x / h;
        std::size_t k = std::min(static_cast<std::size_t>(pos), values.size() - 2);
        double t = pos - static_cast<double>(k);
        return values[k] + t * (values[k + 1] - values[k]);
    }

    /// Certified majorant: the stored value at the next grid point, which
    /// dominates f on [0, x] exactly (interpolation can undershoot a concave
    /// envelope between grid points by O(h^2), this cannot).
    double upper(double x) const {
        if (x < 0.0) throw error("envelope evaluated at negative x");
        std::size_t k = static_cast<std::size_t>(std::ceil(x / h));
        return values[std::min(k, values.size() - 1)];
    }
};

/// Tabulate f*(x) = max{f+(x), f+(-x), -f-(x), -f-(-x)} with the running
/// extrema sampled at resolution h/4, then enforce monotonicity by a
/// cumulative max (guards float noise).
inline envelope build_envelope(const activation_spec& act, double x_max, double h) {
    if (!(x_max > 0.0) || !(h > 0.0)) throw error("build_envelope: x_max and h must be positive");
    envelope env;
    env.regime = act.regime;
    env.bound = act.bound;
    const std::size_t K = static_cast<std::size_t>(std::ceil(x_max / h));
    env.h = h;
    env.x_max = static_cast<double>(K) * h;
    const std::size_t fine = 4 * K;

    double pos_max, pos_min, neg_max, neg_min;
    pos_max = pos_min = neg_max = neg_min = act.fx.eval(0.0);
    env.values.assign(K + 1, 0.0);
    env.values[0] = std::max(pos_max, -pos_min);
    std::vector<double> at_grid(K + 1, 0.0);
    at_grid[0] = pos_max;
    for (std::size_t t = 1; t <= fine; ++t) {
        double u = static_cast<double>(t) * h / 4.0;
        double fu = act.fx.eval(u);
        double fnu = act.fx.eval(-u);
        pos_max = std::max(pos_max, fu);
        pos_min = std::min(pos_min, fu);
        neg_max = std::max(neg_max, fnu);
        neg_min = std::min(neg_min, fnu);
        if (t % 4 == 0) {
            std::size_t k = t / 4;
            env.values[k] = std::max(std::max(pos_max, neg_max), std::max(-pos_min, -neg_min));
            at_grid[k] = fu;
        }
    }
    for (std::size_t k = 1; k <= K; ++k) env.values[k] = std::max(env.values[k], env.values[k - 1]);

    bool passthrough = true;
    for (std::size_t k = 0; k <= K && passthrough; ++k)
        if (std::fabs(env.values[k] - at_grid[k]) > 1e-12) passthrough = false;
    bool plateau = K >= 8 && env.values[K] - env.values[K - K / 8] <= 1e-12;
    env.form = plateau ? envelope_form::clipped
                       : (passthrough ? envelope_form::monotone_odd_passthrough
                                      : envelope_form::generic);
    return env;
}

enum class bound_regime { hat, plus };

inline const char* to_string(bound_regime r) {
    return r == bound_regime::hat ? "hat" : "plus";
}

/// Trace of the decreasing self-map S_q -> Phi(S_{q-1}) whose limit bounds
/// the per-neuron limsups of every trajectory.
struct bound_iteration {
    bound_regime regime = bound_regime::hat;
    std::vector<std::vector<double>> trace;  // S_0, S_1, ...
    std::vector<double> converged_to;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  // ||S - Phi(S)||_inf at exit
};

/// Run the bound iteration. The hat regime starts from the closed-form
/// S_{i,0} given by the limsup summaries and the bound constants; the plus
/// regime iterates the sup summaries from a caller-supplied start
/// (all-ones when empty).
inline bound_iteration iterate_bound(const model_spec& spec, const coefficient_summary& s,
                                     bound_regime regime, std::span<const double> start = {},
                                     int q_cap = 10000, double tol_fix = 1e-9) {
    const int n = spec.n, P = spec.P;
    auto a_entry = [&](int i) {
        return regime == bound_regime::hat ? s.a_limsup[i].value : s.a_sup[i].value;
    };
    auto b_entry = [&](int i, int j, int p) {
        return regime == bound_regime::hat ? s.b_limsup[i][j][p].value : s.b_sup[i][j][p].value;
    };
    auto c_entry = [&](int i, int j) {
        return regime == bound_regime::hat ? s.c_limsup[i][j].value : s.c_sup[i][j].value;
    };
    for (int i = 0; i < n; ++i)
        if (a_entry(i) >= 1.0) throw validation_error("iterate_bound: leakage summary >= 1");

    std::vector<double> s0(static_cast<std::size_t>(n), 0.0);
    if (regime == bound_regime::hat) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                acc += c_entry(i, j) * spec.g[i][j].bound;
                for (int p = 0; p < P; ++p) acc += b_entry(i, j, p) * spec.f[i][j][p].bound;
            }
            s0[static_cast<std::size_t>(i)] = acc / (1.0 - a_entry(i));
        }
        if (!start.empty()) throw error("iterate_bound: the hat regime computes its own start");
    } else {
        if (start.empty())
            s0.assign(static_cast<std::size_t>(n), 1.0);
        else {
            if (static_cast<int>(start.size()) != n) throw error("iterate_bound: start size mismatch");
            s0.assign(start.begin(), start.end());
            for (double v : s0)
                if (!(v >= 0.0)) throw error("iterate_bound: start vector must be non-negative");
        }
    }

    double top = 0.0;
    for (double v : s0) top = std::max(top, v);
    const double x_max = std::max(8.0, 2.0 * top);
    const double h = x_max / 4096.0;

    std::vector<std::vector<envelope>> g_env(static_cast<std::size_t>(n));
    std::vector<std::vector<std::vector<envelope>>> f_env(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        g_env[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
        f_env[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            if (c_entry(i, j) > 0.0)
                g_env[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    build_envelope(spec.g[i][j], x_max, h);
            f_env[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(P));
            for (int p = 0; p < P; ++p)
                if (b_entry(i, j, p) > 0.0)
                    f_env[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] =
                        build_envelope(spec.f[i][j][p], x_max, h);
        }
    }

    auto apply = [&](const std::vector<double>& in) {
        std::vector<double> out(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                double cij = c_entry(i, j);
                if (cij > 0.0)
                    acc += cij * g_env[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(
                                     in[static_cast<std::size_t>(j)]);
                for (int p = 0; p < P; ++p) {
                    double bijp = b_entry(i, j, p);
                    if (bijp > 0.0)
                        acc += bijp *
                               f_env[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(p)]
                                   .eval(in[static_cast<std::size_t>(j)]);
                }
            }
            out[static_cast<std::size_t>(i)] = acc / (1.0 - a_entry(i));
        }
        return out;
    };

    bound_iteration result;
    result.regime = regime;
    result.trace.push_back(s0);
    std::vector<double> cur = s0;
    for (int q = 1; q <= q_cap; ++q) {
        std::vector<double> next = apply(cur);
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            double prev = cur[static_cast<std::size_t>(i)];
            double now = next[static_cast<std::size_t>(i)];
            if (now > prev + 1e-12 * std::max(1.0, prev))
                throw validation_error("iterate_bound: sequence increased at q = " + std::to_string(q) +
                                       ", i = " + std::to_string(i) +
                                       " (start below the fixed point or envelope error)");
            delta = std::max(delta, std::fabs(now - prev));
        }
        cur = std::move(next);
        result.trace.push_back(cur);
        result.iterations = q;
        if (delta < tol_fix) {
            result.converged = true;
            break;
        }
    }
    result.converged_to = cur;
    std::vector<double> image = apply(cur);
    for (int i = 0; i < n; ++i)
        result.residual = std::max(result.residual,
                                   std::fabs(image[static_cast<std::size_t>(i)] - cur[static_cast<std::size_t>(i)]));
    return result;
}

}  // namespace hopfield
