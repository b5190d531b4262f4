#pragma once

// Shared helpers for the test suites: deterministic RNG seeding, random
// Z-matrix constructions spanning all three M-matrix classes, and small
// random model specs.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hopfield/matrix_analysis.hpp"
#include "hopfield/model.hpp"

namespace test_support {

inline std::uint64_t seed_from_env() {
    const char* s = std::getenv("HOPFIELD_ATTRACT_SEED");
    if (s && *s) return std::strtoull(s, nullptr, 10);
    return 0x5eed0001ULL;
}

enum class z_kind { nonsingular, singular, singular_irreducible, not_m };

/// Z-matrix A = sI - B with B >= 0 built from dyadic entries (k/32) so that
/// the singular constructions have exactly zero row sums in binary.
inline hopfield::square_matrix random_z_matrix(std::mt19937_64& rng, int n, z_kind kind) {
    std::uniform_int_distribution<int> entry(0, 24);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    hopfield::square_matrix b(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            bool keep = kind == z_kind::singular_irreducible || unit(rng) < 0.7;
            b.at(i, j) = keep ? entry(rng) / 32.0 : 0.0;
            if (kind == z_kind::singular_irreducible && b.at(i, j) == 0.0)
                b.at(i, j) = 1.0 / 32.0;
        }

    auto row_sum = [&](int i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += b.at(i, j);
        return s;
    };

    double s_shift = 0.0;
    switch (kind) {
        case z_kind::singular:
        case z_kind::singular_irreducible: {
            // equalize row sums (dyadic, so exact): rho(B) = s with Bd = s d at d = 1
            double target = 0.0;
            for (int i = 0; i < n; ++i) target = std::max(target, row_sum(i));
            target += 1.0 / 32.0;
            for (int i = 0; i < n; ++i) b.at(i, i) += target - row_sum(i);
            s_shift = target;
            break;
        }
        case z_kind::nonsingular: {
            double maxrow = 0.0;
            for (int i = 0; i < n; ++i) maxrow = std::max(maxrow, row_sum(i));
            s_shift = std::max(maxrow, 1.0 / 32.0) * (1.25 + unit(rng));  // s > rho(B)
            break;
        }
        case z_kind::not_m: {
            double minrow = 1e300;
            for (int i = 0; i < n; ++i) {
                if (row_sum(i) < 4.0 / 32.0) b.at(i, i) += 4.0 / 32.0;  // keep min row mass positive
                minrow = std::min(minrow, row_sum(i));
            }
            s_shift = minrow * (0.4 + 0.3 * unit(rng));  // s < min row sum <= rho(B)
            break;
        }
    }

    hopfield::square_matrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.at(i, j) = (i == j ? s_shift - b.at(i, j) : -b.at(i, j));
    return a;
}

inline hopfield::square_matrix apply_permutation(const hopfield::square_matrix& a,
                                                 const std::vector<int>& perm) {
    hopfield::square_matrix out(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) out.at(i, j) = a.at(perm[i], perm[j]);
    return out;
}

/// Reducibility straight from the definition: search all symmetric
/// permutations for a zero upper-right block.
inline bool brute_force_reducible(const hopfield::square_matrix& a) {
    const int n = a.n;
    if (n == 1) return a.at(0, 0) == 0.0;
    double thr = 1e-13 * a.inf_norm();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        for (int k = 1; k < n; ++k) {
            bool zero_block = true;
            for (int i = 0; i < k && zero_block; ++i)
                for (int j = k; j < n; ++j)
                    if (std::fabs(a.at(perm[i], perm[j])) > thr) {
                        zero_block = false;
                        break;
                    }
            if (zero_block) return true;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

/// Small random model with trigonometric / rational coefficients, geometric
/// kernels, and tanh-family activations. No declared summaries: everything is
/// sampled, which is what the matrix-order properties need.
inline hopfield::model_spec random_model(std::mt19937_64& rng) {
    using hopfield::expr;
    std::uniform_int_distribution<int> nd(1, 3), pd(1, 2), pat(0, 4), delay(0, 3);
    std::uniform_real_distribution<double> amp(0.05, 0.45), leak(0.0, 0.8), unit(0.0, 1.0);

    hopfield::model_spec s;
    s.n = nd(rng);
    s.P = pd(rng);
    auto coef = [&](double c) {
        char buf[64];
        switch (pat(rng)) {
            case 0: std::snprintf(buf, sizeof buf, "%.6f", c); break;
            case 1: std::snprintf(buf, sizeof buf, "%.6f*cos(pi*m)", c); break;
            case 2: std::snprintf(buf, sizeof buf, "%.6f*sin(pi*m/2)", c); break;
            case 3: std::snprintf(buf, sizeof buf, "%.6f*tanh(m)", c); break;
            default: std::snprintf(buf, sizeof buf, "%.6f/(m+1)", c); break;
        }
        return expr::parse(buf, "m");
    };
    for (int i = 0; i < s.n; ++i) {
        s.a.push_back(coef(leak(rng)));
        s.nu.push_back(expr::constant(delay(rng), "m"));
        hopfield::input_spec in;
        if (unit(rng) < 0.5) {
            in.fx = expr::parse("(1/2)^m", "m");
            in.cert = hopfield::input_certificate::geometric;
            in.ratio = 0.5;
        }
        s.I.push_back(in);
    }
    s.b.resize(s.n);
    s.tau.resize(s.n);
    s.c.resize(s.n);
    s.zeta.resize(s.n);
    s.f.resize(s.n);
    s.g.resize(s.n);
    hopfield::kernel_spec geo;
    geo.form = hopfield::kernel_form::geometric;
    geo.ratio = 0.5;
    geo.scale = 0.5;
    geo.declared_total = 1.0;
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j) {
            s.c[i].push_back(unit(rng) < 0.4 ? coef(amp(rng)) : expr::constant(0.0, "m"));
            s.zeta[i].push_back(s.c[i][j].is_constant() && s.c[i][j].eval(0) == 0.0
                                    ? hopfield::kernel_spec{}
                                    : geo);
            hopfield::activation_spec gact;
            gact.fx = expr::parse("tanh(u)", "u");
            gact.bound = 1.0;
            gact.regime = hopfield::activation_regime::bounded;
            s.g[i].push_back(gact);
            s.b[i].resize(s.n);
            s.tau[i].resize(s.n);
            s.f[i].resize(s.n);
            for (int p = 0; p < s.P; ++p) {
                s.b[i][j].push_back(unit(rng) < 0.4 ? coef(amp(rng)) : expr::constant(0.0, "m"));
                s.tau[i][j].push_back(expr::constant(delay(rng), "m"));
                hopfield::activation_spec fact;
                fact.fx = expr::parse(unit(rng) < 0.5 ? "tanh(u)" : "arctan(u)", "u");
                fact.bound = 1.0;
                fact.regime = hopfield::activation_regime::bounded;
                s.f[i][j].push_back(fact);
            }
        }
    s.declared.resize(s.n, s.P);
    s.name = "random";
    return s;
}

}  // namespace test_support
