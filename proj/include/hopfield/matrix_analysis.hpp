#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hopfield/expr.hpp"

namespace hopfield {

/// Dense real square matrix, row-major.
struct square_matrix {
    int n = 0;
    std::vector<double> data;

    square_matrix() = default;
    explicit square_matrix(int order) : n(order), data(static_cast<std::size_t>(order) * order, 0.0) {}

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }

    static square_matrix identity(int order) {
        square_matrix m(order);
        for (int i = 0; i < order; ++i) m.at(i, i) = 1.0;
        return m;
    }

    static square_matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        square_matrix m(static_cast<int>(rows.size()));
        int i = 0;
        for (const auto& row : rows) {
            int j = 0;
            for (double v : row) m.at(i, j++) = v;
            ++i;
        }
        return m;
    }

    /// max_i sum_j |a_ij|
    double inf_norm() const {
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += std::fabs(at(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    std::vector<double> multiply(std::span<const double> v) const {
        std::vector<double> out(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += at(i, j) * v[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s;
        }
        return out;
    }
};

enum class m_matrix_class { not_m, singular_m, nonsingular_m };

inline const char* to_string(m_matrix_class c) {
    switch (c) {
        case m_matrix_class::not_m: return "not an M-matrix";
        case m_matrix_class::singular_m: return "singular M-matrix";
        case m_matrix_class::nonsingular_m: return "non-singular M-matrix";
    }
    return "?";
}

struct spectral_witness {
    double shift = 0.0;  // s in A = sI - B
    double rho = 0.0;    // spectral radius of B
    bool power_converged = true;
    bool used_squaring_fallback = false;
    int iterations = 0;
};

struct minor_witness {
    double value = 0.0;
    std::vector<int> index_set;  // 0-based indices of the principal submatrix
};

struct matrix_classification {
    bool is_z = false;
    m_matrix_class m_class = m_matrix_class::not_m;
    bool irreducible = false;
    spectral_witness spectral;
    std::optional<minor_witness> smallest_minor;
};

namespace detail {

// Arc i->j iff i != j and |A(i,j)| above the structural-zero threshold.
inline std::vector<std::vector<int>> adjacency(const square_matrix& a) {
    double thr = 1e-13 * a.inf_norm();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(a.n));
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j)
            if (i != j && std::fabs(a.at(i, j)) > thr) adj[static_cast<std::size_t>(i)].push_back(j);
    return adj;
}

inline void reach_dfs(const std::vector<std::vector<int>>& adj, int start, std::vector<char>& seen) {
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(v)])
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
    }
}

}  // namespace detail

/// Strong connectivity of the off-diagonal nonzero digraph; two reachability
/// passes (forward from node 0, then in the transposed graph).
inline bool strongly_connected(const square_matrix& a) {
    if (a.n <= 0) return false;
    if (a.n == 1) return true;  // connectivity only; the n=1 matrix rule is handled by callers
    auto adj = detail::adjacency(a);
    std::vector<std::vector<int>> radj(static_cast<std::size_t>(a.n));
    for (int i = 0; i < a.n; ++i)
        for (int j : adj[static_cast<std::size_t>(i)]) radj[static_cast<std::size_t>(j)].push_back(i);

    std::vector<char> seen(static_cast<std::size_t>(a.n), 0);
    detail::reach_dfs(adj, 0, seen);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
    std::fill(seen.begin(), seen.end(), 0);
    detail::reach_dfs(radj, 0, seen);
    return std::find(seen.begin(), seen.end(), 0) == seen.end();
}

/// Reducibility per the permutation definition: irreducible unless some
/// symmetric permutation exposes a zero upper-right block (n=1: [0] is reducible).
inline bool irreducible(const square_matrix& a) {
    if (a.n == 1) return std::fabs(a.at(0, 0)) > 0.0;
    return strongly_connected(a);
}

/// Spectral radius of a nonnegative matrix by power iteration from the all-ones
/// vector; falls back to repeated squaring when the Rayleigh quotient cycles.
inline spectral_witness spectral_radius(const square_matrix& b, int max_iter = 10000,
                                        double tol = 1e-13) {
    spectral_witness w;
    const int n = b.n;
    std::vector<double> v(static_cast<std::size_t>(n), 1.0);
    double lambda_prev = -1.0;
    for (int k = 0; k < max_iter; ++k) {
        std::vector<double> bv = b.multiply(v);
        double dot_vbv = 0.0, dot_vv = 0.0, nrm = 0.0;
        for (int i = 0; i < n; ++i) {
            dot_vbv += v[static_cast<std::size_t>(i)] * bv[static_cast<std::size_t>(i)];
            dot_vv += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
            nrm = std::max(nrm, std::fabs(bv[static_cast<std::size_t>(i)]));
        }
        if (nrm == 0.0) {
            // B^k annihilated a positive vector: B is nilpotent, rho = 0
            w.rho = 0.0;
            w.iterations = k + 1;
            return w;
        }
        double lambda = dot_vbv / dot_vv;
        w.iterations = k + 1;
        if (std::fabs(lambda - lambda_prev) < tol * std::max(1.0, std::fabs(lambda))) {
            w.rho = lambda;
            return w;
        }
        lambda_prev = lambda;
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = bv[static_cast<std::size_t>(i)] / nrm;
    }

    // Rayleigh quotient failed to settle (imprimitive pattern); bound the radius
    // by norms of repeated squares instead.
    w.power_converged = false;
    w.used_squaring_fallback = true;
    square_matrix c = b;
    double logscale = 0.0;  // log of the accumulated normalization, divided through by 2^j
    double estimate = b.inf_norm();
    for (int j = 1; j <= 60; ++j) {
        double nc = c.inf_norm();
        if (nc == 0.0) {
            w.rho = 0.0;
            return w;
        }
        for (double& x : c.data) x /= nc;
        logscale += std::log(nc) / std::exp2(j - 1);
        // c <- c*c
        square_matrix next(c.n);
        for (int r = 0; r < c.n; ++r)
            for (int kk = 0; kk < c.n; ++kk) {
                double crk = c.at(r, kk);
                if (crk == 0.0) continue;
                for (int col = 0; col < c.n; ++col) next.at(r, col) += crk * c.at(kk, col);
            }
        c = std::move(next);
        // estimate = ||B^(2^j)||^(1/2^j)
        double est = std::exp(logscale + std::log(std::max(c.inf_norm(), 1e-300)) / std::exp2(j));
        if (j > 8 && std::fabs(est - estimate) < tol * std::max(1.0, est)) {
            estimate = est;
            break;
        }
        estimate = est;
    }
    w.rho = estimate;
    return w;
}

/// Classify by the spectral test: write A = sI - B with s = max_i A(i,i);
/// for a Z-matrix B >= 0, and A is an M-matrix iff s >= rho(B).
inline matrix_classification classify(const square_matrix& a, double tol_minor = 1e-9) {
    matrix_classification out;
    if (a.n <= 0) throw error("classify: empty matrix");
    out.is_z = true;
    for (int i = 0; i < a.n && out.is_z; ++i)
        for (int j = 0; j < a.n; ++j)
            if (i != j && a.at(i, j) > 0.0) {
                out.is_z = false;
                break;
            }
    out.irreducible = irreducible(a);

    double s = a.at(0, 0);
    for (int i = 1; i < a.n; ++i) s = std::max(s, a.at(i, i));
    square_matrix b(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) b.at(i, j) = (i == j ? s - a.at(i, j) : -a.at(i, j));

    out.spectral = spectral_radius(b);
    out.spectral.shift = s;

    if (!out.is_z) {
        out.m_class = m_matrix_class::not_m;
        return out;
    }
    double tol = tol_minor * std::max(1.0, a.inf_norm());
    double rho = out.spectral.rho;
    if (s > rho + tol)
        out.m_class = m_matrix_class::nonsingular_m;
    else if (s >= rho - tol)
        out.m_class = m_matrix_class::singular_m;
    else
        out.m_class = m_matrix_class::not_m;
    return out;
}

namespace detail {

/// Determinant by LU with partial pivoting; destroys its argument.
inline double lu_determinant(std::vector<double>& m, int k) {
    double det = 1.0;
    for (int col = 0; col < k; ++col) {
        int piv = col;
        double best = std::fabs(m[static_cast<std::size_t>(col) * k + col]);
        for (int r = col + 1; r < k; ++r) {
            double cand = std::fabs(m[static_cast<std::size_t>(r) * k + col]);
            if (cand > best) {
                best = cand;
                piv = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != col) {
            for (int c = 0; c < k; ++c)
                std::swap(m[static_cast<std::size_t>(piv) * k + c], m[static_cast<std::size_t>(col) * k + c]);
            det = -det;
        }
        double d = m[static_cast<std::size_t>(col) * k + col];
        det *= d;
        for (int r = col + 1; r < k; ++r) {
            double f = m[static_cast<std::size_t>(r) * k + col] / d;
            if (f == 0.0) continue;
            for (int c = col + 1; c < k; ++c)
                m[static_cast<std::size_t>(r) * k + c] -= f * m[static_cast<std::size_t>(col) * k + c];
        }
    }
    return det;
}

}  // namespace detail

struct principal_minor_entry {
    std::vector<int> index_set;
    double value = 0.0;
};

/// All 2^n - 1 principal minors (n <= 12), determinants via pivoted LU.
inline std::vector<principal_minor_entry> principal_minors(const square_matrix& a) {
    if (a.n > 12) throw error("principal minor enumeration limited to n <= 12");
    std::vector<principal_minor_entry> out;
    out.reserve((1u << a.n) - 1);
    std::vector<double> scratch;
    for (std::uint32_t mask = 1; mask < (1u << a.n); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < a.n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        int k = static_cast<int>(idx.size());
        scratch.assign(static_cast<std::size_t>(k) * k, 0.0);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c)
                scratch[static_cast<std::size_t>(r) * k + c] = a.at(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
        out.push_back({std::move(idx), detail::lu_determinant(scratch, k)});
    }
    return out;
}

/// Oracle classification straight from the definition: sign pattern of all
/// principal minors.
inline matrix_classification principal_minor_classify(const square_matrix& a,
                                                      double tol_minor = 1e-9) {
    matrix_classification out;
    out.is_z = true;
    for (int i = 0; i < a.n && out.is_z; ++i)
        for (int j = 0; j < a.n; ++j)
            if (i != j && a.at(i, j) > 0.0) {
                out.is_z = false;
                break;
            }
    out.irreducible = irreducible(a);

    auto minors = principal_minors(a);
    double norm = std::max(1.0, a.inf_norm());
    bool any_zero = false;
    bool any_negative = false;
    minor_witness smallest{minors.front().value, minors.front().index_set};
    for (const auto& m : minors) {
        double tol = tol_minor * std::pow(norm, static_cast<double>(m.index_set.size()));
        if (m.value < smallest.value) smallest = {m.value, m.index_set};
        if (m.value < -tol)
            any_negative = true;
        else if (m.value <= tol)
            any_zero = true;
    }
    out.smallest_minor = smallest;
    if (!out.is_z || any_negative)
        out.m_class = m_matrix_class::not_m;
    else
        out.m_class = any_zero ? m_matrix_class::singular_m : m_matrix_class::nonsingular_m;
    return out;
}

/// Positive vector d with A d = 0, for a singular irreducible M-matrix:
/// the Perron vector of B = sI - A, computed with a diagonal shift so the
/// power iteration is geometric. Normalized to max_i d_i = 1.
inline std::vector<double> positive_null_vector(const square_matrix& a, double tol_null = 1e-10) {
    if (a.n == 1) {
        if (std::fabs(a.at(0, 0)) > tol_null)
            throw error("positive_null_vector: 1x1 matrix is not singular");
        return {1.0};
    }
    matrix_classification cls = classify(a);
    if (cls.m_class != m_matrix_class::singular_m || !cls.irreducible)
        throw error("positive_null_vector requires a singular irreducible M-matrix");

    double s = a.at(0, 0);
    for (int i = 1; i < a.n; ++i) s = std::max(s, a.at(i, i));
    square_matrix b(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) b.at(i, j) = (i == j ? s - a.at(i, j) : -a.at(i, j));
    double shift = std::max(1.0, b.inf_norm());
    for (int i = 0; i < a.n; ++i) b.at(i, i) += shift;

    std::vector<double> v(static_cast<std::size_t>(a.n), 1.0);
    for (int k = 0; k < 10000; ++k) {
        std::vector<double> bv = b.multiply(v);
        double nrm = 0.0;
        for (double x : bv) nrm = std::max(nrm, std::fabs(x));
        if (nrm == 0.0) throw error("positive_null_vector: iteration collapsed");
        double delta = 0.0;
        for (int i = 0; i < a.n; ++i) {
            double nv = bv[static_cast<std::size_t>(i)] / nrm;
            delta = std::max(delta, std::fabs(nv - v[static_cast<std::size_t>(i)]));
            v[static_cast<std::size_t>(i)] = nv;
        }
        if (delta < 1e-14) break;
    }
    double mx = *std::max_element(v.begin(), v.end());
    for (double& x : v) x /= mx;

    for (double x : v)
        if (!(x > 0.0))
            throw error("positive_null_vector: produced a non-positive component (misclassified input?)");
    std::vector<double> residual = a.multiply(v);
    double rn = 0.0;
    for (double x : residual) rn = std::max(rn, std::fabs(x));
    if (rn > tol_null * std::max(1.0, a.inf_norm()))
        throw error("positive_null_vector: residual " + std::to_string(rn) + " exceeds tolerance");
    return v;
}

/// For z != 0 and y = A z, find the first index with z_i != 0 and z_i*y_i >= -tol.
/// For an M-matrix such an index always exists; absence signals a non-M matrix.
inline std::optional<std::pair<int, double>> sign_witness(const square_matrix& a,
                                                          std::span<const double> z,
                                                          double tol = 1e-9) {
    std::vector<double> y = a.multiply(z);
    double zmax = 0.0;
    for (double x : z) zmax = std::max(zmax, std::fabs(x));
    double tol_abs = tol * std::max(1.0, a.inf_norm() * zmax);
    for (int i = 0; i < a.n; ++i) {
        double zi = z[static_cast<std::size_t>(i)];
        if (zi == 0.0) continue;
        double prod = zi * y[static_cast<std::size_t>(i)];
        if (prod >= -tol_abs) return std::make_pair(i, prod);
    }
    return std::nullopt;
}

}  // namespace hopfield
