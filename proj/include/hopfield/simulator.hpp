#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopfield/model.hpp"

namespace hopfield {

class sim_error : public error {
    using error::error;
};

/// Bounded pre-history: explicit values on s in [-L, 0] plus a constant tail
/// for s < -L, anchored at start time sigma.
struct initial_condition {
    std::vector<std::vector<double>> support;  // support[k] is psi(k - L), k = 0..L
    std::vector<double> tail;
    long sigma = 0;

    int dimension() const { return static_cast<int>(tail.size()); }
    long depth() const { return static_cast<long>(support.size()) - 1; }

    const std::vector<double>& value_at_offset(long s) const {
        long L = depth();
        if (s > 0) throw sim_error("initial condition queried at positive offset");
        if (s >= -L) return support[static_cast<std::size_t>(s + L)];
        return tail;
    }

    double sup_norm() const {
        double best = 0.0;
        for (const auto& row : support)
            for (double v : row) best = std::max(best, std::fabs(v));
        for (double v : tail) best = std::max(best, std::fabs(v));
        return best;
    }

    void validate(int n) const {
        if (support.empty()) throw sim_error("initial condition needs at least psi(0)");
        if (static_cast<int>(tail.size()) != n) throw sim_error("initial condition tail dimension mismatch");
        for (const auto& row : support)
            if (static_cast<int>(row.size()) != n)
                throw sim_error("initial condition support dimension mismatch");
        if (!std::isfinite(sup_norm())) throw sim_error("initial condition is not bounded");
    }
};

/// Pre-history plus the computed forward states; lookups never run out of
/// bounds because every time before sigma resolves through the initial
/// condition.
class history_buffer {
public:
    explicit history_buffer(initial_condition init) : init_(std::move(init)) {}

    long sigma() const { return init_.sigma; }
    long last_time() const { return init_.sigma + static_cast<long>(states_.size()); }
    const initial_condition& initial() const { return init_; }
    const std::vector<std::vector<double>>& states() const { return states_; }
    double running_max() const { return running_max_; }

    const std::vector<double>& lookup(long m) const {
        if (m > last_time()) throw sim_error("history lookup past the last computed state");
        if (m > init_.sigma) return states_[static_cast<std::size_t>(m - init_.sigma - 1)];
        return init_.value_at_offset(m - init_.sigma);
    }

    void append(std::vector<double> state) {
        for (double v : state) running_max_ = std::max(running_max_, std::fabs(v));
        states_.push_back(std::move(state));
    }

private:
    initial_condition init_;
    std::vector<std::vector<double>> states_;
    double running_max_ = 0.0;
};

/// Advances the model one step at a time, reusing kernel weight prefixes and
/// cached activation values of the distributed-delay sums.
class stepper {
public:
    stepper(const model_spec& spec, const history_buffer& hist, double eps_trunc)
        : spec_(spec), hist_(hist), eps_(eps_trunc) {
        const int n = spec_.n;
        pair_.resize(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                pair_state& ps = pair_[static_cast<std::size_t>(i) * n + j];
                ps.used = spec_.c_used(i, j);
                if (!ps.used) continue;
                ps.g_tail = spec_.g[i][j].fx.eval(hist_.initial().tail[static_cast<std::size_t>(j)]);
                ps.lipschitz = spec_.g[i][j].regime == activation_regime::lipschitz;
                ps.g_at_zero = spec_.g[i][j].fx.eval(0.0);
            }
    }

    /// x(m+1) from the model equation; the distributed sums are truncated at
    /// the first index whose certified kernel tail contribution drops below
    /// eps_trunc (exact beyond the pre-history tail when g(tail) = 0).
    std::vector<double> step(long m) {
        const int n = spec_.n, P = spec_.P;
        if (m < hist_.sigma()) throw sim_error("cannot step before sigma");
        if (m > hist_.last_time()) throw sim_error("history gap: step called out of order");
        const double dm = static_cast<double>(m);
        const double state_bound = std::max(hist_.initial().sup_norm(), hist_.running_max());
        last_tail_error_ = 0.0;

        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            long nu = detail::snap_nonneg_int(spec_.nu[i].eval(dm), "nu[" + std::to_string(i) + "]");
            double acc = spec_.a[i].eval(dm) * hist_.lookup(m - nu)[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) {
                for (int p = 0; p < P; ++p) {
                    if (!spec_.b_used(i, j, p)) continue;
                    double bv = spec_.b[i][j][p].eval(dm);
                    if (bv == 0.0) continue;
                    long tau = detail::snap_nonneg_int(spec_.tau[i][j][p].eval(dm),
                                                       "tau[" + std::to_string(i) + "][" +
                                                           std::to_string(j) + "][" + std::to_string(p) + "]");
                    acc += bv * spec_.f[i][j][p].fx.eval(hist_.lookup(m - tau)[static_cast<std::size_t>(j)]);
                }
                pair_state& ps = pair_[static_cast<std::size_t>(i) * n + j];
                if (!ps.used) continue;
                double cv = spec_.c[i][j].eval(dm);
                double tail_err = 0.0;
                double sum = distributed_sum(i, j, m, state_bound, tail_err);
                last_tail_error_ = std::max(last_tail_error_, tail_err);
                acc += cv * sum;
            }
            acc += spec_.I[i].fx.eval(dm);
            if (!std::isfinite(acc)) throw sim_error("state diverged to a non-finite value");
            next[static_cast<std::size_t>(i)] = acc;
        }
        return next;
    }

    double last_tail_error() const { return last_tail_error_; }

private:
    struct pair_state {
        bool used = false;
        bool lipschitz = false;
        double g_tail = 0.0;   // g evaluated at the pre-history tail constant
        double g_at_zero = 0.0;
        std::vector<double> weights;      // zeta_l prefix
        std::vector<double> abs_prefix;   // running sum |zeta_0..l-1| (closed form)
        std::vector<double> g_cache;      // g(x_j(base + k)), base = sigma - L
    };

    const model_spec& spec_;
    const history_buffer& hist_;
    double eps_;
    double last_tail_error_ = 0.0;
    std::vector<pair_state> pair_;

    static constexpr long kernel_cap = 2'000'000;

    void extend_weights(pair_state& ps, const kernel_spec& k, long upto) {
        while (static_cast<long>(ps.weights.size()) < upto) {
            long l = static_cast<long>(ps.weights.size());
            double w = k.weight(l);
            ps.weights.push_back(w);
            double prev = ps.abs_prefix.empty() ? 0.0 : ps.abs_prefix.back();
            ps.abs_prefix.push_back(prev + std::fabs(w));
        }
    }

    void extend_g_cache(pair_state& ps, const expr& g, int j, long m) {
        const long base = hist_.sigma() - hist_.initial().depth();
        while (static_cast<long>(ps.g_cache.size()) <= m - base) {
            long t = base + static_cast<long>(ps.g_cache.size());
            ps.g_cache.push_back(g.eval(hist_.lookup(t)[static_cast<std::size_t>(j)]));
        }
    }

    /// Smallest l with abs_tail(l) * cap <= eps (closed forms for the analytic
    /// kernels, prefix-sum search otherwise). Saturates when the tail decays
    /// too slowly to reach the target.
    long truncation_index(pair_state& ps, const kernel_spec& k, double cap) {
        if (cap <= 0.0) return 0;
        double target = eps_ / cap;
        switch (k.form) {
            case kernel_form::zero: return 0;
            case kernel_form::geometric: {
                double s = std::fabs(k.scale), r = std::fabs(k.ratio);
                if (s == 0.0) return 0;
                if (r == 0.0) return 1;
                // s*r^l/(1-r) <= target
                double rhs = target * (1.0 - r) / s;
                if (rhs >= 1.0) return 0;
                if (rhs <= 0.0) return kernel_cap;
                double l = std::log(rhs) / std::log(r);
                if (l > 1e15) return std::numeric_limits<long>::max() / 4;
                return static_cast<long>(std::ceil(l));
            }
            case kernel_form::telescoping_inverse_quadratic: {
                // 1/(l+1) <= target
                if (target <= 0.0) return std::numeric_limits<long>::max() / 4;
                double l = 1.0 / target - 1.0;
                if (l <= 0.0) return 0;
                if (l > 1e15) return std::numeric_limits<long>::max() / 4;
                return static_cast<long>(std::ceil(l));
            }
            case kernel_form::closed_form:
            default: {
                // declared_total - abs_prefix(l) <= target
                long lo = 0;
                for (;;) {
                    long have = static_cast<long>(ps.abs_prefix.size());
                    while (lo < have && k.declared_total - ps.abs_prefix[static_cast<std::size_t>(lo)] > target)
                        ++lo;
                    if (lo < have) return lo + 1;
                    if (have >= kernel_cap)
                        throw sim_error("kernel tail cannot be truncated to eps_trunc within the cap");
                    extend_weights(ps, k, std::min<long>(kernel_cap, std::max<long>(64, have * 2)));
                }
            }
        }
    }

    double distributed_sum(int i, int j, long m, double state_bound, double& tail_err) {
        pair_state& ps = pair_[static_cast<std::size_t>(i) * spec_.n + j];
        const kernel_spec& k = spec_.zeta[i][j];
        const double G = spec_.g[i][j].bound;
        double cap = G * state_bound + (ps.lipschitz ? std::fabs(ps.g_at_zero) : 0.0);

        const long L = hist_.initial().depth();
        const long l_hist = m - (hist_.sigma() - L) + 1;  // lookbacks >= l_hist hit the tail constant
        long l_star = truncation_index(ps, k, cap);
        long cutoff = std::min(l_star, l_hist);

        extend_g_cache(ps, spec_.g[i][j].fx, j, m);
        extend_weights(ps, k, cutoff);

        const long base = hist_.sigma() - L;
        double sum = 0.0;
        for (long l = 0; l < cutoff; ++l)
            sum += ps.weights[static_cast<std::size_t>(l)] *
                   ps.g_cache[static_cast<std::size_t>(m - l - base)];

        tail_err = 0.0;
        if (cutoff < l_star) {
            // everything beyond the cutoff sits in the constant pre-history tail
            if (ps.g_tail != 0.0) {
                auto tail_sum = k.signed_tail(static_cast<double>(cutoff));
                if (tail_sum) {
                    sum += ps.g_tail * *tail_sum;  // exact, no budget consumed
                } else {
                    if (l_star >= kernel_cap)
                        throw sim_error("closed-form kernel with nonzero tail constant decays too slowly");
                    extend_weights(ps, k, l_star);
                    double w = 0.0;
                    for (long l = cutoff; l < l_star; ++l) w += ps.weights[static_cast<std::size_t>(l)];
                    sum += ps.g_tail * w;
                    tail_err = std::max(0.0, k.declared_total -
                                                 ps.abs_prefix[static_cast<std::size_t>(l_star - 1)]) *
                               cap;
                }
            }
            // g(tail) == 0: dropped terms are exactly zero
        } else if (l_star < std::numeric_limits<long>::max() / 8) {
            double tail_mass = k.has_analytic_abs_tail()
                                   ? k.abs_tail(static_cast<double>(l_star))
                                   : std::max(0.0, k.declared_total -
                                                       (l_star > 0 ? ps.abs_prefix[static_cast<std::size_t>(l_star - 1)]
                                                                   : 0.0));
            tail_err = tail_mass * cap;
        }
        return sum;
    }
};

/// One-shot step for a prepared history (tests, oracles). run() keeps a
/// stepper alive instead.
inline std::vector<double> step(const model_spec& spec, const history_buffer& hist, long m,
                                double eps_trunc = 1e-12) {
    stepper s(spec, hist, eps_trunc);
    return s.step(m);
}

struct bound_monitor {
    double a_plus = 0.0;
    double C = 0.0;  // worst-row coupling mass plus certified input totals
};

/// Constant of the a-priori boundedness estimate: trajectories stay within
/// ||psi|| + C/(1 - a_plus) when the hypotheses hold.
inline std::optional<bound_monitor> make_bound_monitor(const model_spec& spec,
                                                       const coefficient_summary& s,
                                                       std::span<const double> input_totals) {
    bound_monitor mon;
    for (int i = 0; i < spec.n; ++i) mon.a_plus = std::max(mon.a_plus, s.a_sup[i].value);
    if (mon.a_plus >= 1.0) return std::nullopt;
    for (int i = 0; i < spec.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < spec.n; ++j) {
            row += s.c_sup[i][j].value * spec.g[i][j].bound;
            for (int p = 0; p < spec.P; ++p) row += s.b_sup[i][j][p].value * spec.f[i][j][p].bound;
        }
        if (static_cast<int>(input_totals.size()) == spec.n) row += input_totals[static_cast<std::size_t>(i)];
        mon.C = std::max(mon.C, row);
    }
    return mon;
}

struct sim_options {
    double eps_trunc = 1e-12;
    double conv_tol = 1e-3;
    long conv_window = 50;
    bool stop_when_converged = false;
    std::optional<bound_monitor> monitor;
};

struct simulation_report {
    long sigma = 0;
    std::vector<std::vector<double>> trajectory;  // x(sigma+1), x(sigma+2), ...
    std::vector<double> sup_norm_series;          // ||x(m)||_inf per computed step
    std::vector<double> truncation_budget;        // certified tail-error bound per step
    std::optional<long> converged_at;
    bool bounded_flag = false;  // monitor bound exceeded
    double monitor_bound = 0.0;
    bool monitor_active = false;
};

inline simulation_report run(const model_spec& spec, const initial_condition& init, long steps,
                             const sim_options& opts = {}) {
    if (steps < 1) throw sim_error("run: steps must be >= 1");
    init.validate(spec.n);
    history_buffer hist(init);
    stepper st(spec, hist, opts.eps_trunc);

    simulation_report rep;
    rep.sigma = init.sigma;
    rep.trajectory.reserve(static_cast<std::size_t>(steps));
    if (opts.monitor) {
        rep.monitor_active = true;
        rep.monitor_bound = init.sup_norm() + opts.monitor->C / (1.0 - opts.monitor->a_plus);
    }

    auto norm_at = [&](long t) {
        const auto& v = hist.lookup(t);
        double nrm = 0.0;
        for (double x : v) nrm = std::max(nrm, std::fabs(x));
        return nrm;
    };
    auto window_quiet = [&](long t) {
        for (long w = t - opts.conv_window; w <= t; ++w)
            if (norm_at(w) >= opts.conv_tol) return false;
        return true;
    };
    if (window_quiet(init.sigma)) rep.converged_at = init.sigma;

    for (long q = 0; q < steps; ++q) {
        long m = init.sigma + q;
        std::vector<double> next = st.step(m);
        double nrm = 0.0;
        for (double x : next) nrm = std::max(nrm, std::fabs(x));
        hist.append(std::move(next));
        rep.trajectory.push_back(hist.states().back());
        rep.sup_norm_series.push_back(nrm);
        rep.truncation_budget.push_back(st.last_tail_error());
        if (rep.monitor_active && nrm > rep.monitor_bound + 1e-6) rep.bounded_flag = true;
        if (!rep.converged_at && window_quiet(m + 1)) {
            rep.converged_at = m + 1;
            if (opts.stop_when_converged) break;
        }
    }
    return rep;
}

}  // namespace hopfield
