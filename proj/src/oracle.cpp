#include "bdrl/oracle.hpp"

#include "bdrl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdrl::oracle {

std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n) throw OracleError("dense_solve: shape mismatch");
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) throw OracleError("dense_solve: singular matrix");
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k] * x[k];
        x[i] = acc / a[i][i];
    }
    return x;
}

Matrix dense_inverse(const Matrix& a) {
    const std::size_t n = a.size();
    Matrix inv(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        const auto col = dense_solve(a, e);
        for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
    }
    return inv;
}

double inf_norm(const Matrix& a) {
    double best = 0.0;
    for (const auto& row : a) {
        double s = 0.0;
        for (double x : row) s += std::abs(x);
        best = std::max(best, s);
    }
    return best;
}

Matrix dense_kernel(const MdpSpec& spec, const Policy& policy) {
    const int S = spec.num_states();
    Matrix p(static_cast<std::size_t>(S));
    for (State s = 0; s < S; ++s) p[static_cast<std::size_t>(s)] = transition_row(spec, s, policy(s)).dense(S);
    return p;
}

StationaryMeasure power_iteration_measure(const BirthDeathKernel& k, double tol, long max_iterations) {
    const auto n = static_cast<std::size_t>(k.num_states());
    if (n == 0) throw OracleError("power iteration: empty kernel");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(k.up[i] > 0.0) || !(k.down[i + 1] > 0.0))
            throw OracleError("power iteration: kernel is reducible, no unique fixed point");

    const kernels::TridiagonalView view{k.down, k.stay, k.up};
    std::vector<double> m(n, 1.0 / static_cast<double>(n)), next(n);
    for (long it = 0; it < max_iterations; ++it) {
        kernels::propagate_left(view, m, next);
        const double step = kernels::l1_distance(m, next);
        m.swap(next);
        if (step < tol) {
            StationaryMeasure out;
            double z = 0.0;
            for (double x : m) z += x;
            out.probabilities = m;
            for (double& x : out.probabilities) x /= z;
            out.log_probabilities.resize(n);
            for (std::size_t i = 0; i < n; ++i) out.log_probabilities[i] = std::log(out.probabilities[i]);
            return out;
        }
    }
    throw OracleError("power iteration: no convergence within " + std::to_string(max_iterations) + " iterations");
}

DenseEvaluation dense_gain_bias(const MdpSpec& spec, const Policy& policy) {
    // unknowns (rho, h(1), ..., h(S-1)); h(0) = 0
    const Matrix p = dense_kernel(spec, policy);
    const auto n = p.size();
    Matrix a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (std::size_t s = 0; s < n; ++s) {
        a[s][0] = 1.0;
        for (std::size_t j = 1; j < n; ++j) a[s][j] = (s == j ? 1.0 : 0.0) - p[s][j];
        b[s] = mean_reward(spec, static_cast<State>(s), policy(static_cast<State>(s)));
    }
    const auto x = dense_solve(a, b);
    DenseEvaluation out;
    out.gain = x[0];
    out.bias.assign(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) out.bias[j] = x[j];
    return out;
}

std::vector<double> dense_hitting_times(const MdpSpec& spec, const Policy& policy, State target) {
    const Matrix p = dense_kernel(spec, policy);
    const auto n = p.size();
    const auto t = static_cast<std::size_t>(target);
    if (t >= n) throw OracleError("dense_hitting_times: target out of range");
    Matrix a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 1.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (s == t) {
            a[s][s] = 1.0;
            b[s] = 0.0;
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) a[s][j] = (s == j ? 1.0 : 0.0) - (j == t ? 0.0 : p[s][j]);
    }
    return dense_solve(a, b);
}

std::vector<Policy> enumerate_policies(const MdpSpec& spec, long cap) {
    const int S = spec.num_states();
    const int A = spec.num_actions();
    double count = std::pow(static_cast<double>(A), S);
    if (count > static_cast<double>(cap))
        throw OracleError("policy enumeration: " + std::to_string(A) + "^" + std::to_string(S) +
                          " policies exceed the cap of " + std::to_string(cap));
    std::vector<Policy> out;
    std::vector<Action> speeds(static_cast<std::size_t>(S), 0);
    for (;;) {
        out.emplace_back(spec, speeds);
        int i = S - 1;
        while (i >= 0 && speeds[static_cast<std::size_t>(i)] == A - 1) speeds[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
        ++speeds[static_cast<std::size_t>(i)];
    }
    return out;
}

double enumerate_diameter(const MdpSpec& spec, long cap) {
    const auto policies = enumerate_policies(spec, cap);
    const int S = spec.num_states();
    double d = 0.0;
    for (State target = 0; target < S; ++target) {
        std::vector<double> best(static_cast<std::size_t>(S), std::numeric_limits<double>::infinity());
        for (const auto& pi : policies) {
            const auto tau = dense_hitting_times(spec, pi, target);
            for (std::size_t s = 0; s < best.size(); ++s) best[s] = std::min(best[s], tau[s]);
        }
        for (State s = 0; s < S; ++s)
            if (s != target) d = std::max(d, best[static_cast<std::size_t>(s)]);
    }
    return d;
}

double enumerate_optimal_gain(const MdpSpec& spec, long cap) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& pi : enumerate_policies(spec, cap)) best = std::max(best, dense_gain_bias(spec, pi).gain);
    return best;
}

GridMax grid_inner_max(std::span<const double> p_hat, double eps, std::span<const double> u, Support support,
                       double step) {
    const int k = support.size();
    if (k < 1 || k > 3) throw OracleError("grid_inner_max: support must have 1 to 3 states");
    if (p_hat.size() != u.size()) throw OracleError("grid_inner_max: length mismatch");
    const long n = std::lround(1.0 / step);
    const auto lo = static_cast<std::size_t>(support.lo);

    GridMax best;
    best.value = -std::numeric_limits<double>::infinity();
    bool found = false;
    std::vector<double> nearest;
    double nearest_dist = std::numeric_limits<double>::infinity();

    auto visit = [&](long i0, long i1, long i2) {
        const long idx[3] = {i0, i1, i2};
        std::vector<double> q(p_hat.size(), 0.0);
        double dist = 0.0, value = 0.0;
        for (int j = 0; j < k; ++j) {
            q[lo + j] = static_cast<double>(idx[j]) / static_cast<double>(n);
            value += q[lo + j] * u[lo + j];
        }
        for (std::size_t s = 0; s < q.size(); ++s) dist += std::abs(q[s] - p_hat[s]);
        if (dist <= eps + 1e-12 && value > best.value) {
            best.q = q;
            best.value = value;
            found = true;
        }
        if (dist < nearest_dist) {
            nearest_dist = dist;
            nearest = q;
        }
    };

    if (k == 1) {
        visit(n, 0, 0);
    } else if (k == 2) {
        for (long i = 0; i <= n; ++i) visit(i, n - i, 0);
    } else {
        for (long i = 0; i <= n; ++i)
            for (long j = 0; i + j <= n; ++j) visit(i, j, n - i - j);
    }

    if (!found) {
        best.q = nearest;
        best.value = 0.0;
        for (std::size_t s = 0; s < nearest.size(); ++s) best.value += nearest[s] * u[s];
        best.in_ball = false;
    }
    return best;
}

std::vector<double> point_mass(int num_states, State s) {
    std::vector<double> out(static_cast<std::size_t>(num_states), 0.0);
    out.at(static_cast<std::size_t>(s)) = 1.0;
    return out;
}

DistributionTrajectory exact_distribution_propagation(const MdpSpec& spec, const Policy& policy, long horizon,
                                                      std::span<const double> initial) {
    const Matrix p = dense_kernel(spec, policy);
    const std::size_t n = p.size();
    if (initial.size() != n) throw OracleError("propagation: initial law has the wrong length");
    DistributionTrajectory out;
    out.marginals.reserve(static_cast<std::size_t>(horizon) + 1);
    out.marginals.emplace_back(initial.begin(), initial.end());
    for (long t = 1; t <= horizon; ++t) {
        const auto& prev = out.marginals.back();
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[j] += prev[i] * p[i][j];
        out.marginals.push_back(std::move(next));
    }
    return out;
}

double tail_excess(const DistributionTrajectory& lower, const DistributionTrajectory& upper) {
    if (lower.marginals.size() != upper.marginals.size()) throw OracleError("tail_excess: horizon mismatch");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < lower.marginals.size(); ++t) {
        const auto& a = lower.marginals[t];
        const auto& b = upper.marginals[t];
        double ta = 0.0, tb = 0.0;
        for (std::size_t s = a.size(); s-- > 0;) {
            ta += a[s];
            tb += b[s];
            worst = std::max(worst, ta - tb);
        }
    }
    return worst;
}

VisitTail visit_tail(const DistributionTrajectory& traj, std::span<const double> measure,
                     const std::function<double(State)>& f) {
    const std::size_t n = measure.size();
    const std::size_t T = traj.marginals.empty() ? 0 : traj.marginals.size() - 1;
    std::vector<double> visits(n, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t s = 0; s < n; ++s) visits[s] += traj.marginals[t][s];

    VisitTail out;
    out.lhs.assign(n, 0.0);
    out.rhs.assign(n, 0.0);
    double l = 0.0, r = 0.0;
    for (std::size_t s = n; s-- > 0;) {
        const double w = f(static_cast<State>(s));
        l += w * visits[s];
        r += w * measure[s];
        out.lhs[s] = l;
        out.rhs[s] = static_cast<double>(T) * r;
    }
    return out;
}

} // namespace bdrl::oracle
