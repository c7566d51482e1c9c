#include "rotopend/noise_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rotopend {

double sublinearity_envelope(const NoisePath& path, double B) {
    if (B < 0) throw std::invalid_argument("sublinearity_envelope: B must be >= 0");
    const auto& v = path.values();
    double A = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double s = path.node_time(i);
        A = std::max(A, std::fabs(v[i]) - B * std::fabs(s));
    }
    return A;
}

bool SublinearityReport::is_admissible(double t) const {
    for (const auto& [lo, hi] : admissible)
        if (t >= lo && t <= hi) return true;
    return false;
}

SublinearityReport admissible_times(const NoisePath& path, double A, double B, double T) {
    if (T <= 0) throw std::invalid_argument("admissible_times: T must be positive");
    if (B < 0 || A < 0) throw std::invalid_argument("admissible_times: A, B must be >= 0");
    if (-T < path.t_start() - 1e-9 * path.dt() || T > path.t_end() + 1e-9 * path.dt())
        throw std::invalid_argument("admissible_times: window [-T, T] exceeds path domain");

    // t admissible  <=>  max_u (|omega(u)| - B|u - t|) <= A. The maximum splits
    // into prefix/suffix scans: L(t) = max_{u<=t}(|w(u)| + B u) - B t and
    // R(t) = max_{u>=t}(|w(u)| - B u) + B t.
    const auto& v = path.values();
    const std::size_t n = v.size();
    std::vector<double> prefix(n), suffix(n);
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        run = std::max(run, std::fabs(v[i]) + B * path.node_time(i));
        prefix[i] = run;
    }
    run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = n; i-- > 0;) {
        run = std::max(run, std::fabs(v[i]) - B * path.node_time(i));
        suffix[i] = run;
    }

    const std::size_t i0 = path.node_at_or_after(-T);
    const std::size_t i1 = path.node_at_or_before(T);

    SublinearityReport report;
    report.A = A;
    report.B = B;
    const double tol = 1e-12 * std::max(1.0, A);
    double total = 0.0;
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t i = i0; i <= i1; ++i) {
        const double t = path.node_time(i);
        const double g = std::max(prefix[i] - B * t, suffix[i] + B * t);
        const bool ok = g <= A + tol;
        if (ok && !in_run) {
            run_start = i;
            in_run = true;
        }
        if ((!ok || i == i1) && in_run) {
            const std::size_t run_end = ok ? i : i - 1;
            const double lo = path.node_time(run_start);
            const double hi = path.node_time(run_end);
            report.admissible.emplace_back(lo, hi);
            total += hi - lo;
            in_run = false;
        }
    }
    report.measure_ratio = std::min(1.0, total / (2.0 * T));
    return report;
}

BumpEvaluator::BumpEvaluator(const NoisePath& path, const BumpSpec& spec)
    : t_start_(path.t_start()), dt_(path.dt()), t_end_(path.t_end()), rho_(spec.rho) {
    if (!(spec.rho > 0)) throw std::invalid_argument("BumpSpec: rho must be positive");
    const auto& v = path.values();
    const std::size_t n = v.size();
    std::vector<char> inside(n);
    bool all = true, any = false;
    for (std::size_t i = 0; i < n; ++i) {
        inside[i] = std::fabs(v[i]) <= spec.A + spec.B * std::fabs(path.node_time(i));
        all = all && inside[i];
        any = any || inside[i];
    }
    everywhere_one_ = all;
    everywhere_zero_ = !any;
    if (all || !any) return;

    // Distance from each node to the nearest in-set node, L/R sweeps.
    const double inf = std::numeric_limits<double>::infinity();
    distance_.assign(n, inf);
    double last = -inf;
    for (std::size_t i = 0; i < n; ++i) {
        if (inside[i]) last = path.node_time(i);
        if (last > -inf) distance_[i] = path.node_time(i) - last;
    }
    last = inf;
    for (std::size_t i = n; i-- > 0;) {
        if (inside[i]) last = path.node_time(i);
        if (last < inf) distance_[i] = std::min(distance_[i], last - path.node_time(i));
    }
}

double BumpEvaluator::operator()(double s) const {
    if (s < t_start_ - 1e-9 * dt_ || s > t_end_ + 1e-9 * dt_)
        throw std::out_of_range("bump evaluated outside path domain");
    if (everywhere_one_) return 1.0;
    if (everywhere_zero_) return 0.0;
    double x = (s - t_start_) / dt_;
    x = std::clamp(x, 0.0, static_cast<double>(distance_.size() - 1));
    const auto i = static_cast<std::size_t>(x);
    const double theta = x - static_cast<double>(i);
    double d;
    if (i + 1 < distance_.size())
        d = distance_[i] + theta * (distance_[i + 1] - distance_[i]);
    else
        d = distance_[i];
    if (d <= 0) return 1.0;
    if (d >= rho_) return 0.0;
    const double u = 1.0 - d / rho_;
    return u * u * (3.0 - 2.0 * u);
}

double bump_value(const NoisePath& path, const BumpSpec& spec, double s) {
    return BumpEvaluator(path, spec)(s);
}

ErgodicAverages ergodic_average(const NoisePath& path, double T) {
    if (T <= 0) throw std::invalid_argument("ergodic_average: T must be positive");
    if (!path.contains(0.0) || !path.contains(T))
        throw std::invalid_argument("ergodic_average: [0, T] exceeds path domain");
    const std::size_t i0 = path.node_at_or_after(0.0);
    const std::size_t i1 = path.node_at_or_before(T);
    const auto& v = path.values();
    double sum = 0, sum_sq = 0;
    // Interior trapezoid plus partial end cells against the interpolant.
    for (std::size_t i = i0; i + 1 <= i1; ++i) {
        sum += 0.5 * (v[i] + v[i + 1]);
        sum_sq += 0.5 * (v[i] * v[i] + v[i + 1] * v[i + 1]);
    }
    sum *= path.dt();
    sum_sq *= path.dt();
    const double lead = path.node_time(i0) - 0.0;
    if (lead > 1e-12) {
        const double w0 = path.evaluate(0.0), w1 = v[i0];
        sum += 0.5 * lead * (w0 + w1);
        sum_sq += 0.5 * lead * (w0 * w0 + w1 * w1);
    }
    const double tail = T - path.node_time(i1);
    if (tail > 1e-12) {
        const double w0 = v[i1], w1 = path.evaluate(T);
        sum += 0.5 * tail * (w0 + w1);
        sum_sq += 0.5 * tail * (w0 * w0 + w1 * w1);
    }
    return {sum / T, sum_sq / T};
}

double holder_constant(const NoisePath& path, double alpha) {
    if (!(alpha > 0 && alpha < 1))
        throw std::invalid_argument("holder_constant: alpha must be in (0, 1)");
    const auto& v = path.values();
    double best = 0.0;
    for (std::size_t stride : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
        if (v.size() <= stride) continue;
        const double denom = std::pow(path.dt() * static_cast<double>(stride), alpha);
        for (std::size_t i = 0; i + stride < v.size(); ++i)
            best = std::max(best, std::fabs(v[i + stride] - v[i]) / denom);
    }
    return best;
}

}  // namespace rotopend
