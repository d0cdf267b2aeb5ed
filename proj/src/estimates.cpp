#include "thinlayer/estimates.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace thinlayer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pow4(double x) { return x * x * x * x; }

}  // namespace

double absorbing_time(double psi0_norm, double depth, double D_min)
{
    if (!(psi0_norm > 1.0)) {
        return 0.0;
    }
    return 2.0 * depth * depth / D_min * std::log(psi0_norm);
}

double absorbing_time(double psi0_norm, const LayerStack& layers)
{
    return absorbing_time(psi0_norm, layers.depth(), layers.D_min());
}

double EnergyReport::envelope(double t) const
{
    const double e = std::exp(-decay_rate() * t);
    return psi0_norm * psi0_norm * e + M1 * H * H / D_min * (1.0 - e);
}

double EnergyReport::M5_prime(double t) const
{
    const double a0 = psi0_norm * psi0_norm;
    const double ball = M1 * H * H / D_min + a0;
    return (grad0_sq + M2 * t) * std::exp(M3 * t + M4 * ball * (M1 * t + a0));
}

double EnergyReport::M7(double t) const
{
    if (t <= 0.0) {
        return 2.0 * grad0_sq;
    }
    const double a0 = psi0_norm * psi0_norm;
    const double ball = M1 * H * H / D_min + a0;
    return 2.0 * ((M2 + M3 * M6 + M4 * M6 * M6 * ball) * t + grad0_sq);
}

double EnergyReport::M8(double t) const
{
    const double C = embed.C;
    const double m6sq = M6 * M6;
    return C * (std::exp(C * m6sq * t) * (C * t + C * m6sq * t + C * M7(t)) + M6);
}

EnergyReport constants(const LayerStack& layers, const BackgroundProfile& profile, const EmbeddingConstants& embed,
                       double psi0_norm, double grad0_sq)
{
    EnergyReport r;
    r.H = layers.depth();
    r.L = layers.period();
    r.K_min = layers.K_min();
    r.K_max = layers.K_max();
    r.D_min = layers.D_min();
    r.D_max = layers.D_max();
    r.c_delta = profile.c_delta();
    r.delta = profile.delta();
    r.admissibility = check_delta(layers, profile);
    r.psi0_norm = psi0_norm;
    r.grad0_sq = grad0_sq;
    r.embed = embed;

    const double c2 = r.c_delta * r.c_delta;
    r.M1 = 8.0 * c2 * r.L * r.D_max * r.D_max / (r.delta * r.D_min);
    r.M2 = 8.0 * c2 * r.L * r.D_max * r.D_max / (r.delta * r.delta * r.delta);
    r.M3 = 8.0 * pow4(r.K_max) * c2 / (r.K_min * r.K_min * r.D_min);
    r.M4 = 13.5 * pow4(embed.C1) * embed.C2 * embed.C2 * embed.C_u * embed.C_u * pow4(1.0 + embed.C_p) *
           pow4(r.K_max) / (r.D_min * r.D_min);

    const double ball = r.absorbing_bound();
    const double m5 = (r.M2 + ball) * std::exp(r.M3 + r.M4 * ball * ball);
    r.M5 = std::isfinite(m5) ? m5 : kInf;
    r.T1 = absorbing_time(psi0_norm, r.H, r.D_min);
    const double m5p = r.M5_prime(r.T1 + 1.0);
    r.M6 = std::max(r.M5, std::isfinite(m5p) ? m5p : kInf);
    return r;
}

// ---------------------------------------------------------------------------

bool AuditReport::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.applicable || c.pass; });
}

std::vector<double> cumulative_integral(const std::vector<TrajectorySample>& samples,
                                        double TrajectorySample::*column)
{
    std::vector<double> out(samples.size(), 0.0);
    for (std::size_t n = 1; n < samples.size(); ++n) {
        const double h = samples[n].t - samples[n - 1].t;
        out[n] = out[n - 1] + 0.5 * h * (samples[n].*column + samples[n - 1].*column);
    }
    return out;
}

namespace {

struct Allowance {
    double dt_sq;
    double dz_sq;
    double factor;
    [[nodiscard]] double operator()(double scale) const { return factor * (dt_sq + dz_sq) * std::max(1.0, scale); }
};

// The time allowance uses the largest of the step sizes and the sample
// spacings, since the audit differences sampled values.
Allowance make_allowance(const std::vector<TrajectorySample>& samples, const AuditOptions& options)
{
    double h = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
        h = std::max(h, samples[n].dt);
        if (n > 0) {
            h = std::max(h, samples[n].t - samples[n - 1].t);
        }
    }
    return {h * h, options.max_dz * options.max_dz, options.tol_factor};
}

void record(CheckResult& c, double residual, double t)
{
    if (c.checked == 0 || residual > c.worst_residual) {
        c.worst_residual = residual;
        c.worst_t = t;
    }
    ++c.checked;
}

void finish(CheckResult& c)
{
    c.pass = c.checked == 0 || c.worst_residual <= c.tolerance;
}

// Value of a cumulative integral at time t by linear interpolation between
// samples. t must lie within the sampled range.
double cumulative_at(const std::vector<TrajectorySample>& samples, const std::vector<double>& cum, double t)
{
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const TrajectorySample& s, double v) { return s.t < v; });
    if (it == samples.end()) {
        return cum.back();
    }
    const auto n = static_cast<std::size_t>(it - samples.begin());
    if (n == 0 || it->t == t) {
        return cum[n];
    }
    const double w = (t - samples[n - 1].t) / (samples[n].t - samples[n - 1].t);
    return cum[n - 1] + w * (cum[n] - cum[n - 1]);
}

AuditReport inapplicable(const EnergyReport& report)
{
    AuditReport a;
    a.applicable = false;
    a.note = fmt::format("not applicable: delta = {:.17g} exceeds delta_max = {:.17g}", report.delta,
                         report.admissibility.delta_max);
    return a;
}

}  // namespace

AuditReport audit_l2(const std::vector<TrajectorySample>& samples, const EnergyReport& report,
                     const AuditOptions& options)
{
    if (!report.admissibility.admissible) {
        return inapplicable(report);
    }
    AuditReport a;
    const Allowance tol = make_allowance(samples, options);
    const std::size_t n = samples.size();

    CheckResult rate{.name = "rate"};
    double rate_scale = report.M1;
    std::vector<double> lhs(n, 0.0);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double dE = (samples[k + 1].psi_sq - samples[k - 1].psi_sq) / (samples[k + 1].t - samples[k - 1].t);
        lhs[k] = dE + samples[k].grad_D_sq;
        rate_scale = std::max({rate_scale, std::abs(dE), samples[k].grad_D_sq});
    }
    rate.tolerance = tol(rate_scale);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        record(rate, lhs[k] - report.M1, samples[k].t);
    }
    finish(rate);

    CheckResult env{.name = "envelope"};
    double psi_scale = report.psi0_norm * report.psi0_norm;
    for (const auto& s : samples) {
        psi_scale = std::max(psi_scale, s.psi_sq);
    }
    env.tolerance = tol(psi_scale);
    for (const auto& s : samples) {
        record(env, s.psi_sq - report.envelope(s.t), s.t);
    }
    finish(env);

    const double ball = report.absorbing_bound();
    CheckResult absorb{.name = "absorbing"};
    absorb.tolerance = env.tolerance;
    for (const auto& s : samples) {
        if (s.t >= report.T1) {
            record(absorb, s.psi_sq - ball, s.t);
        }
    }
    finish(absorb);

    CheckResult window{.name = "window"};
    if (n > 1) {
        const auto cum = cumulative_integral(samples, &TrajectorySample::grad_D_sq);
        const double t_last = samples.back().t;
        double grad_scale = 0.0;
        for (const auto& s : samples) {
            grad_scale = std::max(grad_scale, s.grad_D_sq);
        }
        window.tolerance = tol(grad_scale);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = samples[k].t;
            if (t >= report.T1 && t + 1.0 <= t_last * (1.0 + 1e-12)) {
                record(window, cumulative_at(samples, cum, std::min(t + 1.0, t_last)) - cum[k] - ball, t);
            }
        }
    }
    finish(window);

    a.checks = {rate, env, absorb, window};
    a.fitted.emplace_back("M1", report.M1);
    a.fitted.emplace_back("T1", report.T1);
    a.fitted.emplace_back("absorbing_bound", ball);
    return a;
}

AuditReport audit_h1(const std::vector<TrajectorySample>& samples, const EnergyReport& report,
                     const AuditOptions& options)
{
    if (!report.admissibility.admissible) {
        return inapplicable(report);
    }
    AuditReport a;
    const Allowance tol = make_allowance(samples, options);
    const double t_start = report.T1 + 1.0;

    double sup_y = 0.0;
    std::vector<double> ts;
    std::vector<double> ys;
    for (const auto& s : samples) {
        if (s.t >= t_start) {
            sup_y = std::max(sup_y, s.grad_D_sq);
            ts.push_back(s.t);
            ys.push_back(s.grad_D_sq);
        }
    }

    CheckResult bound{.name = "h1_bound"};
    bound.tolerance = tol(sup_y);
    if (!ts.empty()) {
        record(bound, sup_y - report.M5, ts.front());
    }
    finish(bound);

    // Least-squares slope over the second half of the post-absorption window,
    // where any approach to the long-time state has mostly settled.
    CheckResult trend{.name = "h1_trend"};
    double slope = 0.0;
    if (ts.size() >= 4) {
        const double t_mid = 0.5 * (ts.front() + ts.back());
        double st = 0, sy = 0, stt = 0, sty = 0, m = 0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            if (ts[k] >= t_mid) {
                st += ts[k];
                sy += ys[k];
                stt += ts[k] * ts[k];
                sty += ts[k] * ys[k];
                m += 1;
            }
        }
        const double den = m * stt - st * st;
        if (m >= 2 && den > 0.0) {
            slope = (m * sty - st * sy) / den;
            trend.tolerance = options.slope_rel * sup_y + tol(sup_y);
            record(trend, slope, t_mid);
        }
    }
    finish(trend);

    CheckResult integral{.name = "L_integral"};
    double ratio = 0.0;
    if (!samples.empty()) {
        const auto cum = cumulative_integral(samples, &TrajectorySample::L_sq);
        double scale = 0.0;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            scale = std::max(scale, cum[k]);
        }
        integral.tolerance = tol(scale);
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const double m7 = report.M7(samples[k].t);
            record(integral, cum[k] - m7, samples[k].t);
            if (m7 > 0.0 && std::isfinite(m7)) {
                ratio = std::max(ratio, cum[k] / m7);
            }
        }
        a.fitted.emplace_back("L_integral_final", cum.back());
        const double t_end = samples.back().t - samples.front().t;
        a.fitted.emplace_back("L_integral_mean_rate", t_end > 0.0 ? cum.back() / t_end : 0.0);
    }
    finish(integral);

    a.checks = {bound, trend, integral};
    a.fitted.emplace_back("sup_grad_D_sq", sup_y);
    a.fitted.emplace_back("grad_D_sq_slope", slope);
    a.fitted.emplace_back("M5", report.M5);
    a.fitted.emplace_back("M6", report.M6);
    // Smallest multiple of M7 that would still bound the observed integral.
    a.fitted.emplace_back("M7_ratio", ratio);
    return a;
}

}  // namespace thinlayer
