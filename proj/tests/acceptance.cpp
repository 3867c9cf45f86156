// End-to-end acceptance checks for the qutrit recycling toolkit. Each check
// prints one PASS/FAIL line; the process exits nonzero if any fail.

#include "qec3/analysis.hpp"
#include "qec3/channels.hpp"
#include "qec3/codes.hpp"
#include "qec3/experiment.hpp"
#include "qec3/qcore.hpp"
#include "qec3/rng.hpp"
#include "qec3/trajectories.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

using namespace qec3;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Ket bell12_21() {
    Vector v = Vector::Zero(9);
    v(5) = 1.0 / std::sqrt(2.0);
    v(7) = 1.0 / std::sqrt(2.0);
    return Ket({3, 3}, v);
}

Ket bell00_22() {
    Vector v = Vector::Zero(9);
    v(0) = 1.0 / std::sqrt(2.0);
    v(8) = 1.0 / std::sqrt(2.0);
    return Ket({3, 3}, v);
}

ChannelSet two_site_ladder(double gamma) {
    auto one = ladder_indistinguishable(gamma);
    return merge(embed(one, 0, 2), embed(one, 1, 2));
}

ChannelSet two_site_structure(Structure kind) {
    auto one = structure_ops(kind, 1.0, 1.0);
    return merge(embed(one, 0, 2), embed(one, 1, 2));
}

double trace_norm(Matrix m) {
    m = 0.5 * (m + Matrix(m.adjoint()));
    return hermitian_eigenvalues(m).cwiseAbs().sum();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------

Outcome check_jump_code_algebra() {
    const double t0 = now_seconds();
    const double gamma = 1.0;
    auto code = jump_code(gamma);
    const Matrix& pi = code.channel.mat;
    const Matrix& pc = code.codespace_projector.mat;
    const Matrix& r = code.recycler->mat;

    double worst = 0.0;
    worst = std::max(worst, (pi.adjoint() * pi - gamma * pc).norm());
    worst = std::max(worst, (r * pi - std::sqrt(gamma) * pc).norm());
    worst = std::max(worst, (r.adjoint() * r - Matrix::Identity(3, 3)).norm());
    worst = std::max(worst,
                     (matrix_exponential(Matrix(cplx(0, -1) * code.feedback_generator.mat)) - r)
                         .norm());
    const double lambda_err =
        std::abs(code.lambda_mag - 2.0 * std::numbers::pi / (3.0 * std::numbers::sqrt3));
    const double elapsed = now_seconds() - t0;

    const bool pass = worst < 1e-10 && lambda_err < 1e-12 && elapsed < 1.0;
    return {pass, fmt("max residual %.2e, lambda err %.2e, %.3fs", worst, lambda_err, elapsed)};
}

Outcome check_diffusion_code_algebra() {
    auto code = diffusion_code(1.0);
    const Matrix& s = code.stabilizer->mat;
    const Matrix& f = code.feedback_generator.mat;
    const Matrix& pc = code.codespace_projector.mat;
    const Matrix x = operator_decompose(code.channel).x.mat;

    const double anti = (s * x + x * s).norm();
    const double herm = (f - Matrix(f.adjoint())).norm();
    const double annihilate = ((code.channel.mat - cplx(0, 1) * f) * pc).norm();

    double step_worst = 0.0;
    const double dt = 1e-3;
    const Matrix one_minus_s = Matrix::Identity(3, 3) - s;
    for (double q : {-1.0, 0.0, 0.3}) {
        const Matrix step = Matrix::Identity(3, 3) -
                            (0.5 * dt * Matrix::Identity(3, 3) + q * x) * one_minus_s;
        for (int basis : {0, 2}) {
            Vector v = Vector::Zero(3);
            v(basis) = 1.0;
            step_worst = std::max(step_worst, (step * v - v).norm());
        }
    }
    const double worst = std::max({anti, herm, annihilate, step_worst});
    return {worst < 1e-12,
            fmt("|SX+XS| %.2e, |F-F^H| %.2e, |(Pi-iF)P_C| %.2e, step %.2e", anti, herm,
                annihilate, step_worst)};
}

Outcome check_perfect_jump_protection() {
    EnsembleConfig cfg;
    cfg.unraveling = EnsembleConfig::Unraveling::jump;
    cfg.psi0 = bell12_21();
    cfg.channels = two_site_ladder(1.0);
    cfg.code = jump_code(1.0);
    cfg.params.dt = 1e-3;
    cfg.params.t_max = 10.0;
    cfg.params.record_stride = 10;
    cfg.params.seed = 101;
    cfg.params.record_event_negativity = false;
    auto res = ensemble_run(cfg, 200);

    double worst = 0.0;
    for (const auto& s : res.per_traj) worst = std::max(worst, std::abs(s.min_negativity - 1.0));
    for (double m : res.mean_negativity) worst = std::max(worst, std::abs(m - 1.0));
    long jumps = 0;
    for (const auto& s : res.per_traj) jumps += s.n_jumps;
    return {worst < 1e-6,
            fmt("max |N-1| = %.2e over 200 trajectories (%ld recycled jumps)", worst, jumps)};
}

Outcome check_diffusion_protection() {
    auto run = [](double dt) {
        EnsembleConfig cfg;
        cfg.unraveling = EnsembleConfig::Unraveling::diffusion;
        cfg.psi0 = bell00_22();
        cfg.channels = two_site_ladder(1.0);
        cfg.code = diffusion_code(1.0);
        cfg.params.dt = dt;
        cfg.params.t_max = 2.0;
        cfg.params.record_stride = static_cast<int>(std::lround(0.5 / dt));
        cfg.params.seed = 202;
        cfg.params.record_event_negativity = false;
        return ensemble_run(cfg, 100);
    };

    auto stats = [](const EnsembleResult& res) {
        double s1 = 0.0, s2 = 0.0, lo = 1.0;
        for (const auto& t : res.per_traj) {
            const double inf = 1.0 - t.final_fidelity;
            s1 += inf;
            s2 += inf * inf;
            lo = std::min(lo, t.final_fidelity);
        }
        const double n = static_cast<double>(res.per_traj.size());
        const double mean = s1 / n;
        const double sem = std::sqrt(std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) / n);
        return std::tuple(mean, sem, lo);
    };

    auto coarse = run(1e-4);
    auto [inf1, sem1, lo1] = stats(coarse);
    auto fine = run(5e-5);
    auto [inf2, sem2, lo2] = stats(fine);

    const bool fidelity_ok = (1.0 - inf1) >= 1.0 - 5e-3;
    // First-order convergence: halving dt at least halves the mean infidelity,
    // up to 3 sigma of the Monte Carlo error of both estimates.
    const bool halves = inf2 <= 0.5 * inf1 + 3.0 * std::sqrt(sem2 * sem2 + 0.25 * sem1 * sem1);
    return {fidelity_ok && halves,
            fmt("mean fidelity %.6f (min %.5f); infidelity %.2e -> %.2e at dt/2 (ratio %.2f)",
                1.0 - inf1, lo1, inf1, inf2, inf2 / inf1)};
}

Outcome check_unraveling_consistency() {
    SimParams base;
    base.dt = 1e-3;
    base.t_max = 5.0;
    base.record_stride = 500;
    base.record_event_negativity = false;

    auto master = master_evolve(to_density(bell12_21()), two_site_ladder(1.0), std::nullopt,
                                base);

    double worst_ratio = 0.0;
    std::string note;
    for (auto kind : {EnsembleConfig::Unraveling::jump, EnsembleConfig::Unraveling::diffusion}) {
        EnsembleConfig cfg;
        cfg.unraveling = kind;
        cfg.psi0 = bell12_21();
        cfg.channels = two_site_ladder(1.0);
        cfg.params = base;
        cfg.params.seed = kind == EnsembleConfig::Unraveling::jump ? 301 : 302;
        cfg.keep_mean_state = true;
        auto res = ensemble_run(cfg, 5000);

        if (res.times.size() != master.times.size())
            return {false, "sampling grids disagree between ensemble and master"};
        for (std::size_t i = 1; i < res.times.size(); ++i) {
            const double tn = trace_norm(res.mean_state[i] - master.states[i].mat);
            // Trace-norm bound on the Monte Carlo error: sqrt(d) * Frobenius SEM.
            const double gate = 3.0 * 3.0 * res.mean_state_sigma[i];
            worst_ratio = std::max(worst_ratio, tn / gate);
        }
        note += fmt("%s worst (trace norm)/(3 sd) %.2f; ",
                    kind == EnsembleConfig::Unraveling::jump ? "jump" : "diffusion",
                    worst_ratio);
    }
    return {worst_ratio <= 1.0, note + "10 checkpoints, 5000 trajectories each"};
}

Outcome check_delayed_recycling_analytics() {
    const double tau = 0.7;
    auto cs = two_site_ladder(1.0);
    auto code = jump_code(1.0);
    const std::vector<int> dims = {3, 3};
    const Matrix pi0 = embed_site_op(code.channel.mat, 0, dims).mat;
    const Matrix pi1 = embed_site_op(code.channel.mat, 1, dims).mat;
    const Matrix r0 = embed_site_op(code.recycler->mat, 0, dims).mat;
    const Matrix r1 = embed_site_op(code.recycler->mat, 1, dims).mat;

    auto normalize = [](Vector v) { return Vector(v / v.norm()); };
    auto ket2 = [](int i, int j, double amp) {
        Vector v = Vector::Zero(9);
        v(3 * i + j) = amp;
        return v;
    };

    Ket psi = bell12_21();
    // Click on site 0, then free decay for tau.
    psi = Ket({3, 3}, normalize(pi0 * psi.amps));
    psi = no_jump_propagate(psi, cs, tau);
    const Vector target1 = normalize(ket2(0, 2, 1.0) + ket2(1, 1, std::exp(-0.5 * tau)));
    const double err1 = (psi.amps - target1).norm();

    // Recycle site 0, click on site 1, decay for tau again.
    psi = Ket({3, 3}, normalize(r0 * psi.amps));
    psi = Ket({3, 3}, normalize(pi1 * psi.amps));
    psi = no_jump_propagate(psi, cs, tau);
    const Vector target2 = normalize(ket2(1, 1, 1.0) + ket2(2, 0, 1.0));
    const double err2 = (psi.amps - target2).norm();

    // Recycling site 1 closes the cycle back onto the initial state.
    psi = Ket({3, 3}, normalize(r1 * psi.amps));
    const double overlap = std::abs(psi.amps.dot(bell12_21().amps));
    const double err3 = std::abs(overlap - 1.0);

    const bool pass = err1 < 1e-8 && err2 < 1e-8 && err3 < 1e-10;
    return {pass, fmt("state errors %.2e / %.2e, cycle closure 1-|<psi0|psi>| = %.2e", err1,
                      err2, err3)};
}

Outcome check_leap_and_sweeps() {
    // (a) Every detection+recycle event raises the negativity at eta = 0.98.
    EnsembleConfig leap;
    leap.unraveling = EnsembleConfig::Unraveling::jump;
    leap.psi0 = bell12_21();
    leap.channels = two_site_ladder(1.0);
    leap.code = jump_code(1.0);
    leap.params.dt = 1e-3;
    leap.params.t_max = 5.0;
    leap.params.record_stride = 100;
    leap.params.eta = 0.98;
    leap.params.seed = 401;
    leap.params.record_event_negativity = true;
    auto leap_res = ensemble_run(leap, 100);
    double worst_leap = 0.0;
    long n_events = 0;
    for (const auto& t : leap_res.per_traj) {
        if (t.n_jumps > 0) worst_leap = std::min(worst_leap, t.worst_event_leap);
        n_events += t.n_jumps;
    }
    const bool leap_ok = worst_leap >= -1e-9;

    // (b, c) Mean time-averaged negativity: monotone in the delay and in the
    // efficiency, within 3 sigma per consecutive pair.
    auto sweep_stats = [](const EnsembleConfig& cfg, int n) {
        auto res = ensemble_run(cfg, n);
        double s1 = 0.0, s2 = 0.0;
        for (const auto& t : res.per_traj) {
            s1 += t.time_avg_negativity;
            s2 += t.time_avg_negativity * t.time_avg_negativity;
        }
        const double nn = static_cast<double>(n);
        const double mean = s1 / nn;
        const double sem = std::sqrt(std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0)) / nn);
        return std::pair(mean, sem);
    };

    EnsembleConfig sweep;
    sweep.unraveling = EnsembleConfig::Unraveling::jump;
    sweep.psi0 = bell12_21();
    sweep.channels = two_site_ladder(1.0);
    sweep.code = jump_code(1.0);
    sweep.params.dt = 1e-3;
    sweep.params.t_max = 5.0;
    sweep.params.record_stride = 50;
    sweep.params.record_event_negativity = false;

    std::vector<std::pair<double, double>> tau_curve;
    for (double tau : {0.0, 0.25, 0.5, 1.0}) {
        sweep.params.tau = tau;
        sweep.params.eta = 1.0;
        sweep.params.seed = 402;
        tau_curve.push_back(sweep_stats(sweep, 400));
    }
    bool tau_monotone = tau_curve.front().first > tau_curve.back().first;
    for (std::size_t i = 0; i + 1 < tau_curve.size(); ++i) {
        const double diff = tau_curve[i].first - tau_curve[i + 1].first;
        const double sig = std::hypot(tau_curve[i].second, tau_curve[i + 1].second);
        tau_monotone = tau_monotone && diff >= -3.0 * sig;
    }

    std::vector<std::pair<double, double>> eta_curve;
    for (double eta : {0.8, 0.9, 0.95, 1.0}) {
        sweep.params.tau = 0.0;
        sweep.params.eta = eta;
        sweep.params.seed = 403;
        eta_curve.push_back(sweep_stats(sweep, 200));
    }
    bool eta_monotone = eta_curve.back().first > eta_curve.front().first;
    for (std::size_t i = 0; i + 1 < eta_curve.size(); ++i) {
        const double diff = eta_curve[i + 1].first - eta_curve[i].first;
        const double sig = std::hypot(eta_curve[i].second, eta_curve[i + 1].second);
        eta_monotone = eta_monotone && diff >= -3.0 * sig;
    }

    return {leap_ok && tau_monotone && eta_monotone,
            fmt("worst leap %.2e over %ld events; tau curve %.3f->%.3f %s; eta curve "
                "%.3f->%.3f %s",
                worst_leap, n_events, tau_curve.front().first, tau_curve.back().first,
                tau_monotone ? "monotone" : "NOT monotone", eta_curve.front().first,
                eta_curve.back().first, eta_monotone ? "monotone" : "NOT monotone")};
}

Outcome check_noclick_closed_forms() {
    CounterRng rng(2024, 0);
    auto ladder_e = two_site_structure(Structure::E);
    auto ladder_v = two_site_structure(Structure::V);
    auto lambda2 = two_site_structure(Structure::Lambda);

    double worst = 0.0, worst_asym = 0.0;
    int n_pts = 0;
    for (std::uint64_t n = 0; n < 50; ++n) {
        auto k = make_coeffs(rng.uniform(n, 0, 0), rng.uniform(n, 1, 0), rng.uniform(n, 2, 0));
        if (k.degenerate) continue;
        const Ket psi0 = coeffs_state(k);
        for (std::uint16_t j = 0; j < 20; ++j) {
            const double t = 10.0 * rng.uniform(n, static_cast<std::uint16_t>(3 + j), 0);
            const double ne = negativity(to_density(no_jump_propagate(psi0, ladder_e, t)), {0});
            const double nv = negativity(to_density(no_jump_propagate(psi0, ladder_v, t)), {0});
            const double nl = negativity(to_density(no_jump_propagate(psi0, lambda2, t)), {0});
            worst = std::max(worst, std::abs(ne - nojump_negativity_ev(k, 1.0, t)));
            worst = std::max(worst, std::abs(nv - nojump_negativity_ev(k, 1.0, t)));
            worst = std::max(worst, std::abs(nl - nojump_negativity_lambda(k, 2.0, t)));
            ++n_pts;
        }
        worst_asym = std::max(
            worst_asym, std::abs(nojump_negativity_lambda(k, 2.0, 15.0) - lambda_asymptote(k)));
    }
    const bool pass = worst < 1e-6 && worst_asym < 1e-6 && n_pts >= 900;
    return {pass, fmt("max |closed form - propagated| %.2e over %d points; plateau err %.2e",
                      worst, n_pts, worst_asym)};
}

Outcome check_classification_agreement() {
    std::vector<std::array<double, 3>> pts;
    const int res = 15;
    for (int i = 0; i < res; ++i)
        for (int j = 0; i + j < res; ++j) {
            const double wa = (i + 0.5) / res;
            const double wb = (j + 0.5) / res;
            const double wc = 1.0 - wa - wb;
            if (wc <= 1e-12) continue;
            pts.push_back({std::sqrt(wa), std::sqrt(wb), std::sqrt(wc)});
        }
    std::array<double, 3> caption = {0.179, 0.2386, 0.9545};
    std::sort(caption.begin(), caption.end());
    do {
        pts.push_back(caption);
    } while (std::next_permutation(caption.begin(), caption.end()));

    int checked = 0, skipped = 0, mismatched = 0, threshold_checked = 0, threshold_bad = 0;
    std::string first_bad;
    for (Structure kind : {Structure::E, Structure::V, Structure::Lambda}) {
        auto channels = two_site_structure(kind);
        for (const auto& p : pts) {
            const InitialCoeffs k = make_coeffs(p[0], p[1], p[2]);
            const RegimeLabel label = classify_regime(kind, k);
            if (label.terminal == Terminal::boundary) {
                ++skipped;
                continue;
            }
            SimParams sp;
            sp.dt = 0.01;
            sp.t_max = 15.0;
            sp.record_stride = 3;
            auto series = master_evolve(to_density(coeffs_state(k)), channels, std::nullopt, sp);
            auto rep = detect_sudden_changes(pt_spectra_series(series, {0}), series.times);
            ++checked;
            const bool agree = rep.sudden_changes == label.sudden_changes &&
                               rep.terminal == label.terminal;
            if (!agree) {
                ++mismatched;
                if (first_bad.empty())
                    first_bad = fmt(" first mismatch: kind %d (%.3f,%.3f,%.3f) exact (%d,%s) "
                                    "detected (%d,%s);",
                                    static_cast<int>(kind), k.a, k.b, k.c, label.sudden_changes,
                                    to_string(label.terminal), rep.sudden_changes,
                                    to_string(rep.terminal));
            }
            if (kind == Structure::Lambda) {
                const double margin = k.c * k.c - 4.0 * k.a * k.b;
                if (std::abs(margin) > 4e-3) {
                    ++threshold_checked;
                    const bool entangled_final = rep.final_negativity >= 1e-3;
                    if (entangled_final != (margin < 0.0)) ++threshold_bad;
                }
            }
        }
    }
    const bool pass = mismatched == 0 && threshold_bad == 0;
    return {pass, fmt("%d grid+reference points agreed, %d boundary points skipped, "
                      "%d survival-threshold checks (%d wrong)%s",
                      checked, skipped, threshold_checked, threshold_bad, first_bad.c_str())};
}

Outcome check_split_dissipator_identity() {
    auto whole = ladder_indistinguishable(1.0);
    auto half = ladder_split(1.0, 0.5);
    auto skew = ladder_split(1.0, 0.8);
    const Matrix d_whole = dissipator_matrix({whole.channels[0].op});
    const Matrix d_half = dissipator_matrix({half.channels[0].op, half.channels[1].op});
    const Matrix d_skew = dissipator_matrix({skew.channels[0].op, skew.channels[1].op});
    const double resid_half = (d_whole - d_half).norm();
    const double resid_skew = (d_whole - d_skew).norm();
    const bool pass = resid_half <= 1e-14 && resid_skew > 1e-6;
    return {pass, fmt("equal-split residual %.2e; skewed-split residual %.2e", resid_half,
                      resid_skew)};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "jump-code algebra", check_jump_code_algebra},
        {2, "diffusion-code algebra", check_diffusion_code_algebra},
        {3, "perfect jump protection", check_perfect_jump_protection},
        {4, "diffusion protection and convergence", check_diffusion_protection},
        {5, "unraveling consistency", check_unraveling_consistency},
        {6, "delayed-recycling state analytics", check_delayed_recycling_analytics},
        {7, "entanglement leap and sweep monotonicity", check_leap_and_sweeps},
        {8, "no-click closed forms", check_noclick_closed_forms},
        {9, "regime classification agreement", check_classification_agreement},
        {10, "split-detector dissipator identity", check_split_dissipator_identity},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const double t0 = now_seconds();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out = {false, fmt("exception: %s", e.what())};
        }
        const double dt = now_seconds() - t0;
        std::printf("ACCEPTANCE %2d: %s - %s (%s) [%.1fs]\n", c.id, out.pass ? "PASS" : "FAIL",
                    c.name, out.detail.c_str(), dt);
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    std::printf("ACCEPTANCE SUMMARY: %zu/%zu passed\n", criteria.size() - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
