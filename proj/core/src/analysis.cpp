#include "qec3/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qec3 {

InitialCoeffs make_coeffs(double a, double b, double c, double tie_tol) {
    a = std::abs(a);
    b = std::abs(b);
    c = std::abs(c);
    const double n = std::sqrt(a * a + b * b + c * c);
    if (!(n > 0.0)) throw std::invalid_argument("coefficients must not all vanish");
    InitialCoeffs out;
    out.a = a / n;
    out.b = b / n;
    out.c = c / n;
    out.degenerate = out.a < tie_tol || out.b < tie_tol || out.c < tie_tol ||
                     std::abs(out.a - out.b) < tie_tol || std::abs(out.a - out.c) < tie_tol ||
                     std::abs(out.b - out.c) < tie_tol;
    return out;
}

Ket coeffs_state(const InitialCoeffs& coeffs) {
    Vector amps = Vector::Zero(9);
    amps(0) = coeffs.a;
    amps(4) = coeffs.b;
    amps(8) = coeffs.c;
    return Ket{{3, 3}, amps};
}

const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::asymptotic_decay: return "asymptotic_decay";
        case Terminal::sudden_death: return "sudden_death";
        case Terminal::asymptotic_entangled: return "asymptotic_entangled";
        case Terminal::boundary: return "boundary";
    }
    return "?";
}

// The partial transpose of the decayed state of a|00>+b|11>+c|22> keeps an
// X-like structure: each level pair (x,y) contributes one eigenvalue branch
// p_xy(t) - |z_xy(t)| that can start negative (z_xy is the surviving coherence
// ab, ac or bc; p_xy the population feeding of |xy><xy|). The closed-form
// branches per structure give exact crossing conditions:
//
//   cascade (E):   bc-branch crosses at t = b/c; ab-branch always crosses
//                  (secular population term c^2 t e^{-2t}); ac-branch crosses
//                  iff c > a, else it fades to zero from below.
//   V:             (1,2)-coherence has no feeding population: that branch
//                  fades forever, so entanglement never dies suddenly;
//                  ab-branch crosses iff b > a, ac-branch iff c > a.
//   Lambda:        {|0>,|1>} is decay-free, z_ab stays constant: ab-branch
//                  crosses iff c^2 > 4ab and otherwise survives entangled;
//                  ac-branch crosses iff c > 2a, bc-branch iff c > 2b.
//
// Sudden death happens iff every branch ends transversally; the final
// crossing is the death and is not itself counted as a sudden change.
RegimeLabel classify_regime(Structure kind, const InitialCoeffs& coeffs, double tol) {
    const double a = coeffs.a, b = coeffs.b, c = coeffs.c;
    RegimeLabel out;
    if (coeffs.degenerate) {
        out.terminal = Terminal::boundary;
        return out;
    }
    switch (kind) {
        case Structure::E: {
            if (std::abs(c - a) < tol) {
                out.sudden_changes = 2;
                out.terminal = Terminal::boundary;
                return out;
            }
            out.sudden_changes = 2;
            out.terminal = c > a ? Terminal::sudden_death : Terminal::asymptotic_decay;
            return out;
        }
        case Structure::V: {
            if (std::abs(b - a) < tol || std::abs(c - a) < tol) {
                out.terminal = Terminal::boundary;
                return out;
            }
            out.sudden_changes = (b > a ? 1 : 0) + (c > a ? 1 : 0);
            out.terminal = Terminal::asymptotic_decay;
            return out;
        }
        case Structure::Lambda: {
            const double d1 = c - 2.0 * a;
            const double d2 = c - 2.0 * b;
            const double d3 = c * c - 4.0 * a * b;
            if (std::abs(d1) < tol || std::abs(d2) < tol || std::abs(d3) < tol) {
                out.terminal = Terminal::boundary;
                return out;
            }
            const int crossings = (d1 > 0 ? 1 : 0) + (d2 > 0 ? 1 : 0) + (d3 > 0 ? 1 : 0);
            const bool death = d1 > 0 && d2 > 0;
            out.sudden_changes = crossings - (death ? 1 : 0);
            out.terminal = death ? Terminal::sudden_death
                                 : (d3 < 0 ? Terminal::asymptotic_entangled
                                           : Terminal::asymptotic_decay);
            return out;
        }
    }
    throw std::logic_error("unknown structure");
}

namespace {

struct Track {
    double last = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double prev_dt = 0.0;
    bool alive = true;

    // Linear extrapolation of the branch to the next sample time. A branch
    // heading steeply through zero predicts past zero, so it cannot capture a
    // shallower neighbor's continuation in the matching below.
    double predicted(double dt) const {
        return std::isnan(prev) ? last : last + (last - prev) / prev_dt * dt;
    }
};

} // namespace

SuddenChangeReport detect_sudden_changes(const std::vector<std::vector<double>>& spectra,
                                         const std::vector<double>& times, double gamma,
                                         double eps_zero, double rate_threshold,
                                         double entangled_floor) {
    if (spectra.size() != times.size())
        throw std::invalid_argument("spectra and times must have equal length");
    if (times.size() < 2) throw std::invalid_argument("need at least two samples");

    SuddenChangeReport rep;
    std::vector<Track> tracks;
    std::vector<double> death_candidates;

    auto end_track = [&](const Track& tr, double t_prev, double dt) {
        BranchEnd end;
        // Both stored values are negative; the branch shrank in magnitude.
        const bool have_prev = !std::isnan(tr.prev);
        double rate = 0.0;
        if (have_prev && tr.last < 0.0 && tr.prev < 0.0)
            rate = std::log(tr.prev / tr.last) / dt;
        end.log_rate = rate;
        end.transversal = have_prev && rate > rate_threshold * gamma;
        if (end.transversal) {
            const double slope = (tr.last - tr.prev) / dt; // > 0, rising to zero
            end.time = slope > 0.0 ? t_prev + (-tr.last) / slope : t_prev + dt;
            end.time = std::min(end.time, t_prev + dt);
        } else {
            end.time = t_prev + dt;
        }
        rep.endings.push_back(end);
    };

    for (size_t i = 0; i < spectra.size(); ++i) {
        const std::vector<double>& vals = spectra[i];
        for (double v : vals)
            if (v > -eps_zero)
                throw std::invalid_argument("spectra must contain only negative eigenvalues");

        if (i == 0) {
            for (double v : vals) tracks.push_back(Track{v, std::numeric_limits<double>::quiet_NaN(), true});
            continue;
        }
        const double dt = times[i] - times[i - 1];
        if (!(dt > 0.0)) throw std::invalid_argument("times must be strictly increasing");

        // Greedy nearest matching between current eigenvalues and the
        // still-alive tracks' extrapolated values (branch counts are small).
        std::vector<int> alive_idx;
        for (size_t k = 0; k < tracks.size(); ++k)
            if (tracks[k].alive) alive_idx.push_back(static_cast<int>(k));
        std::vector<bool> val_used(vals.size(), false), trk_used(alive_idx.size(), false);
        const size_t n_pairs = std::min(vals.size(), alive_idx.size());
        for (size_t pair = 0; pair < n_pairs; ++pair) {
            double best = std::numeric_limits<double>::infinity();
            int bv = -1, bt = -1;
            for (size_t v = 0; v < vals.size(); ++v) {
                if (val_used[v]) continue;
                for (size_t t = 0; t < alive_idx.size(); ++t) {
                    if (trk_used[t]) continue;
                    const double d = std::abs(vals[v] - tracks[alive_idx[t]].predicted(dt));
                    if (d < best) {
                        best = d;
                        bv = static_cast<int>(v);
                        bt = static_cast<int>(t);
                    }
                }
            }
            val_used[bv] = true;
            trk_used[bt] = true;
            Track& tr = tracks[alive_idx[bt]];
            tr.prev = tr.last;
            tr.prev_dt = dt;
            tr.last = vals[bv];
        }
        for (size_t t = 0; t < alive_idx.size(); ++t)
            if (!trk_used[t]) {
                tracks[alive_idx[t]].alive = false;
                end_track(tracks[alive_idx[t]], times[i - 1], dt);
            }
        for (size_t v = 0; v < vals.size(); ++v)
            if (!val_used[v])
                tracks.push_back(Track{vals[v], std::numeric_limits<double>::quiet_NaN(), true});
    }

    for (const auto& tr : tracks)
        if (tr.alive) ++rep.surviving_branches;
    for (double v : spectra.back()) rep.final_negativity += -2.0 * v;

    std::sort(rep.endings.begin(), rep.endings.end(),
              [](const BranchEnd& x, const BranchEnd& y) { return x.time < y.time; });

    if (rep.surviving_branches > 0) {
        rep.terminal = rep.final_negativity > entangled_floor ? Terminal::asymptotic_entangled
                                                              : Terminal::asymptotic_decay;
        for (const auto& e : rep.endings)
            if (e.transversal) rep.change_times.push_back(e.time);
    } else if (!rep.endings.empty() &&
               std::all_of(rep.endings.begin(), rep.endings.end(),
                           [](const BranchEnd& e) { return e.transversal; })) {
        rep.terminal = Terminal::sudden_death;
        rep.death_time = rep.endings.back().time;
        for (size_t k = 0; k + 1 < rep.endings.size(); ++k)
            rep.change_times.push_back(rep.endings[k].time);
    } else {
        rep.terminal = Terminal::asymptotic_decay;
        for (const auto& e : rep.endings)
            if (e.transversal) rep.change_times.push_back(e.time);
    }
    rep.sudden_changes = static_cast<int>(rep.change_times.size());
    return rep;
}

std::vector<std::vector<double>> pt_spectra_series(const MasterSeries& series,
                                                   const std::vector<int>& part,
                                                   double eps_zero) {
    std::vector<std::vector<double>> out;
    out.reserve(series.states.size());
    for (const auto& st : series.states) out.push_back(pt_negative_spectrum(st, part, eps_zero));
    return out;
}

double nojump_negativity_ev(const InitialCoeffs& k, double kappa, double t) {
    const double e1 = std::exp(-kappa * t);
    const double e2 = e1 * e1;
    const double num = 2.0 * (k.a * k.b * e1 + k.a * k.c * e1 + k.b * k.c * e2);
    const double den = k.a * k.a + (k.b * k.b + k.c * k.c) * e2;
    return num / den;
}

double nojump_negativity_lambda(const InitialCoeffs& k, double kappa, double t) {
    const double e1 = std::exp(-kappa * t);
    const double e2 = e1 * e1;
    const double num = 2.0 * (k.a * k.b + (k.a + k.b) * k.c * e1);
    const double den = 1.0 + k.c * k.c * (e2 - 1.0);
    return num / den;
}

double lambda_asymptote(const InitialCoeffs& k) {
    return 2.0 * k.a * k.b / (k.a * k.a + k.b * k.b);
}

TransientReport nojump_transient_check(Structure kind, const InitialCoeffs& coeffs, double gamma,
                                       double t_max, int n_grid) {
    if (n_grid < 2) throw std::invalid_argument("n_grid must be at least 2");
    TransientReport rep;
    auto curve = [&](double t) {
        return kind == Structure::Lambda ? nojump_negativity_lambda(coeffs, 2.0 * gamma, t)
                                         : nojump_negativity_ev(coeffs, gamma, t);
    };
    rep.initial_negativity = curve(0.0);
    rep.max_negativity = -1.0;
    for (int i = 0; i < n_grid; ++i) {
        const double t = t_max * static_cast<double>(i) / (n_grid - 1);
        const double v = curve(t);
        if (v > rep.max_negativity) {
            rep.max_negativity = v;
            rep.t_of_max = t;
        }
    }
    rep.increases = rep.max_negativity > rep.initial_negativity + 1e-12;
    return rep;
}

} // namespace qec3
