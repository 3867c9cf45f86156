#include "qec3/trajectories.hpp"

#include "qec3/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

namespace qec3 {

namespace {

constexpr double kJumpProbWarn = 0.1;   // per-step click probability guard
constexpr double kNormJumpWarn = 0.2;   // diffusive pre-renormalization drift guard

long checked_steps(double span, double dt, const char* what) {
    const double raw = span / dt;
    if (raw > 5e8) throw std::invalid_argument(std::string(what) + ": too many steps");
    return std::lround(raw);
}

// Unitary 3x3 from a Hermitian generator's eigensystem: V exp(-i s d) V^dag.
struct HermExp {
    Eigen::Matrix3cd vecs;
    Eigen::Vector3d vals;

    explicit HermExp(const Matrix& h) {
        const Eigen::Matrix3cd h3 = h;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h3);
        vecs = es.eigenvectors();
        vals = es.eigenvalues();
    }
    Eigen::Matrix3cd unitary(double scale) const {
        Eigen::Vector3cd ph;
        for (int i = 0; i < 3; ++i) ph(i) = std::exp(cplx(0.0, -scale * vals(i)));
        return vecs * ph.asDiagonal() * vecs.adjoint();
    }
};

// In-place application of a 3x3 matrix to one qutrit of a flat ket.
void apply_site(Vector& psi, const std::vector<int>& dims, int site, const Eigen::Matrix3cd& u) {
    const int n = static_cast<int>(dims.size());
    int stride = 1;
    for (int s = site + 1; s < n; ++s) stride *= dims[s];
    int outer = 1;
    for (int s = 0; s < site; ++s) outer *= dims[s];
    const int d_site = dims[site];
    const int block = stride * d_site;
    Eigen::Vector3cd v, w;
    for (int o = 0; o < outer; ++o)
        for (int i = 0; i < stride; ++i) {
            const int base = o * block + i;
            for (int a = 0; a < d_site; ++a) v(a) = psi(base + a * stride);
            w.noalias() = u * v;
            for (int a = 0; a < d_site; ++a) psi(base + a * stride) = w(a);
        }
}

Matrix embed3(const Eigen::Matrix3cd& u, const std::vector<int>& dims, int site) {
    return embed_site_op(Matrix(u), site, dims).mat;
}

struct Precomp {
    std::vector<int> dims;
    int dim = 0;
    int n_sites = 0;
    std::vector<Matrix> L, Ld, LdL; // embedded channel operators
    std::vector<int> site_of;
    Matrix G;                        // sum of L^dag L
    Matrix pc_full;                  // codespace projector over all sites
    bool have_code = false;

    Precomp(const std::vector<int>& dims_, const ChannelSet& cs, const std::optional<CodeSpec>& code) {
        dims = dims_;
        dim = total_dim(dims);
        n_sites = static_cast<int>(dims.size());
        if (cs.n_sites != n_sites)
            throw std::invalid_argument("channel set covers " + std::to_string(cs.n_sites) +
                                        " site(s) but the state has " + std::to_string(n_sites));
        G = Matrix::Zero(dim, dim);
        for (const auto& ch : cs.channels) {
            Matrix l = (ch.op.mat.rows() == dim) ? ch.op.mat
                                                 : embed_site_op(ch.op.mat, ch.site, dims).mat;
            if (l.rows() != dim) throw std::invalid_argument("channel operator dimension mismatch");
            L.push_back(l);
            Ld.push_back(l.adjoint());
            LdL.push_back(Ld.back() * l);
            G += LdL.back();
            site_of.push_back(ch.site);
        }
        if (code) {
            have_code = true;
            pc_full = Matrix::Identity(1, 1);
            for (int s = 0; s < n_sites; ++s) {
                Matrix next(pc_full.rows() * 3, pc_full.cols() * 3);
                for (int r = 0; r < pc_full.rows(); ++r)
                    for (int c = 0; c < pc_full.cols(); ++c)
                        next.block(r * 3, c * 3, 3, 3) = pc_full(r, c) * code->codespace_projector.mat;
                pc_full = std::move(next);
            }
        }
    }
};

struct Recorder {
    const Vector* psi0;
    const std::vector<int>* dims;
    const std::vector<int>* part;
    const Precomp* pre;
    const SimParams* p;
    TrajectoryRecord* out;

    void sample(double t, const Vector* psi, const Matrix* rho) {
        Matrix dm;
        const Matrix* r = rho;
        if (psi) {
            dm.noalias() = (*psi) * psi->adjoint();
            r = &dm;
        }
        DensityMatrix full{*dims, *r};
        auto spectrum = pt_negative_spectrum(full, *part);
        double neg = 0.0;
        for (double v : spectrum) neg += -2.0 * v;
        out->times.push_back(t);
        out->negativity.push_back(neg);
        out->pt_spectra.push_back(std::move(spectrum));
        const double fid = psi ? std::norm(psi0->dot(*psi)) : std::real(psi0->dot((*r) * (*psi0)));
        out->fidelity_to_initial.push_back(fid);
        double cp = -1.0;
        if (pre->have_code)
            cp = psi ? std::real(psi->dot(pre->pc_full * (*psi)))
                     : std::real((pre->pc_full * (*r)).trace());
        out->codespace_population.push_back(cp);
        if (p->record_states) out->sampled_states.push_back(*r);
    }

    double negativity_now(const Vector* psi, const Matrix* rho) const {
        Matrix dm;
        const Matrix* r = rho;
        if (psi) {
            dm.noalias() = (*psi) * psi->adjoint();
            r = &dm;
        }
        return negativity(DensityMatrix{*dims, *r}, *part);
    }
};

void check_bipartition(const std::vector<int>& part, int n_sites) {
    if (part.empty()) throw std::invalid_argument("bipartition must name at least one site");
    for (size_t i = 0; i < part.size(); ++i) {
        if (part[i] < 0 || part[i] >= n_sites)
            throw std::invalid_argument("bipartition site out of range");
        if (i > 0 && part[i] <= part[i - 1])
            throw std::invalid_argument("bipartition sites must be strictly increasing");
    }
}

void finish_warnings(TrajectoryRecord& rec, long big_p_steps, double max_p, long norm_steps,
                     double max_norm_jump) {
    char buf[160];
    if (big_p_steps > 0) {
        std::snprintf(buf, sizeof buf,
                      "click probability exceeded %.2g in %ld step(s), max %.3g; reduce dt",
                      kJumpProbWarn, big_p_steps, max_p);
        rec.warnings.emplace_back(buf);
    }
    if (norm_steps > 0) {
        std::snprintf(buf, sizeof buf,
                      "pre-renormalization norm moved by more than %.0f%% in %ld step(s) (max %.3g)",
                      kNormJumpWarn * 100, norm_steps, max_norm_jump);
        rec.warnings.emplace_back(buf);
    }
}

} // namespace

long SimParams::n_steps() const { return checked_steps(t_max, dt, "t_max"); }
long SimParams::tau_steps() const { return checked_steps(tau, dt, "tau"); }

void SimParams::validate(bool feedback_active) const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    if (n_steps() < 1) throw std::invalid_argument("t_max shorter than one step");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
    if (tau < 0.0) throw std::invalid_argument("tau must be non-negative");
    if (delta_var < 0.0) throw std::invalid_argument("delta_var must be non-negative");
    if (record_stride < 1) throw std::invalid_argument("record_stride must be at least 1");
    (void)feedback_active;
}

MasterSeries master_evolve(const DensityMatrix& rho0, const ChannelSet& cs,
                           const std::optional<Operator>& hamiltonian, const SimParams& p) {
    p.validate(false);
    Precomp pre(rho0.dims, cs, std::nullopt);
    const int d = pre.dim;
    Matrix h;
    const bool have_h = hamiltonian.has_value();
    if (have_h) {
        h = hamiltonian->mat;
        if (h.rows() != d) throw std::invalid_argument("hamiltonian dimension mismatch");
    }

    Matrix rho = rho0.mat;
    Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d), t1(d, d), t2(d, d);

    auto rhs = [&](const Matrix& r, Matrix& out) {
        out.setZero();
        if (have_h) {
            t1.noalias() = h * r;
            out += cplx(0.0, -1.0) * t1;
            out += cplx(0.0, 1.0) * t1.adjoint();
        }
        for (size_t k = 0; k < pre.L.size(); ++k) {
            t2.noalias() = pre.L[k] * r;
            out.noalias() += t2 * pre.Ld[k];
        }
        t1.noalias() = pre.G * r;
        out -= 0.5 * t1;
        out -= 0.5 * t1.adjoint();
    };

    const long n = p.n_steps();
    MasterSeries series;
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    auto sample = [&](long step) {
        const double t = step * p.dt;
        const double tr_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
        if (tr_err > 1e-9 * (1.0 + t))
            throw NumericalError("master propagation lost trace normalization at t=" +
                                 std::to_string(t));
        t1 = 0.5 * (rho + Matrix(rho.adjoint()));
        es.compute(t1, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-6)
            throw NumericalError("master propagation lost positivity at t=" + std::to_string(t));
        series.times.push_back(t);
        series.states.push_back(DensityMatrix{rho0.dims, t1});
    };

    for (long step = 0; step < n; ++step) {
        if (step % p.record_stride == 0) sample(step);
        rhs(rho, k1);
        tmp = rho + (0.5 * p.dt) * k1;
        rhs(tmp, k2);
        tmp = rho + (0.5 * p.dt) * k2;
        rhs(tmp, k3);
        tmp = rho + p.dt * k3;
        rhs(tmp, k4);
        rho += (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sample(n);
    return series;
}

Ket no_jump_propagate(const Ket& psi0, const ChannelSet& cs, double t) {
    if (t < 0.0) throw std::invalid_argument("propagation time must be non-negative");
    Precomp pre(psi0.dims, cs, std::nullopt);
    Eigen::SelfAdjointEigenSolver<Matrix> es(pre.G);
    Vector scaled = es.eigenvectors().adjoint() * psi0.amps;
    for (int i = 0; i < scaled.size(); ++i)
        scaled(i) *= std::exp(-0.5 * t * es.eigenvalues()(i));
    Vector psi = es.eigenvectors() * scaled;
    const double nrm = psi.norm();
    if (nrm < 1e-150) throw NumericalError("no-click state norm underflowed");
    return Ket{psi0.dims, psi / nrm};
}

namespace {

struct PendingFeedback {
    long apply_step;
    int channel;
    int site;
    double delta;
};

TrajectoryRecord run_jump(const Ket& psi0, const ChannelSet& cs,
                          const std::optional<CodeSpec>& code, const SimParams& p,
                          std::uint32_t traj) {
    p.validate(code.has_value());
    check_bipartition(p.bipartition, static_cast<int>(psi0.dims.size()));
    Precomp pre(psi0.dims, cs, code);
    const int d = pre.dim;
    const bool pure = (p.eta == 1.0);
    const long n = p.n_steps();
    const long tau_steps = p.tau_steps();
    const double sqrt_dvar = std::sqrt(p.delta_var);

    CounterRng rng(p.seed, traj);
    TrajectoryRecord rec;
    Recorder recorder{&psi0.amps, &psi0.dims, &p.bipartition, &pre, &p, &rec};

    // Exact smooth no-click propagator for the pure path; the mixed path uses
    // the first-order conditional update so inefficiency enters linearly.
    Matrix K;
    if (pure) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(pre.G);
        Vector decay(d);
        for (int i = 0; i < d; ++i) decay(i) = std::exp(-0.5 * p.dt * es.eigenvalues()(i));
        K = es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().adjoint();
    }

    std::optional<HermExp> fexp;
    double lambda_mag = 0.0;
    if (code) {
        fexp.emplace(code->feedback_generator.mat);
        lambda_mag = code->lambda_mag;
        if (lambda_mag <= 0.0) lambda_mag = 1.0; // disorder expressed as absolute shift
    }

    Vector psi = pure ? psi0.amps : Vector();
    Matrix rho, t1, t2;
    if (!pure) {
        rho.noalias() = psi0.amps * psi0.amps.adjoint();
        t1.resize(d, d);
        t2.resize(d, d);
    }

    std::deque<PendingFeedback> queue;
    std::vector<size_t> fired_events;
    long big_p_steps = 0;
    double max_p = 0.0;
    const size_t nch = pre.L.size();
    std::vector<double> pclick(nch);

    for (long step = 0; step < n; ++step) {
        if (step % p.record_stride == 0)
            recorder.sample(step * p.dt, pure ? &psi : nullptr, pure ? nullptr : &rho);

        // Click probabilities for this step.
        for (size_t k = 0; k < nch; ++k) {
            double ex;
            if (pure)
                ex = std::real(psi.dot(pre.LdL[k] * psi));
            else
                ex = std::real((pre.LdL[k] * rho).trace());
            pclick[k] = p.eta * std::max(0.0, ex) * p.dt;
            if (pclick[k] > kJumpProbWarn) {
                ++big_p_steps;
                max_p = std::max(max_p, pclick[k]);
            }
        }

        fired_events.clear();
        bool any_click = false;
        for (size_t k = 0; k < nch; ++k) {
            if (rng.uniform(static_cast<std::uint64_t>(step), static_cast<std::uint32_t>(k), 0) >=
                pclick[k])
                continue;
            any_click = true;
            TrajectoryEvent ev;
            ev.time = (step + 1) * p.dt;
            ev.channel = static_cast<int>(k);
            ev.site = pre.site_of[k];
            ev.kind = EventKind::jump;
            if (p.record_event_negativity)
                ev.negativity_before = recorder.negativity_now(pure ? &psi : nullptr,
                                                               pure ? nullptr : &rho);
            if (pure) {
                psi = pre.L[k] * psi;
                const double nrm = psi.norm();
                if (nrm < 1e-150) throw NumericalError("click projected the state to zero");
                psi /= nrm;
            } else {
                t1.noalias() = pre.L[k] * rho;
                t2.noalias() = t1 * pre.Ld[k];
                const double tr = t2.trace().real();
                if (tr < 1e-300) throw NumericalError("click projected the state to zero");
                rho = t2 / tr;
            }
            if (p.record_event_negativity)
                ev.negativity_after = recorder.negativity_now(pure ? &psi : nullptr,
                                                              pure ? nullptr : &rho);
            rec.events.push_back(ev);
            if (code) {
                double delta = 0.0;
                if (p.delta_var > 0.0)
                    delta = sqrt_dvar * rng.normal(static_cast<std::uint64_t>(step),
                                                   static_cast<std::uint32_t>(k), 1);
                queue.push_back(PendingFeedback{step + tau_steps, static_cast<int>(k),
                                                pre.site_of[k], delta});
            }
            if (tau_steps == 0) fired_events.push_back(rec.events.size() - 1);
        }

        if (!any_click) {
            if (pure) {
                psi = K * psi;
                const double nrm = psi.norm();
                if (nrm < 1e-150) throw NumericalError("no-click state norm underflowed");
                psi /= nrm;
            } else {
                // rho += dt * (sum_k (1-eta) L rho L^dag - (1/2){G, rho}), renormalized.
                t1.noalias() = pre.G * rho;
                Matrix upd = -0.5 * (t1 + Matrix(t1.adjoint()));
                if (p.eta < 1.0)
                    for (size_t k = 0; k < nch; ++k) {
                        t1.noalias() = pre.L[k] * rho;
                        upd.noalias() += (1.0 - p.eta) * (t1 * pre.Ld[k]);
                    }
                rho += p.dt * upd;
                t1 = rho.adjoint();
                rho = 0.5 * (rho + t1);
                rho /= rho.trace().real();
            }
        }

        // Delayed recycling pulses due this step.
        while (!queue.empty() && queue.front().apply_step <= step) {
            const PendingFeedback fb = queue.front();
            queue.pop_front();
            TrajectoryEvent ev;
            ev.time = (step + 1) * p.dt;
            ev.channel = fb.channel;
            ev.site = fb.site;
            ev.kind = EventKind::feedback;
            ev.delta = fb.delta;
            if (p.record_event_negativity)
                ev.negativity_before = recorder.negativity_now(pure ? &psi : nullptr,
                                                               pure ? nullptr : &rho);
            const double scale = 1.0 + fb.delta / lambda_mag;
            const Eigen::Matrix3cd u = fexp->unitary(scale);
            if (pure) {
                apply_site(psi, psi0.dims, fb.site, u);
            } else {
                const Matrix uf = embed3(u, psi0.dims, fb.site);
                t1.noalias() = uf * rho;
                rho.noalias() = t1 * uf.adjoint();
            }
            if (p.record_event_negativity)
                ev.negativity_after = recorder.negativity_now(pure ? &psi : nullptr,
                                                              pure ? nullptr : &rho);
            rec.events.push_back(ev);
        }

        // With no delay the recycling pulse belongs to the detection itself:
        // report the click's post-event negativity after the pulse.
        if (!fired_events.empty() && p.record_event_negativity) {
            const double now = recorder.negativity_now(pure ? &psi : nullptr,
                                                       pure ? nullptr : &rho);
            for (size_t idx : fired_events) rec.events[idx].negativity_after = now;
        }
    }

    recorder.sample(n * p.dt, pure ? &psi : nullptr, pure ? nullptr : &rho);
    if (pure)
        rec.final_state = DensityMatrix{psi0.dims, Matrix(psi * psi.adjoint())};
    else
        rec.final_state = DensityMatrix{psi0.dims, rho};
    finish_warnings(rec, big_p_steps, max_p, 0, 0.0);
    return rec;
}

TrajectoryRecord run_diffusion(const Ket& psi0, const ChannelSet& cs,
                               const std::optional<CodeSpec>& code, const SimParams& p,
                               std::uint32_t traj) {
    p.validate(code.has_value());
    check_bipartition(p.bipartition, static_cast<int>(psi0.dims.size()));
    Precomp pre(psi0.dims, cs, code);
    const int d = pre.dim;
    const int n_sites = pre.n_sites;
    const bool pure = (p.eta == 1.0);
    const long n = p.n_steps();
    const long tau_steps = p.tau_steps();
    const double sqrt_dt = std::sqrt(p.dt);
    const double sqrt_eta = std::sqrt(p.eta);
    const size_t nch = pre.L.size();

    CounterRng rng(p.seed, traj);
    TrajectoryRecord rec;
    Recorder recorder{&psi0.amps, &psi0.dims, &p.bipartition, &pre, &p, &rec};

    std::optional<HermExp> fexp;
    Eigen::Matrix3cd drive3 = Eigen::Matrix3cd::Identity();
    if (code) {
        fexp.emplace(code->feedback_generator.mat);
        if (code->drive) drive3 = HermExp(code->drive->mat).unitary(p.dt);
    }

    Vector psi = pure ? psi0.amps : Vector();
    Matrix rho, t1, upd;
    if (!pure) {
        rho.noalias() = psi0.amps * psi0.amps.adjoint();
        t1.resize(d, d);
        upd.resize(d, d);
    }

    const long ring = tau_steps + 1;
    std::vector<std::vector<double>> dq_buf(nch, std::vector<double>(ring, 0.0));
    if (p.record_dq) rec.dq_records.assign(nch, {});
    std::vector<double> dq_now(nch), q_fb(nch);
    std::vector<Eigen::Matrix3cd> site_u(n_sites);

    long norm_steps = 0;
    double max_norm_jump = 0.0;

    for (long step = 0; step < n; ++step) {
        if (step % p.record_stride == 0)
            recorder.sample(step * p.dt, pure ? &psi : nullptr, pure ? nullptr : &rho);

        for (size_t k = 0; k < nch; ++k) {
            double m;
            if (pure)
                m = 2.0 * std::real(psi.dot(pre.L[k] * psi));
            else
                m = std::real(((pre.L[k] + pre.Ld[k]) * rho).trace());
            const double dw = sqrt_dt * rng.normal(static_cast<std::uint64_t>(step),
                                                   static_cast<std::uint32_t>(k), 0);
            dq_now[k] = p.eta * m * p.dt + sqrt_eta * dw;
            dq_buf[k][step % ring] = dq_now[k];
            if (p.record_dq) rec.dq_records[k].push_back(dq_now[k]);
        }

        double norm_jump;
        if (pure) {
            Vector dpsi = (-0.5 * p.dt) * (pre.G * psi);
            for (size_t k = 0; k < nch; ++k) dpsi.noalias() += dq_now[k] * (pre.L[k] * psi);
            psi += dpsi;
            const double nrm = psi.norm();
            norm_jump = std::abs(nrm * nrm - 1.0);
            if (nrm < 1e-150) throw NumericalError("diffusive state norm underflowed");
            psi /= nrm;
        } else {
            t1.noalias() = pre.G * rho;
            upd = (-0.5 * p.dt) * (t1 + Matrix(t1.adjoint()));
            for (size_t k = 0; k < nch; ++k) {
                t1.noalias() = pre.L[k] * rho;
                upd.noalias() += p.dt * (t1 * pre.Ld[k]);
                upd += dq_now[k] * (t1 + Matrix(t1.adjoint()));
            }
            rho += upd;
            t1 = rho.adjoint();
            rho = 0.5 * (rho + t1);
            const double tr = rho.trace().real();
            norm_jump = std::abs(tr - 1.0);
            if (tr < 1e-300) throw NumericalError("diffusive state trace underflowed");
            rho /= tr;
        }
        if (norm_jump > kNormJumpWarn) {
            ++norm_steps;
            max_norm_jump = std::max(max_norm_jump, norm_jump);
        }

        if (code) {
            for (int s = 0; s < n_sites; ++s) site_u[s] = drive3;
            if (step >= tau_steps) {
                const long slot = (step - tau_steps) % ring;
                for (size_t k = 0; k < nch; ++k) {
                    q_fb[k] = dq_buf[k][slot];
                    site_u[pre.site_of[k]] =
                        fexp->unitary(q_fb[k] / p.eta) * site_u[pre.site_of[k]];
                }
            }
            if (pure) {
                for (int s = 0; s < n_sites; ++s) apply_site(psi, psi0.dims, s, site_u[s]);
            } else {
                Matrix ufull = embed3(site_u[0], psi0.dims, 0);
                for (int s = 1; s < n_sites; ++s)
                    ufull = Matrix(embed3(site_u[s], psi0.dims, s) * ufull);
                t1.noalias() = ufull * rho;
                rho.noalias() = t1 * ufull.adjoint();
            }
        }
    }

    recorder.sample(n * p.dt, pure ? &psi : nullptr, pure ? nullptr : &rho);
    if (pure)
        rec.final_state = DensityMatrix{psi0.dims, Matrix(psi * psi.adjoint())};
    else
        rec.final_state = DensityMatrix{psi0.dims, rho};
    finish_warnings(rec, 0, 0.0, norm_steps, max_norm_jump);
    return rec;
}

} // namespace

TrajectoryRecord jump_trajectory(const Ket& psi0, const ChannelSet& cs,
                                 const std::optional<CodeSpec>& code, const SimParams& p,
                                 std::uint32_t trajectory_index) {
    return run_jump(psi0, cs, code, p, trajectory_index);
}

TrajectoryRecord diffusion_trajectory(const Ket& psi0, const ChannelSet& cs,
                                      const std::optional<CodeSpec>& code, const SimParams& p,
                                      std::uint32_t trajectory_index) {
    return run_diffusion(psi0, cs, code, p, trajectory_index);
}

namespace {

struct TrajOut {
    std::vector<double> neg, fid, cp;
    std::vector<Matrix> states;
    TrajectorySummary summary;
};

TrajOut reduce_record(const TrajectoryRecord& rec, bool keep_states) {
    TrajOut out;
    out.neg = rec.negativity;
    out.fid = rec.fidelity_to_initial;
    out.cp = rec.codespace_population;
    if (keep_states) out.states = rec.sampled_states;
    TrajectorySummary& s = out.summary;
    for (const auto& ev : rec.events) {
        if (ev.kind == EventKind::jump)
            ++s.n_jumps;
        else
            ++s.n_feedbacks;
    }
    s.final_fidelity = rec.fidelity_to_initial.empty() ? 0.0 : rec.fidelity_to_initial.back();
    double acc = 0.0, mn = std::numeric_limits<double>::infinity();
    for (double v : rec.negativity) {
        acc += v;
        mn = std::min(mn, v);
    }
    s.time_avg_negativity = rec.negativity.empty() ? 0.0 : acc / rec.negativity.size();
    s.min_negativity = rec.negativity.empty() ? 0.0 : mn;
    s.worst_event_leap = std::numeric_limits<double>::infinity();
    for (const auto& ev : rec.events)
        if (ev.kind == EventKind::jump && ev.negativity_before >= 0.0 &&
            ev.negativity_after >= 0.0)
            s.worst_event_leap =
                std::min(s.worst_event_leap, ev.negativity_after - ev.negativity_before);
    s.n_warnings = static_cast<int>(rec.warnings.size());
    return out;
}

} // namespace

EnsembleResult ensemble_run(const EnsembleConfig& cfg, int n_traj) {
    if (n_traj < 1) throw std::invalid_argument("n_traj must be positive");
    SimParams p = cfg.params;
    p.record_dq = false;
    p.record_states = cfg.keep_mean_state;

    auto run_one = [&](std::uint32_t idx) {
        TrajectoryRecord rec =
            cfg.unraveling == EnsembleConfig::Unraveling::jump
                ? run_jump(cfg.psi0, cfg.channels, cfg.code, p, idx)
                : run_diffusion(cfg.psi0, cfg.channels, cfg.code, p, idx);
        return reduce_record(rec, cfg.keep_mean_state);
    };

    unsigned n_threads = cfg.n_threads ? cfg.n_threads : std::thread::hardware_concurrency();
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_traj));

    EnsembleResult res;
    res.n_traj = n_traj;
    // In-loop samples land on multiples of the stride below n_steps; one more
    // is always taken at the final step.
    const size_t n_samp = static_cast<size_t>((p.n_steps() - 1) / p.record_stride) + 2;
    const int d = total_dim(cfg.psi0.dims);
    std::vector<double> sum_n(n_samp, 0.0), sum_n2(n_samp, 0.0), sum_f(n_samp, 0.0),
        sum_f2(n_samp, 0.0), sum_c(n_samp, 0.0);
    std::vector<Matrix> sum_state;
    std::vector<Eigen::MatrixXd> sum_state2;
    if (cfg.keep_mean_state) {
        sum_state.assign(n_samp, Matrix::Zero(d, d));
        sum_state2.assign(n_samp, Eigen::MatrixXd::Zero(d, d));
    }
    res.per_traj.reserve(n_traj);

    auto reduce_one = [&](const TrajOut& t) {
        for (size_t i = 0; i < n_samp; ++i) {
            sum_n[i] += t.neg[i];
            sum_n2[i] += t.neg[i] * t.neg[i];
            sum_f[i] += t.fid[i];
            sum_f2[i] += t.fid[i] * t.fid[i];
            sum_c[i] += t.cp[i];
        }
        if (cfg.keep_mean_state)
            for (size_t i = 0; i < n_samp; ++i) {
                sum_state[i] += t.states[i];
                sum_state2[i] += t.states[i].cwiseAbs2();
            }
        res.per_traj.push_back(t.summary);
        res.total_warnings += t.summary.n_warnings;
    };

    const int block = 64;
    std::vector<std::unique_ptr<TrajOut>> slots(block);
    for (int lo = 0; lo < n_traj; lo += block) {
        const int hi = std::min(n_traj, lo + block);
        if (n_threads == 1) {
            for (int i = lo; i < hi; ++i)
                slots[i - lo] = std::make_unique<TrajOut>(run_one(static_cast<std::uint32_t>(i)));
        } else {
            std::atomic<int> next(lo);
            std::vector<std::thread> pool;
            std::exception_ptr err;
            std::mutex err_mu;
            for (unsigned t = 0; t < n_threads; ++t)
                pool.emplace_back([&] {
                    for (;;) {
                        const int i = next.fetch_add(1);
                        if (i >= hi) return;
                        try {
                            slots[i - lo] =
                                std::make_unique<TrajOut>(run_one(static_cast<std::uint32_t>(i)));
                        } catch (...) {
                            std::lock_guard<std::mutex> lk(err_mu);
                            if (!err) err = std::current_exception();
                            return;
                        }
                    }
                });
            for (auto& th : pool) th.join();
            if (err) std::rethrow_exception(err);
        }
        for (int i = lo; i < hi; ++i) {
            reduce_one(*slots[i - lo]);
            slots[i - lo].reset();
        }
    }

    res.times.resize(n_samp);
    for (size_t i = 0; i < n_samp; ++i)
        res.times[i] = static_cast<double>(i) * p.record_stride * p.dt;
    res.times.back() = p.n_steps() * p.dt; // final sample is taken at the last step

    const double N = n_traj;
    auto finish = [&](const std::vector<double>& s, const std::vector<double>& s2,
                      std::vector<double>& mean, std::vector<double>& se) {
        mean.resize(n_samp);
        se.resize(n_samp);
        for (size_t i = 0; i < n_samp; ++i) {
            mean[i] = s[i] / N;
            double var = 0.0;
            if (n_traj > 1) var = std::max(0.0, (s2[i] - N * mean[i] * mean[i]) / (N - 1.0));
            se[i] = std::sqrt(var / N);
        }
    };
    finish(sum_n, sum_n2, res.mean_negativity, res.stderr_negativity);
    finish(sum_f, sum_f2, res.mean_fidelity, res.stderr_fidelity);
    res.mean_codespace_population.resize(n_samp);
    for (size_t i = 0; i < n_samp; ++i) res.mean_codespace_population[i] = sum_c[i] / N;

    if (cfg.keep_mean_state) {
        res.mean_state.resize(n_samp);
        res.mean_state_sigma.resize(n_samp);
        for (size_t i = 0; i < n_samp; ++i) {
            res.mean_state[i] = sum_state[i] / N;
            double var_sum = 0.0;
            if (n_traj > 1) {
                Eigen::MatrixXd var =
                    (sum_state2[i] - N * res.mean_state[i].cwiseAbs2()) / (N - 1.0);
                var_sum = std::max(0.0, var.sum()) / N;
            }
            res.mean_state_sigma[i] = std::sqrt(var_sum);
        }
    }
    return res;
}

} // namespace qec3
