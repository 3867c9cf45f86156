#include "qec3/channels.hpp"

#include "qec3/qcore.hpp"

#include <cmath>

namespace qec3 {

namespace {

Matrix ket_bra3(int i, int j) {
    Matrix m = Matrix::Zero(3, 3);
    m(i, j) = 1.0;
    return m;
}

void check_rate(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("channel rate must be positive");
}

} // namespace

ChannelSet ladder_indistinguishable(double gamma, double beta) {
    check_rate(gamma);
    if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
    ChannelSet cs;
    cs.gamma = gamma;
    cs.beta = beta;
    Matrix pi = std::sqrt(gamma) * (std::sqrt(beta) * ket_bra3(1, 2) + ket_bra3(0, 1));
    cs.channels.push_back({"ladder", 0, Operator({3}, std::move(pi))});
    return cs;
}

ChannelSet ladder_split(double gamma, double alpha) {
    return ladder_general(gamma, alpha, 1.0);
}

ChannelSet ladder_general(double gamma, double alpha, double beta) {
    check_rate(gamma);
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");
    if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
    ChannelSet cs;
    cs.gamma = gamma;
    cs.alpha = alpha;
    cs.beta = beta;
    const double rg = std::sqrt(gamma);
    Matrix pi1 = rg * (std::sqrt((1.0 - alpha) * beta) * ket_bra3(1, 2) +
                       std::sqrt(alpha) * ket_bra3(0, 1));
    Matrix pi2 = rg * (std::sqrt(alpha * beta) * ket_bra3(1, 2) +
                       std::sqrt(1.0 - alpha) * ket_bra3(0, 1));
    cs.channels.push_back({"split1", 0, Operator({3}, std::move(pi1))});
    cs.channels.push_back({"split2", 0, Operator({3}, std::move(pi2))});
    return cs;
}

ChannelSet structure_ops(Structure kind, double gamma1, double gamma2) {
    check_rate(gamma1);
    check_rate(gamma2);
    const double r1 = std::sqrt(gamma1);
    const double r2 = std::sqrt(gamma2);
    ChannelSet cs;
    cs.gamma = gamma1;
    switch (kind) {
        case Structure::E:
            cs.channels.push_back({"E1", 0, Operator({3}, r1 * ket_bra3(0, 1))});
            cs.channels.push_back({"E2", 0, Operator({3}, r2 * ket_bra3(1, 2))});
            break;
        case Structure::V:
            cs.channels.push_back({"V1", 0, Operator({3}, r1 * ket_bra3(0, 1))});
            cs.channels.push_back({"V2", 0, Operator({3}, r2 * ket_bra3(0, 2))});
            break;
        case Structure::Lambda:
            cs.channels.push_back({"L1", 0, Operator({3}, r1 * ket_bra3(0, 2))});
            cs.channels.push_back({"L2", 0, Operator({3}, r2 * ket_bra3(1, 2))});
            break;
    }
    return cs;
}

ChannelSet embed(const ChannelSet& cs, int site, int n_sites) {
    if (site < 0 || site >= n_sites) throw std::invalid_argument("embed: site out of range");
    std::vector<int> dims(n_sites, 3);
    ChannelSet out;
    out.gamma = cs.gamma;
    out.alpha = cs.alpha;
    out.beta = cs.beta;
    out.n_sites = n_sites;
    for (const auto& ch : cs.channels) {
        if (ch.op.dims.size() != 1)
            throw std::invalid_argument("embed: expected single-site channels");
        out.channels.push_back(
            {ch.label + "@" + std::to_string(site), site, embed_site_op(ch.op.mat, site, dims)});
    }
    return out;
}

ChannelSet merge(const ChannelSet& a, const ChannelSet& b) {
    if (a.n_sites != b.n_sites) throw std::invalid_argument("merge: register size mismatch");
    ChannelSet out = a;
    out.channels.insert(out.channels.end(), b.channels.begin(), b.channels.end());
    return out;
}

Matrix dissipator_matrix(const std::vector<Operator>& ops) {
    if (ops.empty()) throw std::invalid_argument("dissipator_matrix: no operators");
    const int d = ops.front().dim();
    Matrix out = Matrix::Zero(d * d, d * d);
    const Matrix id = Matrix::Identity(d, d);
    auto kron = [d](const Matrix& a, const Matrix& b) {
        Matrix k(d * d, d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) k.block(i * d, j * d, d, d) = a(i, j) * b;
        return k;
    };
    for (const auto& op : ops) {
        if (op.dim() != d) throw std::invalid_argument("dissipator_matrix: dimension mismatch");
        const Matrix& l = op.mat;
        const Matrix ll = l.adjoint() * l;
        out += kron(l.conjugate(), l);
        out -= 0.5 * kron(id, ll);
        out -= 0.5 * kron(ll.transpose(), id);
    }
    return out;
}

} // namespace qec3
