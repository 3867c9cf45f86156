#pragma once

#include "qec3/types.hpp"

#include <string>
#include <vector>

namespace qec3 {

// One collapse operator acting on one site. Rates are absorbed into the
// operator (units of sqrt(rate)).
struct Channel {
    std::string label;
    int site = 0;
    Operator op;
};

enum class Structure { E, V, Lambda };

struct ChannelSet {
    std::vector<Channel> channels;
    // Metadata describing how the set was built.
    double gamma = 1.0;
    double alpha = 0.5; // which-path distinguishability of the two decay steps
    double beta = 1.0;  // upper/lower decay rate ratio
    int n_sites = 1;
};

// Single detector seeing both qutrit decay steps as one click:
// Pi = sqrt(gamma) (sqrt(beta)|1><2| + |0><1|).
ChannelSet ladder_indistinguishable(double gamma, double beta = 1.0);

// Two detectors with tunable which-path information; alpha = 1/2 makes the
// pair dissipation-equivalent to the single indistinguishable channel:
//   Pi2 = sqrt(gamma) (sqrt(alpha)|1><2| + sqrt(1-alpha)|0><1|)
//   Pi1 = sqrt(gamma) (sqrt(1-alpha)|1><2| + sqrt(alpha)|0><1|)
ChannelSet ladder_split(double gamma, double alpha);

// ladder_split generalized with a rate imbalance on the upper step.
ChannelSet ladder_general(double gamma, double alpha, double beta);

// Three-level decay structures on a single qutrit:
//   E:      |2> -> |1> -> |0>   (sqrt(g2)|1><2|, sqrt(g1)|0><1|)
//   V:      |1> -> |0>, |2> -> |0>
//   Lambda: |2> -> |0>, |2> -> |1>
ChannelSet structure_ops(Structure kind, double gamma1, double gamma2);

// Lifts a single-site channel set onto one site of an n-site register.
ChannelSet embed(const ChannelSet& cs, int site, int n_sites);

// Concatenates channel sets on the same register.
ChannelSet merge(const ChannelSet& a, const ChannelSet& b);

// Matrix of the dissipator rho -> sum_k (L rho L^dag - {L^dag L, rho}/2) in
// the column-stacking convention vec(A rho B) = (B^T kron A) vec(rho).
Matrix dissipator_matrix(const std::vector<Operator>& ops);

} // namespace qec3
