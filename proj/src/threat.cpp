#include "ghzqkd/threat.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "ghzqkd/ghzcorr.hpp"

namespace ghzqkd::threat {

namespace {

using ghzcorr::third_basis;
using qcore::kAncilla;
using qcore::kP1;
using qcore::kP2;
using qcore::kP3;

constexpr std::array<Outcome, 2> kOutcomes = {Outcome::Plus, Outcome::Minus};
constexpr std::array<Basis, 2> kXY = {Basis::X, Basis::Y};

int bit_of(Outcome o) { return o == Outcome::Plus ? 0 : 1; }

// One measurement branch of a protocol round under a fixed strategy, with its
// exact probability. For the ancilla attack the (unnormalized) probe vector
// rides along; for intercept-resend Eve's classical record does.
struct RoundBranch {
    Basis b1, b2, b3;
    Outcome o1, o2, o3;
    int eve_record = -1;  // encoded (basis, outcome) of Eve's measurement, -1 if none
    std::array<Amplitude, 2> ancilla{};
    bool quantum_eve = false;
    double prob = 0.0;
    bool violated = false;
    int alice_bit = 0, bob_bit = 0;
};

Amplitude project_triplet(const StateVector& s, Basis b1, Outcome o1, Basis b2, Outcome o2,
                          Basis b3, Outcome o3) {
    const StateVector e1 = qcore::eigenstate(b1, o1);
    const StateVector e2 = qcore::eigenstate(b2, o2);
    const StateVector e3 = qcore::eigenstate(b3, o3);
    Amplitude acc(0.0, 0.0);
    for (std::size_t z = 0; z < 8; ++z)
        acc += std::conj(e1.amps[z & 1] * e2.amps[(z >> 1) & 1] * e3.amps[(z >> 2) & 1]) *
               s.amps[z];
    return acc;
}

std::array<Amplitude, 2> project_triplet_with_probe(const StateVector& s, Basis b1, Outcome o1,
                                                    Basis b2, Outcome o2, Basis b3, Outcome o3) {
    const StateVector e1 = qcore::eigenstate(b1, o1);
    const StateVector e2 = qcore::eigenstate(b2, o2);
    const StateVector e3 = qcore::eigenstate(b3, o3);
    std::array<Amplitude, 2> v{Amplitude(0.0, 0.0), Amplitude(0.0, 0.0)};
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t z = 0; z < 8; ++z)
            v[a] += std::conj(e1.amps[z & 1] * e2.amps[(z >> 1) & 1] * e3.amps[(z >> 2) & 1]) *
                    s.amps[z | (a << 3)];
    return v;
}

void finish_branch(RoundBranch& br) {
    br.violated = !ghzcorr::check_consistency(br.b1, br.o1, br.b2, br.o2, br.b3, br.o3);
    br.bob_bit = bit_of(br.o2);
    br.alice_bit = bit_of(ghzcorr::infer_partner_outcome(br.b1, br.o1, br.b3, br.o3, br.b2));
}

std::vector<RoundBranch> enumerate_round_branches(const EveStrategy& strategy) {
    std::vector<RoundBranch> branches;

    auto for_each_basis_pair = [&](auto&& fn) {
        for (Basis b1 : kXY)
            for (Basis b2 : kXY) fn(b1, b2, third_basis(b1, b2), 0.25);
    };

    if (std::holds_alternative<NoEve>(strategy)) {
        const StateVector ghz = qcore::cat_state(3, Outcome::Plus);
        for_each_basis_pair([&](Basis b1, Basis b2, Basis b3, double w) {
            for (Outcome o1 : kOutcomes)
                for (Outcome o2 : kOutcomes)
                    for (Outcome o3 : kOutcomes) {
                        const double p =
                            w * std::norm(project_triplet(ghz, b1, o1, b2, o2, b3, o3));
                        if (p < 1e-30) continue;
                        RoundBranch br{b1, b2, b3, o1, o2, o3};
                        br.prob = p;
                        finish_branch(br);
                        branches.push_back(br);
                    }
        });
    } else if (const auto* ir = std::get_if<InterceptResend>(&strategy)) {
        const StateVector ghz = qcore::cat_state(3, Outcome::Plus);
        for_each_basis_pair([&](Basis b1, Basis b2, Basis b3, double w) {
            for (Basis be : kXY) {
                const double we = (be == Basis::X) ? ir->prob_x : 1.0 - ir->prob_x;
                if (we < 1e-30) continue;
                for (Outcome oe : kOutcomes) {
                    const StateVector ee = qcore::eigenstate(be, oe);
                    // Unnormalized P1/P3 state after Eve's projection of P2.
                    std::array<Amplitude, 4> p13{};
                    for (std::size_t z1 = 0; z1 < 2; ++z1)
                        for (std::size_t z3 = 0; z3 < 2; ++z3)
                            for (std::size_t z2 = 0; z2 < 2; ++z2)
                                p13[z1 | (z3 << 1)] +=
                                    std::conj(ee.amps[z2]) * ghz.amps[z1 | (z2 << 1) | (z3 << 2)];
                    for (Outcome o1 : kOutcomes)
                        for (Outcome o3 : kOutcomes) {
                            const StateVector e1 = qcore::eigenstate(b1, o1);
                            const StateVector e3 = qcore::eigenstate(b3, o3);
                            Amplitude a13(0.0, 0.0);
                            for (std::size_t z1 = 0; z1 < 2; ++z1)
                                for (std::size_t z3 = 0; z3 < 2; ++z3)
                                    a13 += std::conj(e1.amps[z1] * e3.amps[z3]) *
                                           p13[z1 | (z3 << 1)];
                            for (Outcome o2 : kOutcomes) {
                                // Bob measures the forwarded eigenstate.
                                const Amplitude overlap = qcore::inner_product(
                                    qcore::eigenstate(b2, o2), ee);
                                const double p =
                                    w * we * std::norm(a13) * std::norm(overlap);
                                if (p < 1e-30) continue;
                                RoundBranch br{b1, b2, b3, o1, o2, o3};
                                br.eve_record = (be == Basis::Y ? 2 : 0) + bit_of(oe);
                                br.prob = p;
                                finish_branch(br);
                                branches.push_back(br);
                            }
                        }
                }
            }
        });
    } else {
        const auto& ea = std::get<EntangleAncilla>(strategy);
        const AncillaDecomposition dec = entangle_ancilla(ea);
        for_each_basis_pair([&](Basis b1, Basis b2, Basis b3, double w) {
            for (Outcome o1 : kOutcomes)
                for (Outcome o2 : kOutcomes)
                    for (Outcome o3 : kOutcomes) {
                        const auto v =
                            project_triplet_with_probe(dec.state, b1, o1, b2, o2, b3, o3);
                        const double p = w * (std::norm(v[0]) + std::norm(v[1]));
                        if (p < 1e-30) continue;
                        RoundBranch br{b1, b2, b3, o1, o2, o3};
                        br.quantum_eve = true;
                        br.ancilla = v;
                        br.prob = p;
                        finish_branch(br);
                        branches.push_back(br);
                    }
        });
    }
    return branches;
}

double classical_mutual_information(const std::vector<RoundBranch>& branches,
                                    bool versus_alice) {
    // I(V;K) with V = (b2, Eve's record) and K the chosen party's bit.
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> pv;
    std::array<double, 2> pk{0.0, 0.0};
    for (const auto& br : branches) {
        const int v = (br.b2 == Basis::Y ? 4 : 0) + br.eve_record;
        const int k = versus_alice ? br.alice_bit : br.bob_bit;
        joint[{v, k}] += br.prob;
        pv[v] += br.prob;
        pk[static_cast<std::size_t>(k)] += br.prob;
    }
    double info = 0.0;
    for (const auto& [vk, p] : joint) {
        if (p < 1e-30) continue;
        info += p * std::log2(p / (pv[vk.first] * pk[static_cast<std::size_t>(vk.second)]));
    }
    return std::max(info, 0.0);
}

qcore::DensityLikeState probe_density(const std::vector<const RoundBranch*>& branches,
                                      double total) {
    qcore::DensityLikeState rho{2, std::vector<Amplitude>(4, Amplitude(0.0, 0.0))};
    for (const auto* br : branches) {
        // branch weight folded into the unnormalized probe vector; scale by
        // the basis-pair weight prob/||v||^2.
        const double vnorm = std::norm(br->ancilla[0]) + std::norm(br->ancilla[1]);
        if (vnorm < 1e-30) continue;
        const double scale = br->prob / vnorm;
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c)
                rho.entries[r * 2 + c] += scale * br->ancilla[r] * std::conj(br->ancilla[c]);
    }
    for (auto& e : rho.entries) e /= total;
    return rho;
}

double holevo_information(const std::vector<RoundBranch>& branches, bool versus_alice) {
    // Average over the public basis announcement of the Holevo quantity of the
    // probe ensemble conditioned on the chosen party's bit.
    double info = 0.0;
    for (Basis b2 : kXY) {
        std::array<std::vector<const RoundBranch*>, 2> group;
        std::array<double, 2> weight{0.0, 0.0};
        double pb2 = 0.0;
        for (const auto& br : branches) {
            if (br.b2 != b2) continue;
            const int k = versus_alice ? br.alice_bit : br.bob_bit;
            group[static_cast<std::size_t>(k)].push_back(&br);
            weight[static_cast<std::size_t>(k)] += br.prob;
            pb2 += br.prob;
        }
        if (pb2 < 1e-30) continue;
        qcore::DensityLikeState avg{2, std::vector<Amplitude>(4, Amplitude(0.0, 0.0))};
        double chi = 0.0;
        for (std::size_t k = 0; k < 2; ++k) {
            if (weight[k] < 1e-30) continue;
            const auto rho = probe_density(group[k], weight[k]);
            chi -= (weight[k] / pb2) * rho.von_neumann_entropy_bits();
            for (std::size_t i = 0; i < 4; ++i)
                avg.entries[i] += (weight[k] / pb2) * rho.entries[i];
        }
        chi += avg.von_neumann_entropy_bits();
        info += pb2 * chi;
    }
    return std::max(info, 0.0);
}

}  // namespace

EntangleAncilla z_probe_attack(double strength) {
    if (strength < 0.0 || strength > 1.0)
        throw std::invalid_argument("probe strength must lie in [0, 1]");
    const double theta = strength * 1.57079632679489661923;  // pi/2
    const double c = std::cos(theta), s = std::sin(theta);
    EntangleAncilla attack;
    attack.unitary.assign(16, Amplitude(0.0, 0.0));
    // Local index: bit(P2) + 2*bit(ancilla). P2=|z+>: identity on the probe;
    // P2=|z->: rotate the probe by theta.
    attack.unitary[0 * 4 + 0] = 1.0;
    attack.unitary[2 * 4 + 2] = 1.0;
    attack.unitary[1 * 4 + 1] = c;
    attack.unitary[3 * 4 + 1] = s;
    attack.unitary[1 * 4 + 3] = -s;
    attack.unitary[3 * 4 + 3] = c;
    attack.ancilla_init = {Amplitude(1.0, 0.0), Amplitude(0.0, 0.0)};
    attack.strength = strength;
    return attack;
}

bool transmit_p2(StateVector& session_state, const ChannelConfig& cfg, Rng& rng) {
    const double u_loss = rng.uniform01();
    const double u_dep = rng.uniform01();
    const int pauli = static_cast<int>(rng.uniform_below(4));
    if (u_loss < cfg.loss_prob) return false;
    if (u_dep < cfg.depolarize_prob) qcore::apply_pauli(session_state, kP2, pauli);
    return true;
}

EveRecord intercept_resend(StateVector& session_state, const InterceptResend& strategy,
                           Rng& rng) {
    const Basis basis = rng.uniform01() < strategy.prob_x ? Basis::X : Basis::Y;
    const Outcome outcome = qcore::measure_in_place(session_state, kP2, basis, rng);
    return EveRecord{basis, outcome};
}

AncillaDecomposition entangle_ancilla(const EntangleAncilla& params) {
    if (params.unitary.size() != 16)
        throw std::invalid_argument("attack unitary must be 4x4");
    const double anorm =
        std::norm(params.ancilla_init[0]) + std::norm(params.ancilla_init[1]);
    if (std::abs(anorm - 1.0) > 1e-9)
        throw std::invalid_argument("ancilla state must be normalized");
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            Amplitude acc(0.0, 0.0);
            for (std::size_t k = 0; k < 4; ++k)
                acc += std::conj(params.unitary[k * 4 + r]) * params.unitary[k * 4 + c];
            if (std::abs(acc - (r == c ? Amplitude(1.0, 0.0) : Amplitude(0.0, 0.0))) > 1e-9)
                throw std::invalid_argument("attack parameters are not unitary");
        }

    AncillaDecomposition dec;
    dec.state = qcore::tensor(qcore::cat_state(3, Outcome::Plus),
                              StateVector{1, {params.ancilla_init[0], params.ancilla_init[1]}});
    qcore::apply_two_qubit(dec.state, kP2, kAncilla, params.unitary);

    const std::array<std::array<Outcome, 3>, 4> consistent = {{
        {Outcome::Plus, Outcome::Plus, Outcome::Plus},
        {Outcome::Minus, Outcome::Minus, Outcome::Plus},
        {Outcome::Plus, Outcome::Minus, Outcome::Minus},
        {Outcome::Minus, Outcome::Plus, Outcome::Minus},
    }};
    for (std::size_t k = 0; k < 4; ++k) {
        auto keep = project_triplet_with_probe(dec.state, Basis::X, consistent[k][0], Basis::X,
                                               consistent[k][1], Basis::X, consistent[k][2]);
        auto leak = project_triplet_with_probe(
            dec.state, Basis::X, consistent[k][0], Basis::X, consistent[k][1], Basis::X,
            consistent[k][2] == Outcome::Plus ? Outcome::Minus : Outcome::Plus);
        for (auto& a : keep) a *= 2.0;
        for (auto& a : leak) a *= 2.0;
        dec.branch_components[k] = keep;
        dec.violating_components[k] = leak;
    }
    return dec;
}

AttackReport eve_information(const EveStrategy& strategy) {
    const auto branches = enumerate_round_branches(strategy);
    AttackReport report;
    for (const auto& br : branches) {
        if (br.violated) report.detection_rate_per_tested_round += br.prob;
        if (br.alice_bit != br.bob_bit) report.qber_on_key += br.prob;
    }
    if (std::holds_alternative<InterceptResend>(strategy)) {
        report.eve_bob_mutual_information = classical_mutual_information(branches, false);
        report.eve_alice_mutual_information = classical_mutual_information(branches, true);
    } else if (std::holds_alternative<EntangleAncilla>(strategy)) {
        report.eve_bob_mutual_information = holevo_information(branches, false);
        report.eve_alice_mutual_information = holevo_information(branches, true);
    }
    return report;
}

double eve_z_information(const EveStrategy& strategy) {
    const auto* ea = std::get_if<EntangleAncilla>(&strategy);
    if (ea == nullptr) return 0.0;
    const AncillaDecomposition dec = entangle_ancilla(*ea);
    // Probe state conditioned on the transmitted qubit's z-value.
    std::array<qcore::DensityLikeState, 2> rho;
    std::array<double, 2> pz{0.0, 0.0};
    for (int z = 0; z < 2; ++z) {
        rho[static_cast<std::size_t>(z)] =
            qcore::DensityLikeState{2, std::vector<Amplitude>(4, Amplitude(0.0, 0.0))};
        for (std::size_t z1 = 0; z1 < 2; ++z1)
            for (std::size_t z3 = 0; z3 < 2; ++z3) {
                std::array<Amplitude, 2> v{};
                for (std::size_t a = 0; a < 2; ++a)
                    v[a] = dec.state.amps[z1 | (static_cast<std::size_t>(z) << 1) | (z3 << 2) |
                                          (a << 3)];
                for (std::size_t r = 0; r < 2; ++r)
                    for (std::size_t c = 0; c < 2; ++c)
                        rho[static_cast<std::size_t>(z)].entries[r * 2 + c] +=
                            v[r] * std::conj(v[c]);
                pz[static_cast<std::size_t>(z)] += std::norm(v[0]) + std::norm(v[1]);
            }
    }
    qcore::DensityLikeState avg{2, std::vector<Amplitude>(4, Amplitude(0.0, 0.0))};
    double chi = 0.0;
    for (std::size_t z = 0; z < 2; ++z) {
        if (pz[z] < 1e-30) continue;
        for (auto& e : rho[z].entries) e /= pz[z];
        chi -= pz[z] * rho[z].von_neumann_entropy_bits();
        for (std::size_t i = 0; i < 4; ++i) avg.entries[i] += pz[z] * rho[z].entries[i];
    }
    chi += avg.von_neumann_entropy_bits();
    return std::max(chi, 0.0);
}

double bob_bit_public_entropy(const EveStrategy& strategy) {
    const auto branches = enumerate_round_branches(strategy);
    double h = 0.0;
    for (Basis b2 : kXY) {
        double pb2 = 0.0;
        std::array<double, 2> pk{0.0, 0.0};
        for (const auto& br : branches) {
            if (br.b2 != b2) continue;
            pb2 += br.prob;
            pk[static_cast<std::size_t>(br.bob_bit)] += br.prob;
        }
        if (pb2 < 1e-30) continue;
        h += pb2 * qcore::entropy_bits({pk[0] / pb2, pk[1] / pb2});
    }
    return h;
}

}  // namespace ghzqkd::threat
