// quantum.hpp
// Dense statevector simulation of the delayed-choice interferometer networks
// and the joint outcome distribution q(a,b,c) they produce.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpr {

using complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Norm drift allowed after any gate application.
inline constexpr double kNormTolerance = 1e-12;

// Maps a finite angle into [0, 2π).
inline double canonical_angle(double radians) {
    if (!std::isfinite(radians)) {
        throw std::invalid_argument("angle must be finite");
    }
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

// Qubit q of an n-qubit register lives at bit (n - 1 - q) of the basis index,
// so qubit 0 is the most significant bit.
constexpr std::size_t qubit_mask(std::size_t n_qubits, std::size_t qubit) {
    return std::size_t{1} << (n_qubits - 1 - qubit);
}

class StateVector {
public:
    // |0...0>
    explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits == 0 || n_qubits > 16) {
            throw std::invalid_argument("n_qubits must be in [1, 16]");
        }
        amplitudes_.assign(std::size_t{1} << n_qubits, complex{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    StateVector(std::size_t n_qubits, std::vector<complex> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
        if (n_qubits == 0 || n_qubits > 16) {
            throw std::invalid_argument("n_qubits must be in [1, 16]");
        }
        if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
            throw std::invalid_argument("amplitude count must equal 2^n_qubits");
        }
        for (const auto& a : amplitudes_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                throw std::invalid_argument("non-finite amplitude");
            }
        }
        if (std::abs(norm_squared() - 1.0) > kNormTolerance) {
            throw std::invalid_argument("state is not normalized");
        }
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    std::span<const complex> amplitudes() const { return amplitudes_; }
    const complex& operator[](std::size_t basis) const { return amplitudes_.at(basis); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s;
    }

    double probability(std::size_t basis) const { return std::norm(amplitudes_.at(basis)); }

private:
    friend StateVector apply_gate(const StateVector&, const struct Gate&);
    std::size_t n_qubits_;
    std::vector<complex> amplitudes_;
};

enum class GateKind { Hadamard, PhaseShift, RotationY, ControlledHadamard, ControlledZ, PauliX };

inline std::string to_string(GateKind k) {
    switch (k) {
        case GateKind::Hadamard: return "H";
        case GateKind::PhaseShift: return "Phase";
        case GateKind::RotationY: return "Ry";
        case GateKind::ControlledHadamard: return "CH";
        case GateKind::ControlledZ: return "CZ";
        case GateKind::PauliX: return "X";
    }
    return "?";
}

using Matrix2 = std::array<std::array<complex, 2>, 2>;

struct Gate {
    GateKind kind;
    double angle = 0.0;  // radians; PhaseShift and RotationY only
    std::vector<std::size_t> targets;
    std::vector<std::size_t> controls;

    static Gate hadamard(std::size_t q) { return {GateKind::Hadamard, 0.0, {q}, {}}; }
    static Gate phase(std::size_t q, double phi) {
        return {GateKind::PhaseShift, canonical_angle(phi), {q}, {}};
    }
    static Gate rotation_y(std::size_t q, double alpha) {
        return {GateKind::RotationY, canonical_angle(alpha), {q}, {}};
    }
    static Gate controlled_hadamard(std::size_t control, std::size_t target) {
        return {GateKind::ControlledHadamard, 0.0, {target}, {control}};
    }
    static Gate controlled_z(std::size_t control, std::size_t target) {
        return {GateKind::ControlledZ, 0.0, {target}, {control}};
    }
    static Gate pauli_x(std::size_t q) { return {GateKind::PauliX, 0.0, {q}, {}}; }

    // The single-qubit block acting on the target once all controls are set.
    // RotationY follows the convention R_y(α) = exp(iασ_y) = [[cos α, sin α], [-sin α, cos α]].
    Matrix2 matrix() const {
        const double s = 1.0 / std::numbers::sqrt2;
        switch (kind) {
            case GateKind::Hadamard:
            case GateKind::ControlledHadamard:
                return {{{s, s}, {s, -s}}};
            case GateKind::PhaseShift:
                return {{{1.0, 0.0}, {0.0, std::polar(1.0, angle)}}};
            case GateKind::RotationY:
                return {{{std::cos(angle), std::sin(angle)}, {-std::sin(angle), std::cos(angle)}}};
            case GateKind::ControlledZ:
                return {{{1.0, 0.0}, {0.0, -1.0}}};
            case GateKind::PauliX:
                return {{{0.0, 1.0}, {1.0, 0.0}}};
        }
        throw std::logic_error("unknown gate kind");
    }

    void validate(std::size_t n_qubits) const {
        if (targets.size() != 1) throw std::invalid_argument("gate needs exactly one target");
        const bool controlled = kind == GateKind::ControlledHadamard || kind == GateKind::ControlledZ;
        if (controlled != !controls.empty()) {
            throw std::invalid_argument("control list does not match gate kind " + to_string(kind));
        }
        for (auto q : targets) {
            if (q >= n_qubits) throw std::out_of_range("gate target out of range");
        }
        for (auto q : controls) {
            if (q >= n_qubits) throw std::out_of_range("gate control out of range");
            for (auto t : targets) {
                if (q == t) throw std::invalid_argument("gate targets and controls overlap");
            }
        }
    }
};

inline StateVector apply_gate(const StateVector& state, const Gate& gate) {
    const std::size_t n = state.n_qubits();
    gate.validate(n);
    const Matrix2 m = gate.matrix();
    const std::size_t tmask = qubit_mask(n, gate.targets.front());
    std::size_t cmask = 0;
    for (auto c : gate.controls) cmask |= qubit_mask(n, c);

    StateVector out = state;
    auto& amps = out.amplitudes_;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & tmask) != 0 || (i & cmask) != cmask) continue;
        const std::size_t j = i | tmask;
        const complex a0 = state.amplitudes_[i];
        const complex a1 = state.amplitudes_[j];
        amps[i] = m[0][0] * a0 + m[0][1] * a1;
        amps[j] = m[1][0] * a0 + m[1][1] * a1;
    }
    for (const auto& a : amps) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw std::runtime_error("gate application produced a non-finite amplitude");
        }
    }
    if (std::abs(out.norm_squared() - 1.0) > kNormTolerance) {
        throw std::runtime_error("gate application broke normalization");
    }
    return out;
}

// Readout order is (a, b, c) = qubits (A, B, C); the cell index is a<<2 | b<<1 | c.
class JointDistribution {
public:
    static constexpr double kSumTolerance = 1e-12;

    JointDistribution() = default;
    explicit JointDistribution(const std::array<double, 8>& probs) : probs_(probs) {}

    static constexpr std::size_t index(int a, int b, int c) {
        return (static_cast<std::size_t>(a) << 2) | (static_cast<std::size_t>(b) << 1) |
               static_cast<std::size_t>(c);
    }
    static std::string key(std::size_t cell) {
        return {static_cast<char>('0' + ((cell >> 2) & 1)), static_cast<char>('0' + ((cell >> 1) & 1)),
                static_cast<char>('0' + (cell & 1))};
    }

    double operator()(int a, int b, int c) const { return probs_[index(a, b, c)]; }
    double& operator()(int a, int b, int c) { return probs_[index(a, b, c)]; }
    double operator[](std::size_t cell) const { return probs_.at(cell); }
    const std::array<double, 8>& probs() const { return probs_; }

    double total() const {
        double s = 0.0;
        for (double p : probs_) s += p;
        return s;
    }
    double marginal_c(int c) const {
        double s = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) s += (*this)(a, b, c);
        return s;
    }
    double marginal_bc(int b, int c) const { return (*this)(0, b, c) + (*this)(1, b, c); }
    double marginal_ab(int a, int b) const { return (*this)(a, b, 0) + (*this)(a, b, 1); }
    // q(a | b, c); zero when the conditioning event has zero probability.
    double conditional_a(int a, int b, int c) const {
        const double den = marginal_bc(b, c);
        return den > 0.0 ? (*this)(a, b, c) / den : 0.0;
    }

    void validate() const {
        for (double p : probs_) {
            if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("probability must be finite and nonnegative");
        }
        if (std::abs(total() - 1.0) > kSumTolerance) {
            throw std::invalid_argument("probabilities do not sum to 1");
        }
    }

    friend double max_abs_deviation(const JointDistribution& lhs, const JointDistribution& rhs) {
        double m = 0.0;
        for (std::size_t i = 0; i < 8; ++i) m = std::max(m, std::abs(lhs.probs_[i] - rhs.probs_[i]));
        return m;
    }

private:
    std::array<double, 8> probs_{};
};

enum class VariantTag { ClassicalControl, QuantumControl, EntanglementAssisted };

inline std::string to_string(VariantTag t) {
    switch (t) {
        case VariantTag::ClassicalControl: return "classical";
        case VariantTag::QuantumControl: return "quantum";
        case VariantTag::EntanglementAssisted: return "entanglement";
    }
    return "?";
}

inline VariantTag parse_variant(const std::string& s) {
    if (s == "classical") return VariantTag::ClassicalControl;
    if (s == "quantum") return VariantTag::QuantumControl;
    if (s == "entanglement") return VariantTag::EntanglementAssisted;
    throw std::invalid_argument("unknown circuit variant: " + s);
}

struct CircuitVariant {
    VariantTag tag;
    double phi;
    double alpha;  // ignored by ClassicalControl

    CircuitVariant(VariantTag t, double phi_rad, double alpha_rad)
        : tag(t), phi(canonical_angle(phi_rad)), alpha(canonical_angle(alpha_rad)) {}
};

struct Circuit {
    StateVector initial;
    std::vector<Gate> gates;
};

// A circuit family mixed with classical weights. Only ClassicalControl has more
// than one branch: the coin that decides whether the second beamsplitter is
// present is drawn at sampling time, and its value is recorded on qubit B.
struct CircuitPlan {
    std::vector<double> weights;
    std::vector<Circuit> branches;
};

inline constexpr std::size_t kQubitA = 0;
inline constexpr std::size_t kQubitB = 1;
inline constexpr std::size_t kQubitC = 2;

inline CircuitPlan build_circuit(const CircuitVariant& variant) {
    const double s = 1.0 / std::numbers::sqrt2;
    CircuitPlan plan;
    switch (variant.tag) {
        case VariantTag::EntanglementAssisted: {
            // (1/√2)|0>_A (|00> + |11>)_BC
            std::vector<complex> amps(8, 0.0);
            amps[JointDistribution::index(0, 0, 0)] = s;
            amps[JointDistribution::index(0, 1, 1)] = s;
            plan.weights = {1.0};
            plan.branches.push_back(Circuit{StateVector(3, std::move(amps)),
                                            {Gate::hadamard(kQubitA), Gate::phase(kQubitA, variant.phi),
                                             Gate::controlled_hadamard(kQubitB, kQubitA),
                                             Gate::rotation_y(kQubitC, variant.alpha)}});
            break;
        }
        case VariantTag::QuantumControl: {
            // Ancilla B in cos α|0> + sin α|1>; C is idle.
            std::vector<complex> amps(8, 0.0);
            amps[JointDistribution::index(0, 0, 0)] = std::cos(variant.alpha);
            amps[JointDistribution::index(0, 1, 0)] = std::sin(variant.alpha);
            plan.weights = {1.0};
            plan.branches.push_back(Circuit{StateVector(3, std::move(amps)),
                                            {Gate::hadamard(kQubitA), Gate::phase(kQubitA, variant.phi),
                                             Gate::controlled_hadamard(kQubitB, kQubitA)}});
            break;
        }
        case VariantTag::ClassicalControl: {
            plan.weights = {0.5, 0.5};
            plan.branches.push_back(
                Circuit{StateVector(3), {Gate::hadamard(kQubitA), Gate::phase(kQubitA, variant.phi)}});
            plan.branches.push_back(Circuit{StateVector(3),
                                            {Gate::pauli_x(kQubitB), Gate::hadamard(kQubitA),
                                             Gate::phase(kQubitA, variant.phi), Gate::hadamard(kQubitA)}});
            break;
        }
    }
    return plan;
}

inline StateVector run(const Circuit& circuit) {
    StateVector state = circuit.initial;
    for (const auto& g : circuit.gates) state = apply_gate(state, g);
    return state;
}

// Final state of the entanglement-assisted network, just before detection.
inline StateVector simulate_entanglement_assisted(double phi, double alpha) {
    return run(build_circuit(CircuitVariant(VariantTag::EntanglementAssisted, phi, alpha)).branches.front());
}

inline JointDistribution joint_distribution(const StateVector& state) {
    if (state.n_qubits() != 3) {
        throw std::invalid_argument("joint_distribution needs exactly 3 qubits (A, B, C)");
    }
    std::array<double, 8> p{};
    for (std::size_t i = 0; i < 8; ++i) p[i] = state.probability(i);
    return JointDistribution(p);
}

inline JointDistribution simulate_distribution(const CircuitVariant& variant) {
    const CircuitPlan plan = build_circuit(variant);
    std::array<double, 8> p{};
    for (std::size_t k = 0; k < plan.branches.size(); ++k) {
        const auto branch = joint_distribution(run(plan.branches[k]));
        for (std::size_t i = 0; i < 8; ++i) p[i] += plan.weights[k] * branch[i];
    }
    return JointDistribution(p);
}

// Closed-form q(a,b,c) of the entanglement-assisted network.
inline JointDistribution analytic_distribution(double phi, double alpha) {
    if (!std::isfinite(phi) || !std::isfinite(alpha)) throw std::invalid_argument("angles must be finite");
    const double c2 = std::cos(alpha) * std::cos(alpha);
    const double s2 = std::sin(alpha) * std::sin(alpha);
    const double k = std::cos(phi / 2.0) * std::cos(phi / 2.0);
    const double kc = std::sin(phi / 2.0) * std::sin(phi / 2.0);
    JointDistribution q;
    for (int a = 0; a < 2; ++a) {
        q(a, 0, 0) = 0.25 * c2;
        q(a, 0, 1) = 0.25 * s2;
    }
    q(0, 1, 0) = 0.5 * s2 * k;
    q(1, 1, 0) = 0.5 * s2 * kc;
    q(0, 1, 1) = 0.5 * c2 * k;
    q(1, 1, 1) = 0.5 * c2 * kc;
    return q;
}

// Closed forms for the other two networks, for side-by-side reporting.
inline JointDistribution analytic_distribution(const CircuitVariant& v) {
    if (v.tag == VariantTag::EntanglementAssisted) return analytic_distribution(v.phi, v.alpha);
    const double k = std::cos(v.phi / 2.0) * std::cos(v.phi / 2.0);
    const double kc = std::sin(v.phi / 2.0) * std::sin(v.phi / 2.0);
    const double open = v.tag == VariantTag::QuantumControl ? std::cos(v.alpha) * std::cos(v.alpha) : 0.5;
    const double closed = v.tag == VariantTag::QuantumControl ? std::sin(v.alpha) * std::sin(v.alpha) : 0.5;
    JointDistribution q;
    q(0, 0, 0) = q(1, 0, 0) = 0.5 * open;
    q(0, 1, 0) = closed * k;
    q(1, 1, 0) = closed * kc;
    return q;
}

struct WaveParticleAmplitudes {
    std::array<complex, 2> particle;
    std::array<complex, 2> wave;
    double phi;
};

// |p> = (|0> + e^{iφ}|1>)/√2 and |w> = e^{iφ/2}(cos(φ/2)|0> - i sin(φ/2)|1>), global phase kept.
inline WaveParticleAmplitudes wave_particle_states(double phi) {
    if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
    const double s = 1.0 / std::numbers::sqrt2;
    const complex global = std::polar(1.0, phi / 2.0);
    return {{complex{s, 0.0}, s * std::polar(1.0, phi)},
            {global * std::cos(phi / 2.0), global * complex{0.0, -std::sin(phi / 2.0)}},
            phi};
}

// |<lhs|rhs>|^2, insensitive to global phase.
inline double fidelity(const StateVector& lhs, const StateVector& rhs) {
    if (lhs.dim() != rhs.dim()) throw std::invalid_argument("dimension mismatch");
    complex overlap{0.0, 0.0};
    for (std::size_t i = 0; i < lhs.dim(); ++i) overlap += std::conj(lhs[i]) * rhs[i];
    return std::norm(overlap);
}

}  // namespace wpr
