#include "boga/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>
#include <unordered_map>

namespace boga {

namespace {

// Eisenberg consensus hydrophobicity, Alphabet (ACDEFGHIKLMNPQRSTVWY) order.
constexpr std::array<double, 20> kEisenberg = {
    0.62,  // A
    0.29,  // C
    -0.90, // D
    -0.74, // E
    1.19,  // F
    0.48,  // G
    -0.40, // H
    1.38,  // I
    -1.50, // K
    1.06,  // L
    0.64,  // M
    -0.78, // N
    0.12,  // P
    -0.85, // Q
    -2.53, // R
    -0.18, // S
    -0.05, // T
    1.08,  // V
    0.81,  // W
    0.26,  // Y
};

// Average residue masses (Da), Alphabet order.
constexpr std::array<double, 20> kResidueMassDa = {
    71.08,  // A
    103.14, // C
    115.09, // D
    129.12, // E
    147.18, // F
    57.05,  // G
    137.14, // H
    113.16, // I
    128.17, // K
    113.16, // L
    131.19, // M
    114.10, // N
    97.12,  // P
    128.13, // Q
    156.19, // R
    87.08,  // S
    101.10, // T
    99.13,  // V
    186.21, // W
    163.18, // Y
};

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

} // namespace

double HydrophobicityScale::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

double HydrophobicityScale::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

const HydrophobicityScale& HydrophobicityScale::eisenberg() {
    static const HydrophobicityScale scale{kEisenberg};
    return scale;
}

double average_residue_mass(char residue) {
    return kResidueMassDa[static_cast<std::size_t>(Alphabet::index_of(residue))];
}

double beta_sheet_fraction(const Sequence& seq) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < seq.length(); ++i) {
        const char c = seq[i];
        if (c == 'E' || c == 'M' || c == 'A' || c == 'L') ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(seq.length());
}

double hydrophobic_moment_raw(const Sequence& seq, double angle_deg,
                              const HydrophobicityScale& scale) {
    const double delta = deg2rad(angle_deg);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t n = 0; n < seq.length(); ++n) {
        const double h = scale.of(seq[n]);
        re += h * std::cos(delta * static_cast<double>(n));
        im += h * std::sin(delta * static_cast<double>(n));
    }
    return std::hypot(re, im) / static_cast<double>(seq.length());
}

double ideal_moment(std::size_t length, double angle_deg, const HydrophobicityScale& scale) {
    const double h_max = scale.max_value();
    const double h_min = scale.min_value();
    const double delta = deg2rad(angle_deg);

    double best = 0.0;
    for (int axis_deg = 0; axis_deg < 360; ++axis_deg) {
        const double psi = deg2rad(static_cast<double>(axis_deg));
        double re = 0.0;
        double im = 0.0;
        for (std::size_t n = 0; n < length; ++n) {
            const double theta = delta * static_cast<double>(n);
            const double h = std::cos(theta - psi) > 0.0 ? h_max : h_min;
            re += h * std::cos(theta);
            im += h * std::sin(theta);
        }
        best = std::max(best, std::hypot(re, im));
    }
    return best / static_cast<double>(length);
}

namespace {

double cached_ideal_moment(std::size_t length) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(length);
        if (it != cache.end()) return it->second;
    }
    const double value = ideal_moment(length);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(length, value);
    return value;
}

} // namespace

HydrophobicMoment hydrophobic_moment(const Sequence& seq, double angle_deg,
                                     const HydrophobicityScale& scale) {
    HydrophobicMoment out;
    out.mu_h = hydrophobic_moment_raw(seq, angle_deg, scale);
    const bool default_setup = angle_deg == 100.0 && &scale == &HydrophobicityScale::eisenberg();
    const double ideal = default_setup ? cached_ideal_moment(seq.length())
                                       : ideal_moment(seq.length(), angle_deg, scale);
    out.u_h_rel = ideal > 1e-12 ? std::clamp(out.mu_h / ideal, 0.0, 1.0) : 0.0;
    return out;
}

double molecular_weight(const Sequence& seq) {
    double mass = kWaterMassDa;
    for (std::size_t i = 0; i < seq.length(); ++i) mass += average_residue_mass(seq[i]);
    return mass;
}

BuiltinLandscape builtin_landscape_from_name(const std::string& name) {
    if (name == "sheet") return BuiltinLandscape::sheet;
    if (name == "moment") return BuiltinLandscape::moment;
    if (name == "mw") return BuiltinLandscape::mw;
    throw ConfigError("unknown builtin objective '" + name + "' (expected sheet|moment|mw)");
}

const char* to_string(BuiltinLandscape landscape) {
    switch (landscape) {
    case BuiltinLandscape::sheet: return "sheet";
    case BuiltinLandscape::moment: return "moment";
    case BuiltinLandscape::mw: return "mw";
    }
    return "?";
}

double evaluate_builtin(const Sequence& seq, BuiltinLandscape landscape) {
    switch (landscape) {
    case BuiltinLandscape::sheet: return beta_sheet_fraction(seq);
    case BuiltinLandscape::moment: return hydrophobic_moment(seq).u_h_rel;
    case BuiltinLandscape::mw: return molecular_weight(seq);
    }
    throw Error("unknown builtin landscape");
}

double mock_expensive(const Sequence& seq, BuiltinLandscape landscape,
                      std::chrono::milliseconds latency) {
    if (latency.count() > 0) std::this_thread::sleep_for(latency);
    return evaluate_builtin(seq, landscape);
}

} // namespace boga
