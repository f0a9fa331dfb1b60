#pragma once

#include "boga/seqcore.hpp"

#include <array>
#include <chrono>
#include <string>

namespace boga {

/// Per-residue hydrophobicity values, indexed by Alphabet order.
struct HydrophobicityScale {
    std::array<double, 20> values{};

    double of(char residue) const { return values[static_cast<std::size_t>(Alphabet::index_of(residue))]; }
    double max_value() const;
    double min_value() const;

    /// Eisenberg consensus scale (the default everywhere).
    static const HydrophobicityScale& eisenberg();
};

/// Average residue mass in daltons (polymerized residue, water excluded).
double average_residue_mass(char residue);

/// Mass of the free water released on peptide-bond hydrolysis terms: added
/// once per chain.
constexpr double kWaterMassDa = 18.02;

/// Fraction of residues in {E, M, A, L}.
double beta_sheet_fraction(const Sequence& seq);

struct HydrophobicMoment {
    double mu_h = 0.0;    // raw moment magnitude per residue
    double u_h_rel = 0.0; // normalized to the ideal arrangement, clamped to [0,1]
};

/// Raw helical-wheel moment: |sum_n H(a_n) * exp(i*n*delta)| / L with the
/// residue index n starting at 0 and delta = angle_deg in degrees.
double hydrophobic_moment_raw(const Sequence& seq, double angle_deg = 100.0,
                              const HydrophobicityScale& scale = HydrophobicityScale::eisenberg());

/// Largest moment any length-L arrangement of scale extremes can reach:
/// for each 1-degree axis candidate, the most hydrophobic residue fills
/// every wheel position with positive projection onto the axis and the most
/// hydrophilic residue fills the rest; the best axis wins.
double ideal_moment(std::size_t length, double angle_deg = 100.0,
                    const HydrophobicityScale& scale = HydrophobicityScale::eisenberg());

HydrophobicMoment hydrophobic_moment(const Sequence& seq, double angle_deg = 100.0,
                                     const HydrophobicityScale& scale = HydrophobicityScale::eisenberg());

/// Sum of average residue masses plus one water, in daltons.
double molecular_weight(const Sequence& seq);

enum class BuiltinLandscape { sheet, moment, mw };

BuiltinLandscape builtin_landscape_from_name(const std::string& name);
const char* to_string(BuiltinLandscape landscape);

double evaluate_builtin(const Sequence& seq, BuiltinLandscape landscape);

/// Builtin objective behind an artificial latency, for benchmarking the
/// regime where one objective call dwarfs all surrogate machinery.
double mock_expensive(const Sequence& seq, BuiltinLandscape landscape,
                      std::chrono::milliseconds latency);

struct ObjectiveSpec {
    enum class Kind { builtin, external, mock };

    std::string name;
    Direction direction = Direction::maximize;
    Kind kind = Kind::builtin;
};

} // namespace boga
