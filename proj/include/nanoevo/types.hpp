#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace nanoevo {

/// Cell-surface identity pattern of `length` bits (1..64) by which nano-agents recognize cells.
struct Signature {
    std::uint64_t bits = 0;
    int length = 8;

    friend bool operator==(const Signature&, const Signature&) = default;
};

inline int hamming_distance(const Signature& a, const Signature& b)
{
    return std::popcount(a.bits ^ b.bits);
}

inline std::uint64_t signature_mask(int length)
{
    return length >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << length) - 1);
}

struct Position {
    int row = 0;
    int col = 0;

    friend bool operator==(const Position&, const Position&) = default;
};

enum class CellKind { Cancer, Healthy };

/// Interaction parameter a resistance modifier acts on.
enum class RateTarget { Association = 0, Dissociation = 1, Internalization = 2, Killing = 3 };

inline constexpr std::array<RateTarget, 4> kAllTargets = {
    RateTarget::Association, RateTarget::Dissociation, RateTarget::Internalization, RateTarget::Killing};

inline std::string_view to_string(RateTarget t)
{
    switch (t) {
    case RateTarget::Association: return "p_a";
    case RateTarget::Dissociation: return "p_d";
    case RateTarget::Internalization: return "p_i";
    case RateTarget::Killing: return "p_k";
    }
    return "?";
}

struct ResistanceModifier {
    RateTarget target = RateTarget::Association;
    double strength = 0.3; ///< in [0.30, 0.80]

    friend bool operator==(const ResistanceModifier&, const ResistanceModifier&) = default;
};

struct CellAgent {
    int id = 0;
    CellKind kind = CellKind::Cancer;
    Signature signature;
    std::optional<ResistanceModifier> resistance;
    bool alive = true;
    Position pos;
    int founder_id = 0; ///< id of the initial cell this lineage descends from
};

/// Evolvable interaction parameters of one nano-agent lineage.
struct Genome {
    int speed = 1;
    double p_a = 0.5;
    double p_d = 0.5;
    double p_i = 0.5;
    double p_k = 0.5;

    friend bool operator==(const Genome&, const Genome&) = default;
    friend auto operator<=>(const Genome&, const Genome&) = default;
};

enum class AgentState { Free, Bound, Internalized, Spent };

enum class Mode { Learning, Simulation };

struct NanoAgent {
    int id = 0;
    Genome genome;
    std::vector<Signature> memory; ///< oldest first
    AgentState state = AgentState::Free;
    int cell_id = -1; ///< target cell while Bound or Internalized
    int cc_killed = 0;
    int hc_killed = 0;
    Position pos;
};

} // namespace nanoevo
