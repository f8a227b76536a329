#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdc/permutation.hpp"

namespace tdc {

struct EncoderConfig {
    int run_length_k = 1;  // consecutive 1s required before a 0 to declare the transition
};

// Raw flip-flop bit vector, ordered by perceived bin index. Need not be
// monotone: bubbles are exactly what the calibration machinery deals with.
struct ThermometerCode {
    std::vector<std::uint8_t> bits;

    int size() const { return static_cast<int>(bits.size()); }
    int popcount() const;
    std::string to_string() const;           // e.g. "11101000"
    static ThermometerCode from_string(const std::string& s);
};

// Priority-encoder semantics: perceived index of the last bit of the first
// run of >= run_length_k consecutive 1s that is immediately followed by a 0
// (or by end-of-code). Returns nullopt when no such run exists (all-zeros in
// particular). 0-based slot index.
std::optional<int> encode(const ThermometerCode& tc, const EncoderConfig& cfg = {});

// Small fixed-size tapped/untapped bit pattern over the slots of one unit.
struct TappedSet {
    std::uint32_t mask = 0;
    int n = 0;

    bool tapped(int slot) const { return (mask >> slot) & 1u; }
    void set(int slot) { mask |= (1u << slot); }
    int count() const;
    // 0-based slot list, ascending.
    std::vector<int> slots() const;
    bool operator==(const TappedSet&) const = default;
    std::string to_string() const;  // 1-based labels, e.g. "{2,3,5,6,8}"
};

TappedSet tapped_set_from_slots(const std::vector<int>& slots0, int n);

// Emission of a unit embedded in a longer chain as a phase sweep crosses its
// j-th internal threshold: the encoder run that reaches the unit arrives
// through the fully-lit preceding context, so a hit lands on slot p exactly
// when the unit's code is 1^(p+1) 0... . Leading-zero codes escape to the
// preceding context (entry -1). emission[j] for j = 0..n crossings.
std::vector<int> prefix_emission_profile(const Permutation& relative_actual);

// Exact tapped-pattern oracle used to build error libraries and to test the
// partial-order reconstruction: enumerates the n+1 thermometer codes produced
// as the phase sweeps the n actual thresholds and collects the emitted slots.
// `actual` and `perceived` are orderings over the same n bins. Patterns are
// independent of cfg.run_length_k for embedded units (the run through the lit
// context is always long enough), so cfg participates only for interface
// symmetry with encode().
TappedSet tapped_set_oracle(const Permutation& actual, const Permutation& perceived,
                            const EncoderConfig& cfg = {});

}  // namespace tdc
