#include "tdc/encoder.hpp"

#include <bit>
#include <stdexcept>

namespace tdc {

int ThermometerCode::popcount() const {
    int c = 0;
    for (std::uint8_t b : bits) c += b ? 1 : 0;
    return c;
}

std::string ThermometerCode::to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (std::uint8_t b : bits) s.push_back(b ? '1' : '0');
    return s;
}

ThermometerCode ThermometerCode::from_string(const std::string& s) {
    ThermometerCode tc;
    tc.bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw std::invalid_argument("thermometer code: expected only 0/1");
        tc.bits.push_back(c == '1' ? 1 : 0);
    }
    return tc;
}

std::optional<int> encode(const ThermometerCode& tc, const EncoderConfig& cfg) {
    if (tc.bits.empty()) throw std::invalid_argument("encode: empty thermometer code");
    if (cfg.run_length_k < 1) throw std::invalid_argument("encode: run_length_k must be >= 1");
    const int n = tc.size();
    int run = 0;
    for (int i = 0; i < n; ++i) {
        if (tc.bits[static_cast<std::size_t>(i)]) {
            ++run;
            if (i + 1 == n && run >= cfg.run_length_k) return i;  // run reaches end-of-code
        } else {
            if (run >= cfg.run_length_k) return i - 1;
            run = 0;
        }
    }
    return std::nullopt;
}

int TappedSet::count() const { return std::popcount(mask); }

std::vector<int> TappedSet::slots() const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (tapped(i)) out.push_back(i);
    return out;
}

std::string TappedSet::to_string() const {
    std::string s = "{";
    bool first = true;
    for (int i = 0; i < n; ++i) {
        if (!tapped(i)) continue;
        if (!first) s += ",";
        s += std::to_string(i + 1);
        first = false;
    }
    return s + "}";
}

TappedSet tapped_set_from_slots(const std::vector<int>& slots0, int n) {
    TappedSet t;
    t.n = n;
    for (int s : slots0) {
        if (s < 0 || s >= n) throw std::invalid_argument("tapped set: slot out of range");
        t.set(s);
    }
    return t;
}

std::vector<int> prefix_emission_profile(const Permutation& relative_actual) {
    const int n = static_cast<int>(relative_actual.size());
    const Permutation rank = inverse(relative_actual);  // rank[slot] = crossing order of that slot
    std::vector<int> emission(static_cast<std::size_t>(n) + 1, -1);
    for (int j = 0; j <= n; ++j) {
        int prefix = 0;
        while (prefix < n && rank[static_cast<std::size_t>(prefix)] < j) ++prefix;
        emission[static_cast<std::size_t>(j)] = prefix - 1;  // -1 when the code has a leading zero
    }
    return emission;
}

TappedSet tapped_set_oracle(const Permutation& actual, const Permutation& perceived,
                            const EncoderConfig& cfg) {
    (void)cfg;
    if (actual.size() != perceived.size())
        throw std::invalid_argument("tapped_set_oracle: permutation length mismatch");
    if (!is_permutation_of_n(actual) || !is_permutation_of_n(perceived))
        throw std::invalid_argument("tapped_set_oracle: inputs must be permutations of 0..n-1");
    // relative[k] = perceived slot of the k-th earliest bin.
    const Permutation relative = compose(inverse(perceived), actual);
    const std::vector<int> emission = prefix_emission_profile(relative);
    TappedSet t;
    t.n = static_cast<int>(actual.size());
    for (int e : emission)
        if (e >= 0) t.set(e);
    return t;
}

}  // namespace tdc
