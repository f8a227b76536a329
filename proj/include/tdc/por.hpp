#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdc/density.hpp"
#include "tdc/delay_model.hpp"
#include "tdc/encoder.hpp"
#include "tdc/line.hpp"
#include "tdc/permutation.hpp"

namespace tdc {

// Partial order over one unit's bins, edge u -> v meaning u precedes v in
// the actual ordering. Nodes are 0-based in memory, 1-based in text output.
struct PartialOrderDag {
    int n = 0;
    std::vector<std::vector<int>> adjacency;  // successors, ascending
    std::vector<int> in_degree;

    bool has_edge(int u, int v) const;
    std::vector<int> zero_degrees() const;
    int edge_count() const;
};

// Ordering constraints deducible from one unit's tapped pattern, following
// the bridge principle: for a bin to be tapped, its next bin must not precede
// the current bridge. Throws std::invalid_argument on an empty tapped set;
// the result is validated acyclic.
PartialOrderDag build_dag(const TappedSet& tapped);

// All topological orderings of the DAG, emitted in lexicographic order.
// Throws std::runtime_error on a cyclic graph.
std::vector<Permutation> enumerate_consistent(const PartialOrderDag& dag);

// Candidate with minimum Kendall-tau distance to the ansatz; ties broken
// lexicographically. Throws std::invalid_argument when `candidates` is empty
// (library exhaustion must be handled by the caller).
Permutation select_candidate(const std::vector<Permutation>& candidates, const Permutation& ansatz);

// For each candidate actual ordering, the tapped pattern a density test would
// observe if that candidate were the truth and `perceived` the scan order.
struct ErrorLibrary {
    int stage = 1;
    std::vector<std::pair<Permutation, TappedSet>> entries;
};

ErrorLibrary build_error_library(const std::vector<Permutation>& candidates,
                                 const Permutation& perceived, const EncoderConfig& cfg,
                                 int stage = 1);

// "u -> v" lines, 1-based, dot-compatible.
void export_dag(std::ostream& out, const PartialOrderDag& dag);

enum class AnsatzMode {
    Identity,        // believe the physical order
    PatternLibrary,  // prefer the correction most frequently selected so far
};

struct PorConfig {
    std::uint64_t shots = 5'000'000;
    std::uint64_t seed_base = 0;        // per-iteration seed = seed_base + iteration
    std::uint64_t tapped_threshold = 0; // counts above this are tapped
    EncoderConfig encoder;
    AnsatzMode ansatz_mode = AnsatzMode::Identity;
};

struct UnitState {
    Permutation perceived;                // current belief, unit-local slots
    std::vector<Permutation> candidates;  // surviving actual-order candidates
    int stage = 0;                        // 0 = DAG step pending, >=1 = library filtering
};

// Observation matched no library entry: the signature of model drift or a
// threshold misclassification. Carries the offending unit.
struct PorNoMatch : std::runtime_error {
    PorNoMatch(int unit, const std::string& what) : std::runtime_error(what), unit_index(unit) {}
    int unit_index;
};

class PorState {
public:
    PorState(DelayLineModel& model, int group_id, PorConfig cfg);

    const PorConfig& config() const { return cfg_; }
    int group_id() const { return group_id_; }
    int unit_count() const { return static_cast<int>(units_.size()); }
    const std::vector<UnitState>& units() const { return units_; }
    std::vector<UnitState>& units() { return units_; }
    int iteration() const { return iteration_; }
    void set_iteration(int it) { iteration_ = it; }
    const DelayLineModel& model() const { return *model_; }
    DelayLineModel& mutable_model() { return *model_; }
    void rebind_model(DelayLineModel& model) { model_ = &model; }

    // Group-wide perceived ordering (concatenated per-unit beliefs).
    Permutation group_perceived() const;
    GroupSelector selector() const;

    bool converged() const;  // every unit down to a single candidate

private:
    DelayLineModel* model_;
    int group_id_;
    PorConfig cfg_;
    std::vector<UnitState> units_;
    int iteration_ = 0;
};

struct PorIterationReport {
    int iteration = 0;
    double tapped_fraction = 0.0;          // of the density test driving this step
    bool unit_boundaries_clean = true;     // final bin of every unit tapped
    std::vector<std::size_t> candidate_counts;
    int converged_units = 0;
};

// One calibration round: density test on the current perceived ordering,
// per-unit pattern deduction (DAG + enumeration on first contact, error
// library filtering afterwards), candidate selection, and adoption of the
// selected orderings as the new perceived state. Throws PorNoMatch when an
// observation is incompatible with every remaining candidate.
PorIterationReport por_iteration(PorState& state);

// Runs up to `iterations` rounds over the given states (they may share
// models), resynthesizing each distinct model after every round. Stops early
// once every state has converged and observes a fully tapped line.
std::vector<PorIterationReport> run_por(std::vector<PorState*> states, int iterations);

// True when no thermometer bubble can cross a unit boundary: within each
// group, every unit's positions stay below the next unit's.
bool check_unit_isolation(const DelayLineModel& model, int group_id);

// Checkpoint: per-unit perceived ordering + remaining candidates,
// line-delimited; reload resumes iteration.
void write_checkpoint(std::ostream& out, const PorState& state);
void read_checkpoint(std::istream& in, PorState& state);

}  // namespace tdc
