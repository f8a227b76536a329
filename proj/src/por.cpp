#include "tdc/por.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tdc {

bool PartialOrderDag::has_edge(int u, int v) const {
    const auto& succ = adjacency[static_cast<std::size_t>(u)];
    return std::binary_search(succ.begin(), succ.end(), v);
}

std::vector<int> PartialOrderDag::zero_degrees() const {
    std::vector<int> zeros;
    for (int v = 0; v < n; ++v)
        if (in_degree[static_cast<std::size_t>(v)] == 0) zeros.push_back(v);
    return zeros;
}

int PartialOrderDag::edge_count() const {
    int c = 0;
    for (const auto& succ : adjacency) c += static_cast<int>(succ.size());
    return c;
}

namespace {

void add_edge_1based(PartialOrderDag& dag, int u1, int v1) {
    auto& succ = dag.adjacency[static_cast<std::size_t>(u1 - 1)];
    int v = v1 - 1;
    auto it = std::lower_bound(succ.begin(), succ.end(), v);
    if (it != succ.end() && *it == v) return;
    succ.insert(it, v);
    ++dag.in_degree[static_cast<std::size_t>(v)];
}

void check_acyclic(const PartialOrderDag& dag) {
    std::vector<int> degree = dag.in_degree;
    std::vector<int> queue;
    for (int v = 0; v < dag.n; ++v)
        if (degree[static_cast<std::size_t>(v)] == 0) queue.push_back(v);
    int visited = 0;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        ++visited;
        for (int w : dag.adjacency[static_cast<std::size_t>(v)])
            if (--degree[static_cast<std::size_t>(w)] == 0) queue.push_back(w);
    }
    if (visited != dag.n) throw std::runtime_error("partial order dag: cycle detected");
}

}  // namespace

PartialOrderDag build_dag(const TappedSet& tapped) {
    if (tapped.count() == 0) throw std::invalid_argument("build_dag: empty tapped set carries no information");
    const int n = tapped.n;
    PartialOrderDag dag;
    dag.n = n;
    dag.adjacency.assign(static_cast<std::size_t>(n), {});
    dag.in_degree.assign(static_cast<std::size_t>(n), 0);

    auto tapped1 = [&](int label1) { return tapped.tapped(label1 - 1); };

    int bridge = 0;
    for (int label = 1; label <= n; ++label) {
        if (tapped1(label)) {
            bridge = label;
            break;
        }
    }

    for (int number = 2; number <= bridge; ++number) add_edge_1based(dag, number, 1);
    if (bridge != n) add_edge_1based(dag, 1, bridge + 1);
    bridge += 1;
    for (int value = bridge + 1; value <= n; ++value) {
        if (tapped1(value - 1)) {
            add_edge_1based(dag, bridge, value);
            bridge = value;
        } else {
            add_edge_1based(dag, value, bridge);
        }
    }

    check_acyclic(dag);
    return dag;
}

namespace {

void enumerate_rec(const PartialOrderDag& dag, std::vector<int>& degree, Permutation& prefix,
                   std::vector<bool>& used, std::vector<Permutation>& out) {
    if (static_cast<int>(prefix.size()) == dag.n) {
        out.push_back(prefix);
        return;
    }
    for (int v = 0; v < dag.n; ++v) {
        if (used[static_cast<std::size_t>(v)] || degree[static_cast<std::size_t>(v)] != 0) continue;
        used[static_cast<std::size_t>(v)] = true;
        prefix.push_back(v);
        for (int w : dag.adjacency[static_cast<std::size_t>(v)]) --degree[static_cast<std::size_t>(w)];
        enumerate_rec(dag, degree, prefix, used, out);
        for (int w : dag.adjacency[static_cast<std::size_t>(v)]) ++degree[static_cast<std::size_t>(w)];
        prefix.pop_back();
        used[static_cast<std::size_t>(v)] = false;
    }
}

}  // namespace

std::vector<Permutation> enumerate_consistent(const PartialOrderDag& dag) {
    check_acyclic(dag);
    std::vector<Permutation> out;
    std::vector<int> degree = dag.in_degree;
    std::vector<bool> used(static_cast<std::size_t>(dag.n), false);
    Permutation prefix;
    prefix.reserve(static_cast<std::size_t>(dag.n));
    enumerate_rec(dag, degree, prefix, used, out);
    return out;
}

Permutation select_candidate(const std::vector<Permutation>& candidates, const Permutation& ansatz) {
    if (candidates.empty())
        throw std::invalid_argument("select_candidate: candidate library exhausted");
    const Permutation* best = nullptr;
    int best_distance = 0;
    for (const Permutation& c : candidates) {
        int d = kendall_tau_distance(c, ansatz);
        if (!best || d < best_distance || (d == best_distance && c < *best)) {
            best = &c;
            best_distance = d;
        }
    }
    return *best;
}

ErrorLibrary build_error_library(const std::vector<Permutation>& candidates,
                                 const Permutation& perceived, const EncoderConfig& cfg,
                                 int stage) {
    ErrorLibrary lib;
    lib.stage = stage;
    lib.entries.reserve(candidates.size());
    for (const Permutation& c : candidates)
        lib.entries.emplace_back(c, tapped_set_oracle(c, perceived, cfg));
    return lib;
}

void export_dag(std::ostream& out, const PartialOrderDag& dag) {
    for (int u = 0; u < dag.n; ++u)
        for (int v : dag.adjacency[static_cast<std::size_t>(u)])
            out << (u + 1) << " -> " << (v + 1) << '\n';
}

PorState::PorState(DelayLineModel& model, int group_id, PorConfig cfg)
    : model_(&model), group_id_(group_id), cfg_(std::move(cfg)) {
    const std::vector<int> slots = group_physical_slots(model, group_id);
    if (slots.empty()) throw std::invalid_argument("por: group has no cells");
    const int units = static_cast<int>(slots.size()) / kTapsPerCell;
    units_.resize(static_cast<std::size_t>(units));
    for (UnitState& unit : units_) {
        unit.perceived = identity_permutation(kTapsPerCell);
        unit.stage = 0;
    }
}

Permutation PorState::group_perceived() const {
    Permutation p;
    p.reserve(units_.size() * kTapsPerCell);
    for (std::size_t u = 0; u < units_.size(); ++u)
        for (int slot : units_[u].perceived)
            p.push_back(static_cast<int>(u) * kTapsPerCell + slot);
    return p;
}

GroupSelector PorState::selector() const { return GroupSelector{group_id_, group_perceived()}; }

bool PorState::converged() const {
    for (const UnitState& unit : units_)
        if (unit.stage == 0 || unit.candidates.size() != 1) return false;
    return true;
}

namespace {

// Observed per-unit tapped pattern in the unit's current slot frame.
TappedSet unit_pattern(const TappedPattern& pattern, int unit) {
    TappedSet t;
    t.n = kTapsPerCell;
    for (int i = 0; i < kTapsPerCell; ++i)
        if (pattern.tapped[static_cast<std::size_t>(unit * kTapsPerCell + i)]) t.set(i);
    return t;
}

Permutation pattern_library_ansatz(const std::map<Permutation, int>& frequency,
                                   const Permutation& perceived) {
    const Permutation* best = nullptr;
    int best_count = 0;
    for (const auto& [correction, count] : frequency) {
        if (count > best_count || (best && count == best_count && correction < *best)) {
            best = &correction;
            best_count = count;
        }
    }
    if (!best) return perceived;
    return compose(perceived, *best);
}

}  // namespace

PorIterationReport por_iteration(PorState& state) {
    const PorConfig& cfg = state.config();
    PorIterationReport report;
    report.iteration = state.iteration() + 1;

    const Line line = group_line(state.model(), state.selector());
    const DensityHistogram hist =
        run_density_test(line, cfg.shots, cfg.seed_base + static_cast<std::uint64_t>(state.iteration()),
                         cfg.encoder, Attribution::Prefix);
    const TappedPattern observed = tapped_pattern(hist, cfg.tapped_threshold);
    report.tapped_fraction = observed.fraction();

    // Enumerations repeat heavily across units (missing-code patterns are
    // few), so cache the DAG step per observed pattern.
    std::map<std::uint32_t, std::vector<Permutation>> dag_candidates;
    std::map<Permutation, int> correction_frequency;

    for (int u = 0; u < state.unit_count(); ++u) {
        UnitState& unit = state.units()[static_cast<std::size_t>(u)];
        const TappedSet obs = unit_pattern(observed, u);
        if (!obs.tapped(kTapsPerCell - 1)) report.unit_boundaries_clean = false;

        if (unit.stage == 0) {
            auto it = dag_candidates.find(obs.mask);
            if (it == dag_candidates.end())
                it = dag_candidates.emplace(obs.mask, enumerate_consistent(build_dag(obs))).first;
            // DAG orderings are relative to the current scan order; lift them
            // to the unit's slot frame.
            unit.candidates.clear();
            unit.candidates.reserve(it->second.size());
            for (const Permutation& rel : it->second)
                unit.candidates.push_back(compose(unit.perceived, rel));
            std::sort(unit.candidates.begin(), unit.candidates.end());
            unit.stage = 1;
        } else {
            const ErrorLibrary lib =
                build_error_library(unit.candidates, unit.perceived, cfg.encoder, unit.stage);
            std::vector<Permutation> matches;
            for (const auto& [candidate, predicted] : lib.entries)
                if (predicted == obs) matches.push_back(candidate);
            if (matches.empty())
                throw PorNoMatch(u, "por: unit " + std::to_string(u + 1) +
                                        " observation " + obs.to_string() +
                                        " matches no library entry");
            unit.candidates = std::move(matches);
            ++unit.stage;
        }

        Permutation ansatz = identity_permutation(kTapsPerCell);
        if (cfg.ansatz_mode == AnsatzMode::PatternLibrary)
            ansatz = pattern_library_ansatz(correction_frequency, unit.perceived);
        const Permutation selected = select_candidate(unit.candidates, ansatz);
        if (cfg.ansatz_mode == AnsatzMode::PatternLibrary)
            ++correction_frequency[compose(inverse(unit.perceived), selected)];
        unit.perceived = selected;

        report.candidate_counts.push_back(unit.candidates.size());
        if (unit.candidates.size() == 1) ++report.converged_units;
    }

    state.set_iteration(state.iteration() + 1);
    return report;
}

std::vector<PorIterationReport> run_por(std::vector<PorState*> states, int iterations) {
    std::vector<PorIterationReport> reports;
    for (int k = 0; k < iterations; ++k) {
        bool all_done = true;
        for (PorState* s : states)
            if (!s->converged()) all_done = false;
        if (all_done && k > 0) break;

        for (PorState* s : states) reports.push_back(por_iteration(*s));

        // Simulated resynthesis, once per distinct model per round.
        std::set<DelayLineModel*> models;
        for (PorState* s : states) models.insert(&s->mutable_model());
        for (DelayLineModel* m : models) m->resynthesize();
    }
    return reports;
}

bool check_unit_isolation(const DelayLineModel& model, int group_id) {
    const std::vector<int> slots = group_physical_slots(model, group_id);
    const int units = static_cast<int>(slots.size()) / kTapsPerCell;
    double prev_max = -1.0;
    for (int u = 0; u < units; ++u) {
        double lo = model.clock_period_ps(), hi = 0.0;
        for (int i = 0; i < kTapsPerCell; ++i) {
            double p = model.position(slots[static_cast<std::size_t>(u * kTapsPerCell + i)]);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        if (lo <= prev_max) return false;
        prev_max = hi;
    }
    return true;
}

void write_checkpoint(std::ostream& out, const PorState& state) {
    out << "group " << state.group_id() << " iteration " << state.iteration() << " units "
        << state.unit_count() << '\n';
    for (int u = 0; u < state.unit_count(); ++u) {
        const UnitState& unit = state.units()[static_cast<std::size_t>(u)];
        out << "unit " << (u + 1) << " stage " << unit.stage << " perceived";
        for (int slot : unit.perceived) out << ' ' << (slot + 1);
        out << '\n';
        out << "candidates " << unit.candidates.size() << '\n';
        for (const Permutation& c : unit.candidates) {
            for (std::size_t i = 0; i < c.size(); ++i) out << (i ? " " : "") << (c[i] + 1);
            out << '\n';
        }
    }
}

void read_checkpoint(std::istream& in, PorState& state) {
    std::string word;
    int group = 0, iteration = 0, units = 0;
    in >> word >> group >> word >> iteration >> word >> units;
    if (!in || units != state.unit_count())
        throw std::runtime_error("por checkpoint: header mismatch");
    if (group != state.group_id()) throw std::runtime_error("por checkpoint: group mismatch");
    state.set_iteration(iteration);
    for (int u = 0; u < units; ++u) {
        UnitState& unit = state.units()[static_cast<std::size_t>(u)];
        int index = 0, stage = 0;
        in >> word >> index >> word >> stage >> word;
        unit.stage = stage;
        unit.perceived.assign(kTapsPerCell, 0);
        for (int& slot : unit.perceived) {
            in >> slot;
            --slot;
        }
        std::size_t count = 0;
        in >> word >> count;
        unit.candidates.assign(count, Permutation(kTapsPerCell, 0));
        for (Permutation& c : unit.candidates)
            for (int& slot : c) {
                in >> slot;
                --slot;
            }
        if (!in) throw std::runtime_error("por checkpoint: truncated record");
    }
}

}  // namespace tdc
