#include "pram/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pram {

std::vector<const Rule*> canonical_rule_order(const RuleSet& rules) {
    std::vector<const Rule*> out;
    out.reserve(rules.rules.size());
    for (const auto& r : rules.rules) out.push_back(&r);
    std::stable_sort(out.begin(), out.end(), [](const Rule* a, const Rule* b) { return a->name < b->name; });
    return out;
}

std::vector<PotentialGroup> apply_rules_to_group(const RuleSet& rules, const Group& group,
                                                 const Population& snapshot) {
    const auto ordered = canonical_rule_order(rules);
    return apply_rules_to_group(ordered, group, snapshot);
}

std::vector<PotentialGroup> apply_rules_to_group(std::span<const Rule* const> ordered_rules, const Group& group,
                                                 const Population& snapshot) {
    if (group.mass == 0.0) return {};

    struct Applied {
        const Rule* rule;
        Distribution dist;
        // writes resolved per branch against the source signature
        std::vector<std::vector<Assignment>> writes;
    };
    std::vector<Applied> applied;
    for (const Rule* rule : ordered_rules) {
        auto dist = evaluate_rule(*rule, group, snapshot);
        if (!dist) continue;
        Applied a{rule, std::move(*dist), {}};
        for (const auto& w : a.dist) a.writes.push_back(resolve_actions(*w.actions, group.signature));
        applied.push_back(std::move(a));
    }
    if (applied.empty()) return {};

    std::vector<PotentialGroup> out;
    std::unordered_map<GroupSignature, std::size_t> slot;
    std::vector<std::size_t> choice(applied.size(), 0);
    std::vector<Assignment> joint;
    std::vector<const Rule*> writer;

    for (;;) {
        double mass = group.mass;
        joint.clear();
        writer.clear();
        for (std::size_t a = 0; a < applied.size(); ++a) {
            mass *= applied[a].dist[choice[a]].probability;
            for (const Assignment& w : applied[a].writes[choice[a]]) {
                auto prev = std::find_if(joint.begin(), joint.end(), [&](const Assignment& x) {
                    return x.kind == w.kind && x.index == w.index;
                });
                if (prev == joint.end()) {
                    joint.push_back(w);
                    writer.push_back(applied[a].rule);
                } else if (prev->value != w.value) {
                    const Rule* other = writer[static_cast<std::size_t>(prev - joint.begin())];
                    const auto& names =
                        w.kind == AttributeKind::Feature ? snapshot.schema().features : snapshot.schema().relations;
                    throw ActionConflictError("rules '" + other->name + "' and '" + applied[a].rule->name +
                                              "' set '" + names.at(w.index) + "' to '" + prev->value + "' and '" +
                                              w.value + "' for group " +
                                              to_string(group.signature, snapshot.schema()));
                }
            }
        }

        GroupSignature target = apply_assignments(group.signature, joint);
        if (auto it = slot.find(target); it != slot.end()) {
            out[it->second].mass += mass;
        } else {
            slot.emplace(target, out.size());
            out.push_back({std::move(target), mass, group.signature});
        }

        // Odometer over branch choices; the last rule varies fastest.
        std::size_t a = applied.size();
        while (a > 0) {
            --a;
            if (++choice[a] < applied[a].dist.size()) break;
            choice[a] = 0;
            if (a == 0) return out;
        }
    }
}

Population redistribute(const Population& pop, std::vector<PotentialGroup> potentials,
                        std::span<const GroupSignature> touched, const RedistributeOptions& options) {
    std::sort(potentials.begin(), potentials.end(), [](const PotentialGroup& a, const PotentialGroup& b) {
        if (auto c = a.signature <=> b.signature; c != 0) return c < 0;
        return a.source < b.source;
    });

    // Contributions per target signature, summed in canonical order.
    std::vector<Group> incoming;
    for (auto& p : potentials) {
        if (!incoming.empty() && incoming.back().signature == p.signature)
            incoming.back().mass += p.mass;
        else
            incoming.push_back({std::move(p.signature), p.mass});
    }

    std::vector<char> zeroed(pop.size(), 0);
    for (const auto& sig : touched)
        if (auto i = pop.index_of(sig)) zeroed[*i] = 1;

    const auto extant = pop.groups();
    std::vector<Group> next;
    next.reserve(extant.size() + incoming.size());
    std::size_t e = 0;
    std::size_t n = 0;
    while (e < extant.size() || n < incoming.size()) {
        const bool take_extant =
            n == incoming.size() || (e < extant.size() && extant[e].signature <= incoming[n].signature);
        if (take_extant) {
            Group g{extant[e].signature, zeroed[e] ? 0.0 : extant[e].mass};
            if (n < incoming.size() && incoming[n].signature == g.signature) g.mass += incoming[n++].mass;
            next.push_back(std::move(g));
            ++e;
        } else {
            if (incoming[n].mass != 0.0) next.push_back(std::move(incoming[n]));
            ++n;
        }
    }

    if (options.prune_epsilon) {
        const double eps = *options.prune_epsilon;
        std::erase_if(next, [eps](const Group& g) { return g.mass < eps; });
    }
    return Population::from_canonical(pop.schema(), std::move(next), pop.iteration() + 1);
}

namespace {

std::vector<std::size_t> visit_order(const Population& pop, const StepOptions& options) {
    if (options.processing_order.empty()) {
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        return order;
    }
    std::vector<std::size_t> check = options.processing_order;
    std::sort(check.begin(), check.end());
    bool ok = check.size() == pop.size();
    for (std::size_t i = 0; ok && i < check.size(); ++i) ok = check[i] == i;
    if (!ok) throw Error("processing_order is not a permutation of the group indices");
    return options.processing_order;
}

Population finish_step(const Population& pop, std::vector<std::vector<PotentialGroup>>& per_group,
                       const StepOptions& options) {
    std::vector<PotentialGroup> potentials;
    std::vector<GroupSignature> touched;
    for (std::size_t i = 0; i < per_group.size(); ++i) {
        if (per_group[i].empty()) continue;
        touched.push_back(pop.groups()[i].signature);
        for (auto& p : per_group[i]) potentials.push_back(std::move(p));
    }
    return redistribute(pop, std::move(potentials), touched, options.redistribute);
}

int g_max_threads = 0;

// Below this many groups a parallel region costs more than it saves.
constexpr std::int64_t kParallelMinGroups = 64;

}  // namespace

Population step_serial(const Population& pop, const RuleSet& rules, const StepOptions& options) {
    const auto ordered = canonical_rule_order(rules);
    std::vector<std::vector<PotentialGroup>> per_group(pop.size());
    for (std::size_t i : visit_order(pop, options))
        per_group[i] = apply_rules_to_group(ordered, pop.groups()[i], pop);
    return finish_step(pop, per_group, options);
}

Population step(const Population& pop, const RuleSet& rules, const StepOptions& options) {
    const auto ordered = canonical_rule_order(rules);
    const auto order = visit_order(pop, options);
    const auto n = static_cast<std::int64_t>(order.size());
    std::vector<std::vector<PotentialGroup>> per_group(pop.size());
    std::vector<std::exception_ptr> errors(pop.size());

#ifdef _OPENMP
    const int threads = g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads) if (n >= kParallelMinGroups)
#endif
    for (std::int64_t k = 0; k < n; ++k) {
        const std::size_t i = order[static_cast<std::size_t>(k)];
        try {
            per_group[i] = apply_rules_to_group(ordered, pop.groups()[i], pop);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    // Report the failure of the lowest-indexed group, as the serial path would.
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return finish_step(pop, per_group, options);
}

void set_max_threads(int n) { g_max_threads = n > 0 ? n : 0; }

int max_threads() {
#ifdef _OPENMP
    return g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
#else
    return 1;
#endif
}

double observe(const Population& pop, const Probe& probe) {
    const auto r = pop.schema().relation_index(probe.relation);
    if (!r) throw SchemaError("probe '" + probe.name + "': unknown relation '" + probe.relation + "'");
    if (!pop.schema().has_site(probe.site))
        throw UnknownSiteError("probe '" + probe.name + "': unknown site '" + probe.site.str() + "'");
    std::vector<Conjunct> conj;
    for (const auto& t : probe.predicate.tests) conj.push_back(t.conjunct());
    try {
        return proportion_at_site(pop, probe.site, *r, conj);
    } catch (const EmptySiteError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

Observation observe_all(const Population& pop, std::span<const Probe> probes) {
    Observation o;
    o.iteration = pop.iteration();
    o.total_mass = pop.total_mass();
    o.nu = pop.size();
    for (const auto& p : probes) o.probes.push_back(observe(pop, p));
    return o;
}

RunResult run(const Population& pop, const RuleSet& rules, std::uint64_t iterations, std::span<const Probe> probes,
              const RunOptions& options) {
    if (iterations < 1) throw Error("iterations must be at least 1");
    RunResult result;
    for (const auto& p : probes) result.trajectory.probe_names.push_back(p.name);

    auto record = [&](const Population& current) {
        result.trajectory.rows.push_back(observe_all(current, probes));
        if (options.on_population) options.on_population(current);
        if (options.on_observation) options.on_observation(result.trajectory.rows.back());
    };

    Population current = pop;
    record(current);
    for (std::uint64_t it = 0; it < iterations; ++it) {
        try {
            current = options.serial ? step_serial(current, rules, options.step) : step(current, rules, options.step);
        } catch (const Error& e) {
            throw RunError("iteration " + std::to_string(current.iteration() + 1) + ": " + e.what(), e.kind(),
                           std::move(result.trajectory));
        }
        record(current);
    }
    result.final_population = std::move(current);
    return result;
}

}  // namespace pram
