#pragma once

#include "pram/errors.hpp"
#include "pram/relational.hpp"
#include "pram/rules.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pram {

/// A candidate signature and mass spawned by one extant group, pending the
/// merge step. `source` is the spawning group's signature.
struct PotentialGroup {
    GroupSignature signature;
    double mass = 0.0;
    GroupSignature source;
};

/// Applicable rules in canonical (name) order. Products over rule
/// distributions are formed in this order so that results do not depend on
/// the order rules appear in a RuleSet.
std::vector<const Rule*> canonical_rule_order(const RuleSet& rules);

/// Cartesian product of the distributions of every rule that applies to
/// `group`. Entries of the product that land on the same signature are summed.
/// Returns an empty list when no rule applies or the group has zero mass.
/// Throws ActionConflictError when two rules write one attribute with
/// different values in the same joint branch.
std::vector<PotentialGroup> apply_rules_to_group(const RuleSet& rules, const Group& group,
                                                 const Population& snapshot);
std::vector<PotentialGroup> apply_rules_to_group(std::span<const Rule* const> ordered_rules, const Group& group,
                                                 const Population& snapshot);

struct RedistributeOptions {
    /// Drop groups whose mass ends below this value. Disabled by default.
    std::optional<double> prune_epsilon;
};

/// Zeroes every touched extant group, adds each potential group's mass to the
/// extant group with the same signature, and promotes the rest to extant
/// groups. Contributions are summed in (target, source) signature order, so
/// the result is bitwise independent of the order of `potentials`. The
/// returned population has iteration() + 1.
Population redistribute(const Population& pop, std::vector<PotentialGroup> potentials,
                        std::span<const GroupSignature> touched, const RedistributeOptions& options = {});

struct StepOptions {
    RedistributeOptions redistribute;
    /// Order in which groups are visited (a permutation of group indices);
    /// empty means canonical order. Has no effect on the result.
    std::vector<std::size_t> processing_order;
};

/// One synchronous iteration: every rule is applied to every extant group
/// against the frozen snapshot `pop`, then one redistribution. The group loop
/// runs under OpenMP when available.
Population step(const Population& pop, const RuleSet& rules, const StepOptions& options = {});

/// Single-threaded reference implementation of step(); bitwise-identical
/// results.
Population step_serial(const Population& pop, const RuleSet& rules, const StepOptions& options = {});

/// Caps the number of OpenMP threads used by step(); n <= 0 restores the
/// default. No-op without OpenMP.
void set_max_threads(int n);
int max_threads();

/// Site-conditioned proportion query recorded each iteration.
struct Probe {
    std::string name;
    std::string relation;
    SiteId site;
    Condition predicate;
};

struct Observation {
    std::uint64_t iteration = 0;
    double total_mass = 0.0;
    std::size_t nu = 0;
    std::vector<double> probes;
};

struct Trajectory {
    std::vector<std::string> probe_names;
    std::vector<Observation> rows;
};

/// Proportion of the mass related to the probe's site that satisfies its
/// predicate; NaN when no mass is there.
double observe(const Population& pop, const Probe& probe);
Observation observe_all(const Population& pop, std::span<const Probe> probes);

struct RunOptions {
    StepOptions step;
    bool serial = false;
    /// Called for every observation as soon as it is recorded.
    std::function<void(const Observation&)> on_observation;
    /// Called with each new population (including the initial one).
    std::function<void(const Population&)> on_population;
};

struct RunResult {
    Trajectory trajectory;
    Population final_population;
};

/// Raised by run() when a step fails; carries the observations recorded so far.
class RunError : public Error {
public:
    RunError(const std::string& what, std::string cause_kind, Trajectory partial)
        : Error(what), cause_kind_(std::move(cause_kind)), partial_(std::move(partial)) {}

    const char* kind() const noexcept override { return "RunError"; }
    const std::string& cause_kind() const noexcept { return cause_kind_; }
    const Trajectory& partial() const noexcept { return partial_; }

private:
    std::string cause_kind_;
    Trajectory partial_;
};

/// Runs `iterations` steps, observing the initial population and every step.
RunResult run(const Population& pop, const RuleSet& rules, std::uint64_t iterations, std::span<const Probe> probes,
              const RunOptions& options = {});

}  // namespace pram
