#pragma once

// Reference models that share no code with the engine: agent states are
// plain attribute maps, the flu rules are hand-written C++, and the merge is
// a map accumulation. Used to freeze expected values and as property oracles.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pram::oracle {

using Rational = boost::multiprecision::cpp_rational;
using Agent = std::map<std::string, std::string>;

template <class Num>
using State = std::map<Agent, Num>;

template <class Num>
using Branches = std::vector<std::pair<Num, Agent>>;  // probability, attribute overrides

template <class Num>
Num frac(int num, int den) {
    return Num(num) / Num(den);
}

/// Mass share at `agent`'s `relation` target whose flu is e.
template <class Num>
Num exposed_share(const State<Num>& s, const Agent& agent, const std::string& relation) {
    Num total(0), exposed(0);
    for (const auto& [a, m] : s) {
        if (a.at(relation) != agent.at(relation)) continue;
        total += m;
        if (a.at("flu") == "e") exposed += m;
    }
    return exposed / total;
}

template <class Num>
Branches<Num> flu_progression(const State<Num>& s, const Agent& g) {
    const std::string& flu = g.at("flu");
    if (flu == "s") {
        const Num p = exposed_share(s, g, "has_location");
        return {{p, {{"flu", "e"}, {"mood", "annoyed"}}}, {Num(1) - p, {{"flu", "s"}}}};
    }
    if (flu == "e")
        return {{frac<Num>(2, 10), {{"flu", "r"}, {"mood", "happy"}}},
                {frac<Num>(5, 10), {{"flu", "e"}, {"mood", "bored"}}},
                {frac<Num>(3, 10), {{"flu", "e"}, {"mood", "annoyed"}}}};
    if (flu == "r") return {{frac<Num>(9, 10), {{"flu", "r"}}}, {frac<Num>(1, 10), {{"flu", "s"}}}};
    return {};
}

template <class Num>
Branches<Num> flu_location(const State<Num>&, const Agent& g) {
    const std::string& flu = g.at("flu");
    const std::string& here = g.at("has_location");
    if (flu == "e" && g.at("income") == "l")
        return {{frac<Num>(1, 10), {{"has_location", "home"}}}, {frac<Num>(9, 10), {{"has_location", here}}}};
    if (flu == "e" && g.at("income") == "m")
        return {{frac<Num>(6, 10), {{"has_location", "home"}}}, {frac<Num>(4, 10), {{"has_location", here}}}};
    if (flu == "r")
        return {{frac<Num>(8, 10), {{"has_location", g.at("has_school")}}},
                {frac<Num>(2, 10), {{"has_location", here}}}};
    return {};
}

template <class Num>
Branches<Num> pregnancy(const State<Num>&, const Agent& g) {
    if (g.count("sex") && g.at("sex") == "f" && g.at("pregnant") == "no")
        return {{frac<Num>(1, 100), {{"pregnant", "yes"}}}, {frac<Num>(99, 100), {{"pregnant", "no"}}}};
    return {};
}

template <class Num>
using OracleRule = std::function<Branches<Num>(const State<Num>&, const Agent&)>;

/// One synchronous redistribution over the whole state.
template <class Num>
State<Num> step(const State<Num>& s, const std::vector<OracleRule<Num>>& rules) {
    State<Num> next = s;
    for (const auto& [agent, mass] : s) {
        std::vector<Branches<Num>> dists;
        for (const auto& r : rules)
            if (auto d = r(s, agent); !d.empty()) dists.push_back(std::move(d));
        if (dists.empty()) continue;
        next[agent] -= mass;  // zero the spawning group
        // enumerate the joint branches recursively
        std::function<void(std::size_t, Num, Agent)> expand = [&](std::size_t k, Num m, Agent a) {
            if (k == dists.size()) {
                next[a] += m;
                return;
            }
            for (const auto& [p, overrides] : dists[k]) {
                Agent b = a;
                for (const auto& [key, v] : overrides) b[key] = v;
                expand(k + 1, m * p, b);
            }
        };
        expand(0, mass, agent);
    }
    return next;
}

/// Monte Carlo agent simulation of one step of the two-rule flu model:
/// every agent independently samples one branch per applicable rule.
/// Returns the histogram of final agent states over all trials.
std::map<Agent, std::uint64_t> simulate_agents_one_step(const std::vector<Agent>& agents, std::uint64_t trials,
                                                        std::uint64_t seed);

/// Upper-tail probability of a chi-squared statistic.
double chi_squared_p_value(double statistic, double dof);

}  // namespace pram::oracle
