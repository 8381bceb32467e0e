// Parallel step() against the serial reference on synthetic multi-school
// populations of the flu model.

#include "pram/dsl.hpp"
#include "pram/engine.hpp"
#include "pram/io.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

namespace {

pram::Population synthetic_population(int schools) {
    pram::Schema schema{{"flu", "sex", "income", "pregnant", "mood"}, {"has_location", "has_school"}, {}};
    schema.sites.emplace_back("home");
    for (int s = 0; s < schools; ++s) schema.sites.emplace_back("school" + std::to_string(s));
    schema.normalize();

    std::vector<pram::Group> groups;
    double mass = 1.0;
    for (int s = 0; s < schools; ++s) {
        const std::string school = "school" + std::to_string(s);
        for (const char* flu : {"s", "e", "r"})
            for (const char* sex : {"f", "m"})
                for (const char* income : {"l", "m"})
                    for (const char* pregnant : {"no", "yes"})
                        for (const char* mood : {"happy", "annoyed", "bored"})
                            for (const std::string& at : {school, std::string("home")}) {
                                mass = mass * 1.37 + 0.5;
                                if (mass > 500) mass -= 499;
                                groups.push_back({pram::GroupSignature({pram::AttributeValue(flu),
                                                                        pram::AttributeValue(sex),
                                                                        pram::AttributeValue(income),
                                                                        pram::AttributeValue(pregnant),
                                                                        pram::AttributeValue(mood)},
                                                                       {pram::SiteId(at), pram::SiteId(school)}),
                                                  mass});
                            }
    }
    return pram::Population(schema, std::move(groups));
}

pram::RuleSet flu_rules(const pram::Schema& schema) {
    return pram::parse_rules(pram::read_text_file(std::filesystem::path(PRAM_MODELS_DIR) / "flu.rules"), schema);
}

template <pram::Population (*Step)(const pram::Population&, const pram::RuleSet&, const pram::StepOptions&)>
void BM_Step(benchmark::State& state) {
    const auto pop = synthetic_population(static_cast<int>(state.range(0)));
    const auto rules = flu_rules(pop.schema());
    for (auto _ : state) benchmark::DoNotOptimize(Step(pop, rules, {}));
    state.counters["groups"] = static_cast<double>(pop.size());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pop.size()));
}

}  // namespace

BENCHMARK(BM_Step<pram::step_serial>)->Name("step_serial")->Arg(4)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Step<pram::step>)->Name("step_parallel")->Arg(4)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
