#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace pram::testing {

std::filesystem::path models_dir() { return PRAM_MODELS_DIR; }

Population outbreak_population() { return load_population(models_dir() / "outbreak_population.json"); }

Population two_school_population() { return load_population(models_dir() / "two_school_population.json"); }

RuleSet core_rules(const Schema& schema) {
    return parse_rules(read_text_file(models_dir() / "flu_core.rules"), schema);
}

RuleSet flu_rules(const Schema& schema) { return parse_rules(read_text_file(models_dir() / "flu.rules"), schema); }

GroupSignature outbreak_sig(const std::string& flu, const std::string& mood, const std::string& location) {
    return GroupSignature({AttributeValue(flu), AttributeValue(mood), AttributeValue("m")},
                          {SiteId(location), SiteId("adams")});
}

double max_relative_mass_drift(const Trajectory& t, double reference) {
    double worst = 0.0;
    for (const auto& row : t.rows) worst = std::max(worst, std::abs(row.total_mass - reference) / reference);
    return worst;
}

}  // namespace pram::testing
