#pragma once

#include <string>

#include "piv/study.hpp"

namespace piv {

enum class direction_choice { automatic, positive, negative };

// A full analysis input as carried by the JSON config:
// { "study": {...}, "belief": {...}, "threshold": {...}, "direction": "auto" }.
// Absent belief sides are unbounded; the threshold defaults to statistical alpha 0.05.
struct analysis_config {
    observed_study study;
    counterfactual_belief belief;
    threshold_spec threshold;
    direction_choice direction = direction_choice::automatic;
};

// Throws validation_error naming the offending field (dotted path into the document).
// Unknown keys are rejected so typos cannot silently fall back to defaults.
analysis_config parse_config_json(const std::string& text);

// Reads and parses a config file; throws std::ios_base::failure on I/O problems.
analysis_config load_config_file(const std::string& path);

// Applies the automatic rule (sign of the observed estimate) unless overridden.
effect_direction resolve_direction(const analysis_config& c);

const char* direction_name(effect_direction d);

}  // namespace piv
