#pragma once

#include <filesystem>
#include <string>

namespace hte {

// Renders one of the emitted CSV kinds ("subgroup_ate", "outcome_ite_curves",
// "calibration", "roc", "ite_density", "benefit_harm_density") as a
// self-contained SVG. Purely cosmetic; no numbers originate here.
void emit_svg_chart(const std::string& kind, const std::filesystem::path& csv_in,
                    const std::filesystem::path& svg_out);

}  // namespace hte
