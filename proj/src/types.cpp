#include "fairlens/types.hpp"

#include <sstream>

#include "fairlens/dataset.hpp"
#include "fairlens/error.hpp"

namespace fairlens {

ThresholdMap ThresholdMap::uniform(const std::vector<std::string>& groups, double cutoff,
                                   double y_star) {
    ThresholdMap map;
    for (const auto& group : groups) map.per_group_cutoff[group] = cutoff;
    map.target_cutoff = y_star;
    return map;
}

std::string ThresholdMap::to_text() const {
    std::ostringstream out;
    for (const auto& [group, cutoff] : per_group_cutoff)
        out << group << ',' << format_double(cutoff) << '\n';
    out << "__target__," << format_double(target_cutoff) << '\n';
    return out.str();
}

ThresholdMap ThresholdMap::from_text(const std::string& text) {
    ThresholdMap map;
    bool saw_target = false;
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw ParseError("threshold map line " + std::to_string(row) +
                             ": expected 'group,cutoff'");
        const std::string label = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        double cutoff = 0.0;
        try {
            std::size_t used = 0;
            cutoff = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ParseError("threshold map line " + std::to_string(row) +
                             ": bad cutoff '" + value + "'");
        }
        if (label == "__target__") {
            map.target_cutoff = cutoff;
            saw_target = true;
        } else {
            map.per_group_cutoff[label] = cutoff;
        }
    }
    if (!saw_target) throw ParseError("threshold map is missing the __target__ line");
    if (map.per_group_cutoff.empty())
        throw ParseError("threshold map has no group cutoffs");
    return map;
}

} // namespace fairlens
