#pragma once

// Key-value plant configuration ("symbol = value", SI units, '#' comments)
// and delimiter-separated table output.

#include "tsepdm/plant.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tsepdm::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses L1, L2, C1, C2, R1, R2, k, Vg, Vo, fs; missing keys keep the
/// defaults of `base`, unknown keys are rejected.
plant::PlantParams parse_plant_params(std::istream& in, const plant::PlantParams& base = {});
plant::PlantParams load_plant_params(const std::filesystem::path& path,
                                     const plant::PlantParams& base = {});

void write_plant_params(std::ostream& out, const plant::PlantParams& params);

/// Applies "symbol=value" overrides.
plant::PlantParams apply_overrides(plant::PlantParams params, const std::vector<std::string>& overrides);

/// Comma-separated table with one header row. Numbers use max_digits10.
class TableWriter {
public:
    TableWriter(std::ostream& out, const std::vector<std::string>& header);

    TableWriter& cell(double v);
    TableWriter& cell(long long v);
    TableWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    TableWriter& cell(const std::string& v);
    void end_row();

private:
    std::ostream& out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

/// Ordered key/value manifest written as "key = value" lines.
using Manifest = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

std::string format_double(double v);

}  // namespace tsepdm::config
