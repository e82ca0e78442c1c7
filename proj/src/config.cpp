#include "tsepdm/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tsepdm::config {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double* field(plant::PlantParams& p, const std::string& key) {
    static const std::map<std::string, double plant::PlantParams::*> fields{
        {"L1", &plant::PlantParams::L1}, {"L2", &plant::PlantParams::L2},
        {"C1", &plant::PlantParams::C1}, {"C2", &plant::PlantParams::C2},
        {"R1", &plant::PlantParams::R1}, {"R2", &plant::PlantParams::R2},
        {"k", &plant::PlantParams::k},   {"Vg", &plant::PlantParams::Vg},
        {"Vo", &plant::PlantParams::Vo}, {"fs", &plant::PlantParams::fs},
    };
    const auto it = fields.find(key);
    return it == fields.end() ? nullptr : &(p.*(it->second));
}

double parse_number(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(context + ": cannot parse number '" + text + "'");
    }
    return value;
}

void assign(plant::PlantParams& p, const std::string& line, const std::string& context) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw ConfigError(context + ": expected 'symbol = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    double* target = field(p, key);
    if (target == nullptr) {
        throw ConfigError(context + ": unknown symbol '" + key + "'");
    }
    *target = parse_number(trim(line.substr(eq + 1)), context);
}

}  // namespace

plant::PlantParams parse_plant_params(std::istream& in, const plant::PlantParams& base) {
    plant::PlantParams p = base;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        assign(p, line, "line " + std::to_string(number));
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

plant::PlantParams load_plant_params(const std::filesystem::path& path, const plant::PlantParams& base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    return parse_plant_params(in, base);
}

void write_plant_params(std::ostream& out, const plant::PlantParams& p) {
    out << "L1 = " << format_double(p.L1) << "\n"
        << "L2 = " << format_double(p.L2) << "\n"
        << "C1 = " << format_double(p.C1) << "\n"
        << "C2 = " << format_double(p.C2) << "\n"
        << "R1 = " << format_double(p.R1) << "\n"
        << "R2 = " << format_double(p.R2) << "\n"
        << "k = " << format_double(p.k) << "\n"
        << "Vg = " << format_double(p.Vg) << "\n"
        << "Vo = " << format_double(p.Vo) << "\n"
        << "fs = " << format_double(p.fs) << "\n";
}

plant::PlantParams apply_overrides(plant::PlantParams params, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        assign(params, o, "override '" + o + "'");
    }
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return params;
}

std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return s.str();
}

TableWriter::TableWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << (i ? "," : "") << header[i];
    }
    out_ << "\n";
}

TableWriter& TableWriter::cell(double v) { return cell(format_double(v)); }

TableWriter& TableWriter::cell(long long v) { return cell(std::to_string(v)); }

TableWriter& TableWriter::cell(const std::string& v) {
    out_ << (in_row_ ? "," : "") << v;
    ++in_row_;
    return *this;
}

void TableWriter::end_row() {
    if (in_row_ != columns_) {
        throw std::logic_error("table row has wrong number of cells");
    }
    out_ << "\n";
    in_row_ = 0;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write manifest " + path.string());
    }
    for (const auto& [k, v] : manifest) {
        out << k << " = " << v << "\n";
    }
}

}  // namespace tsepdm::config
