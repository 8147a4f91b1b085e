#include "results.hpp"

#include <charconv>
#include <cstdlib>

#include "slelab/io.hpp"

namespace slelab::cli {

namespace {

std::string config_line(const Config& config) {
    std::string line = "# config:";
    for (const auto& [k, v] : config) line += " " + k + "=" + v;
    return line + "\r\n";
}

double parse_double(const std::string& s, const char* column) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw SchemaError(std::string("bad number in column ") + column);
    return v;
}

std::uint64_t parse_count(const std::string& s, const char* column) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw SchemaError(std::string("bad integer in column ") + column);
    }
    return v;
}

EstimateRow estimate_from_fields(const std::vector<std::string>& f) {
    EstimateRow r;
    r.method = f[0];
    r.observable = f[1];
    r.kappa = parse_double(f[2], "kappa");
    r.x0 = parse_double(f[3], "x0");
    r.w1 = parse_double(f[4], "w1");
    r.w2 = parse_double(f[5], "w2");
    r.s = parse_double(f[6], "s");
    r.mean = parse_double(f[7], "mean");
    r.std_error = parse_double(f[8], "stderr");
    r.n = parse_count(f[9], "n");
    r.seed = parse_count(f[10], "seed");
    r.first = parse_count(f[11], "first");
    if (!f[12].empty()) r.target = parse_double(f[12], "target");
    return r;
}

WalkerRow walker_from_fields(const std::vector<std::string>& f) {
    WalkerRow r;
    r.packs = f[0];
    r.radius = parse_double(f[1], "radius");
    r.estimate = parse_double(f[2], "estimate");
    r.log_ci = parse_double(f[3], "log_ci");
    r.population = parse_count(f[4], "population");
    r.seed = parse_count(f[5], "seed");
    return r;
}

EigenRow eigen_from_fields(const std::vector<std::string>& f) {
    EigenRow r;
    r.kappa = parse_double(f[0], "kappa");
    r.w1 = parse_double(f[1], "w1");
    r.w2 = parse_double(f[2], "w2");
    r.points = parse_count(f[3], "points");
    r.residual = parse_double(f[4], "residual");
    return r;
}

enum class Schema { estimates, walkers, eigen };

const std::vector<std::string>& header_of(Schema s) {
    switch (s) {
        case Schema::walkers: return kWalkerHeader;
        case Schema::eigen: return kEigenHeader;
        default: return kEstimateHeader;
    }
}

void add_record(ParsedFile& out, Schema schema, const std::vector<std::string>& fields) {
    switch (schema) {
        case Schema::walkers: out.walkers.push_back(walker_from_fields(fields)); break;
        case Schema::eigen: out.eigen.push_back(eigen_from_fields(fields)); break;
        default: out.estimates.push_back(estimate_from_fields(fields));
    }
}

std::string json_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field ") + key);
    const auto& v = j.at(key);
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number()) return format_number(v.get<double>());
    throw SchemaError(std::string("bad field ") + key);
}

ParsedFile parse_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array()) {
        throw SchemaError("JSON result needs a rows array");
    }
    ParsedFile out;
    for (const auto& row : doc["rows"]) {
        if (!row.is_object()) throw SchemaError("JSON rows must be objects");
        const Schema schema = row.contains("packs")      ? Schema::walkers
                              : row.contains("residual") ? Schema::eigen
                                                         : Schema::estimates;
        std::vector<std::string> fields;
        for (const auto& key : header_of(schema)) fields.push_back(json_field(row, key.c_str()));
        add_record(out, schema, fields);
    }
    return out;
}

}  // namespace

std::string estimates_csv(const Config& config, const std::vector<EstimateRow>& rows) {
    std::string out = config_line(config) + csv_line(kEstimateHeader);
    for (const auto& r : rows) {
        out += csv_line({r.method, r.observable, format_number(r.kappa), format_number(r.x0), format_number(r.w1),
                         format_number(r.w2), format_number(r.s), format_number(r.mean), format_number(r.std_error),
                         std::to_string(r.n), std::to_string(r.seed), std::to_string(r.first),
                         r.target ? format_number(*r.target) : ""});
    }
    return out;
}

std::string walkers_csv(const Config& config, const std::vector<WalkerRow>& rows) {
    std::string out = config_line(config) + csv_line(kWalkerHeader);
    for (const auto& r : rows) {
        out += csv_line({r.packs, format_number(r.radius), format_number(r.estimate), format_number(r.log_ci),
                         std::to_string(r.population), std::to_string(r.seed)});
    }
    return out;
}

std::string eigen_csv(const Config& config, const std::vector<EigenRow>& rows) {
    std::string out = config_line(config) + csv_line(kEigenHeader);
    for (const auto& r : rows) {
        out += csv_line({format_number(r.kappa), format_number(r.w1), format_number(r.w2), std::to_string(r.points),
                         format_number(r.residual)});
    }
    return out;
}

nlohmann::ordered_json config_json(const Config& config) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config) j[k] = v;
    return j;
}

nlohmann::ordered_json to_json(const EstimateRow& r) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["observable"] = r.observable;
    j["kappa"] = r.kappa;
    j["x0"] = r.x0;
    j["w1"] = r.w1;
    j["w2"] = r.w2;
    j["s"] = r.s;
    j["mean"] = r.mean;
    j["stderr"] = r.std_error;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["first"] = r.first;
    j["target"] = r.target ? nlohmann::ordered_json(*r.target) : nlohmann::ordered_json(nullptr);
    return j;
}

nlohmann::ordered_json to_json(const WalkerRow& r) {
    nlohmann::ordered_json j;
    j["packs"] = r.packs;
    j["radius"] = r.radius;
    j["estimate"] = r.estimate;
    j["log_ci"] = r.log_ci;
    j["population"] = r.population;
    j["seed"] = r.seed;
    return j;
}

nlohmann::ordered_json to_json(const EigenRow& r) {
    nlohmann::ordered_json j;
    j["kappa"] = r.kappa;
    j["w1"] = r.w1;
    j["w2"] = r.w2;
    j["points"] = r.points;
    j["residual"] = r.residual;
    return j;
}

ParsedFile parse_result_file(std::string_view text) {
    const auto start = text.find_first_not_of(" \t\r\n");
    if (start == std::string_view::npos) return {};
    if (text[start] == '{') return parse_json(text);

    std::vector<std::vector<std::string>> records;
    try {
        records = parse_csv(text);
    } catch (const std::runtime_error& e) {
        throw SchemaError(e.what());
    }
    ParsedFile out;
    if (records.empty()) return out;
    const auto& header = records.front();
    Schema schema;
    if (header == kEstimateHeader) {
        schema = Schema::estimates;
    } else if (header == kWalkerHeader) {
        schema = Schema::walkers;
    } else if (header == kEigenHeader) {
        schema = Schema::eigen;
    } else {
        throw SchemaError("unrecognized CSV header");
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != header.size()) {
            throw SchemaError("row " + std::to_string(i) + " has " + std::to_string(records[i].size()) +
                              " fields, expected " + std::to_string(header.size()));
        }
        add_record(out, schema, records[i]);
    }
    return out;
}

}  // namespace slelab::cli
