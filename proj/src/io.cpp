#include "catcollapse/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "catcollapse/error.hpp"

namespace catcollapse {

const VariableConfig* SchemeConfig::find(std::string_view name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

SchemeConfig parse_config(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_array())
        throw InputError("config needs a \"variables\" array");

    SchemeConfig config;
    try {
        for (const auto& v : doc["variables"]) {
            VariableConfig vc;
            vc.name = v.at("name").get<std::string>();
            if (v.contains("categories")) vc.categories = v["categories"].get<std::vector<std::string>>();
            if (v.contains("treatment")) vc.treatment = parse_treatment(v["treatment"].get<std::string>());
            if (v.contains("symbol")) vc.symbol = v["symbol"].get<std::string>();
            if (config.find(vc.name)) throw InputError("config lists variable '" + vc.name + "' twice");
            config.variables.push_back(std::move(vc));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed config: ") + e.what());
    }
    return config;
}

SchemeConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

CategoryScheme CountsData::scheme() const { return CategoryScheme(variables); }

SparseTable CountsData::table() const {
    Shape shape;
    for (const auto& v : variables) shape.push_back(std::max<std::size_t>(1, v.categories.size()));
    return build_table(shape, entries);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no, const std::string& source) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw InputError(source + ":" + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(field));
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

}  // namespace

CountsData parse_counts(std::istream& in, const SchemeConfig* config, const std::string& source) {
    auto fail = [&](std::size_t line_no, const std::string& msg) {
        return InputError(source + ":" + std::to_string(line_no) + ": " + msg);
    };

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        header = split_csv_line(line, line_no, source);
        break;
    }
    if (header.size() < 2 || header.back() != "count")
        throw fail(line_no, "header must list variable names followed by 'count'");

    CountsData data;
    std::vector<std::map<std::string, std::size_t>> lookup(header.size() - 1);
    std::vector<bool> configured(header.size() - 1, false);
    for (std::size_t k = 0; k + 1 < header.size(); ++k) {
        VariableDef v;
        v.name = header[k];
        if (v.name.empty()) throw fail(line_no, "empty variable name in header");
        if (config) {
            if (const auto* vc = config->find(v.name)) {
                v.treatment = vc->treatment;
                v.symbol = vc->symbol;
                v.categories = vc->categories;
                configured[k] = !vc->categories.empty();
                for (std::size_t c = 0; c < v.categories.size(); ++c) lookup[k][v.categories[c]] = c;
            }
        }
        data.variables.push_back(std::move(v));
    }
    if (config) {
        for (const auto& vc : config->variables) {
            bool present = false;
            for (const auto& v : data.variables) present = present || v.name == vc.name;
            if (!present) throw InputError("config variable '" + vc.name + "' is not in the data header");
        }
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_csv_line(line, line_no, source);
        if (fields.size() != header.size())
            throw fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        Entry e;
        for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
            auto it = lookup[k].find(fields[k]);
            if (it == lookup[k].end()) {
                if (configured[k])
                    throw fail(line_no, "unknown label '" + fields[k] + "' for variable '" + header[k] + "'");
                it = lookup[k].emplace(fields[k], data.variables[k].categories.size()).first;
                data.variables[k].categories.push_back(fields[k]);
            }
            e.coords.push_back(it->second);
        }
        const std::string& text = fields.back();
        double count = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), count);
        if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
            throw fail(line_no, "count '" + text + "' is not a number");
        if (!(count >= 0.0) || !std::isfinite(count)) throw fail(line_no, "count must be finite and nonnegative");
        e.count = count;
        data.entries.push_back(std::move(e));
    }
    return data;
}

CountsData read_counts(const std::filesystem::path& path, const SchemeConfig* config) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file " + path.string());
    return parse_counts(in, config, path.string());
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_counts(std::ostream& out, const CategoryScheme& scheme, const SparseTable& table) {
    if (scheme.shape() != table.shape()) throw InputError("scheme does not match table shape");
    for (const auto& v : scheme.variables()) out << csv_field(v.name) << ',';
    out << "count\n";
    for (const auto& c : table.cells()) {
        const Coords coords = table.coords_of(c.index);
        for (std::size_t k = 0; k < coords.size(); ++k) out << csv_field(scheme.variable(k).categories[coords[k]]) << ',';
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c.count);
        out << std::string(buf, ptr) << '\n';
    }
}

}  // namespace catcollapse
