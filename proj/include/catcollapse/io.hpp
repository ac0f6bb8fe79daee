#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "catcollapse/table.hpp"

namespace catcollapse {

// Per-variable settings from the JSON config. Empty `categories` means
// first-appearance order in the data.
struct VariableConfig {
    std::string name;
    std::vector<std::string> categories;
    Treatment treatment = Treatment::nominal;
    std::string symbol;
};

struct SchemeConfig {
    std::vector<VariableConfig> variables;

    const VariableConfig* find(std::string_view name) const;
};

SchemeConfig parse_config(std::string_view json_text);
SchemeConfig load_config(const std::filesystem::path& path);

struct CountsData {
    std::vector<VariableDef> variables;
    std::vector<Entry> entries;

    CategoryScheme scheme() const;
    // A header-only file without configured categories gives a 1 x ... x 1 table of total 0.
    SparseTable table() const;
};

// Long-format CSV: header is the variable names followed by `count`; each row
// holds one label per variable and a nonnegative number.
CountsData parse_counts(std::istream& in, const SchemeConfig* config = nullptr, const std::string& source = "<input>");
CountsData read_counts(const std::filesystem::path& path, const SchemeConfig* config = nullptr);

// Writes every nonzero cell in lexicographic order, long format.
void write_counts(std::ostream& out, const CategoryScheme& scheme, const SparseTable& table);

}  // namespace catcollapse
