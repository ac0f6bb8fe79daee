#pragma once

#include <string>

#include "catcollapse/io.hpp"

#ifndef CATCOLLAPSE_DATA_DIR
#error "CATCOLLAPSE_DATA_DIR must be defined"
#endif

namespace fixtures {

struct Dataset {
    catcollapse::CategoryScheme scheme;
    catcollapse::SparseTable table;
};

inline Dataset load(const std::string& stem) {
    const std::string dir = CATCOLLAPSE_DATA_DIR;
    const auto config = catcollapse::load_config(dir + "/" + stem + ".json");
    const auto data = catcollapse::read_counts(dir + "/" + stem + ".csv", &config);
    return {data.scheme(), data.table()};
}

inline Dataset wermuth_cox() { return load("wermuth_cox"); }
inline Dataset christensen() { return load("christensen_abortion"); }

}  // namespace fixtures
