// Timing harness for collapsing and loss-matrix passes on synthetic tables.
//
//   bench_pcc --shape 11,5,11,16                 full PCC on a dense random table
//   bench_pcc --shape 10,10,100,100 --nnz 100000 --loss-only
//
// The largest census runs reach about 5e7 cells; --shape 20,50,100,500
// --nnz 5000000 --loss-only approximates that scale (memory bound by nnz).

#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catcollapse/infoloss.hpp"
#include "catcollapse/pcc.hpp"

using namespace catcollapse;

int main(int argc, char** argv) {
    CLI::App app{"Collapsing benchmarks"};
    std::string shape_text = "11,5,11,16";
    std::uint64_t nnz = 0;
    bool loss_only = false;
    std::uint64_t seed = 1;
    double mean = 20.0;
    app.add_option("--shape", shape_text, "Comma-separated category counts")->capture_default_str();
    app.add_option("--nnz", nnz, "Nonzero cells; 0 fills every cell")->capture_default_str();
    app.add_flag("--loss-only", loss_only, "Time one loss-matrix pass per variable instead of full PCC");
    app.add_option("--seed", seed)->capture_default_str();
    app.add_option("--mean", mean, "Poisson mean of cell counts")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    Shape shape;
    std::stringstream in(shape_text);
    for (std::string part; std::getline(in, part, ',');) shape.push_back(std::stoul(part));
    const std::uint64_t size = checked_cell_count(shape);

    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> pois(mean);
    std::vector<Cell> cells;
    if (nnz == 0 || nnz >= size) {
        for (std::uint64_t i = 0; i < size; ++i) cells.push_back({i, static_cast<double>(pois(rng))});
    } else {
        std::uniform_int_distribution<std::uint64_t> pick(0, size - 1);
        for (std::uint64_t k = 0; k < nnz; ++k) cells.push_back({pick(rng), 1.0 + pois(rng)});
    }
    const SparseTable table(shape, std::move(cells));
    std::cout << "cells " << table.size() << " nnz " << table.nnz() << " total " << table.total() << '\n';

    const auto t0 = std::chrono::steady_clock::now();
    if (loss_only) {
        std::size_t pairs = 0;
        for (std::size_t d = 0; d < shape.size(); ++d) pairs += loss_matrix(table, d, Treatment::nominal).entries().size();
        std::cout << "pairs " << pairs;
    } else {
        const PccTrace trace = run_pcc(table, TreatmentConfig(shape.size(), Treatment::nominal));
        std::cout << "rows " << trace.steps.size() << " final_dev " << trace.final_dev();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << " seconds " << secs << '\n';
    return 0;
}
