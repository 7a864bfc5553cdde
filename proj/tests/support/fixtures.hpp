// In-memory tables rebuilt from reference class counts and
// missing-value counts of the two loan portfolios.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hyquc/rtdpa.hpp"

namespace fixture {

struct MissingSpec {
    std::string column;
    std::size_t missing;
};

// Missing-value counts per column (rows: 4656 personal, 20577 agriculture).
inline const std::vector<MissingSpec> &personal_missing() {
    static const std::vector<MissingSpec> v = {
        {"OPINIONDT", 4436}, {"DIRFINFLG", 4656}, {"SANAUTCD", 3838}, {"DOCREVDT", 4229},
        {"PRISECCD2", 4406}, {"RENEWALDT", 4656}, {"INSEXPDT", 4439}, {"TFRDT", 4216},
        {"REASONCD", 4181},  {"RECALLDT", 4216},  {"WOSACD", 4568}};
    return v;
}

inline const std::vector<MissingSpec> &agriculture_missing() {
    static const std::vector<MissingSpec> v = {
        {"OPINIONDT", 19743}, {"SANAUTCD", 18067}, {"DOCREVDT", 19918}, {"PRISECCD2", 19668},
        {"UNIFUNFLG", 15771}, {"RENEWALDT", 19956}, {"INSEXPDT", 20502}, {"TFRDT", 18090},
        {"REASONCD", 18081},  {"RECALLDT", 18096},  {"WOSACD", 19579}};
    return v;
}

// Class counts in raw IRAC codes 1..4.
inline std::vector<std::pair<std::string, std::size_t>> personal_classes() {
    return {{"1", 4398}, {"2", 126}, {"3", 129}, {"4", 3}};
}

inline std::vector<std::pair<std::string, std::size_t>> agriculture_classes() {
    return {{"1", 17496}, {"2", 294}, {"3", 2577}, {"4", 210}};
}

inline std::vector<std::pair<std::string, std::string>> irac_names() {
    return {{"1", "Standard"}, {"2", "Sub-Standard"}, {"3", "Doubtful"}, {"4", "Loss"}};
}

/// A portfolio with the given class counts and per-column missing counts,
/// plus retained columns: LIMITAMT (complete), DRYLAND (10% missing) and
/// EDGECD (missing just under 70%). Missing cells are spread by a stride
/// permutation so they are not clustered at the top.
inline hyquc::rtdpa::TabularDataset portfolio(
    const std::string &segment, const std::vector<std::pair<std::string, std::size_t>> &classes,
    const std::vector<MissingSpec> &missing) {
    using hyquc::rtdpa::Cell;
    hyquc::rtdpa::TabularDataset d;
    d.label_column = "IRAC";
    d.row_type_column = "SEGCD";
    d.column_names = {"SEGCD", "IRAC", "LIMITAMT", "DRYLAND"};
    std::size_t n = 0;
    for (const auto &[code, count] : classes)
        n += count;
    const std::size_t edge = n * 7 / 10 - (n * 7 % 10 == 0 ? 1 : 0);
    for (const auto &m : missing)
        d.column_names.push_back(m.column);
    d.column_names.push_back("EDGECD");

    const auto is_missing = [n](std::size_t i, std::size_t count) {
        return (i * 7919) % n < count;
    };
    std::size_t i = 0;
    for (const auto &[code, count] : classes) {
        for (std::size_t k = 0; k < count; ++k, ++i) {
            std::vector<Cell> row;
            row.emplace_back(segment);
            row.emplace_back(code);
            row.emplace_back(std::to_string(1000 + (i * 37) % 5000));
            row.push_back(is_missing(i, n / 10) ? Cell{} : Cell{std::to_string(i % 13)});
            for (const auto &m : missing)
                row.push_back(is_missing(i, m.missing) ? Cell{} : Cell{"X" + std::to_string(i % 5)});
            row.push_back(is_missing(i, edge) ? Cell{} : Cell{"E"});
            d.rows.push_back(std::move(row));
        }
    }
    return d;
}

inline hyquc::rtdpa::TabularDataset personal() {
    return portfolio("PL", personal_classes(), personal_missing());
}

inline hyquc::rtdpa::TabularDataset agriculture() {
    return portfolio("AG", agriculture_classes(), agriculture_missing());
}

} // namespace fixture
