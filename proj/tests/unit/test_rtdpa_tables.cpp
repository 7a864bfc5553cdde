#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "hyquc/error.hpp"
#include "hyquc/random.hpp"
#include "hyquc/rtdpa.hpp"

using namespace hyquc;
using namespace hyquc::rtdpa;

namespace {

TabularDataset csv(const std::string &text, std::string rt = "SEG") {
    std::istringstream in(text);
    return parse_csv(in, "IRAC", std::move(rt));
}

std::set<std::string> names(const std::vector<DroppedColumn> &dropped) {
    std::set<std::string> out;
    for (const auto &d : dropped)
        out.insert(d.name);
    return out;
}

} // namespace

TEST_CASE("csv parsing") {
    const auto d = csv("SEG,IRAC,A,B\nPL,1,\"x,y\",NA\nAG,2,,\"\"\n");
    CHECK(d.n_rows() == 2);
    CHECK(d.n_cols() == 4);
    CHECK(*d.rows[0][2] == "x,y");
    CHECK_FALSE(d.rows[0][3].has_value());
    CHECK_FALSE(d.rows[1][2].has_value());
    CHECK_FALSE(d.rows[1][3].has_value());
    // a quoted token is data, not a missing marker
    CHECK(*csv("SEG,IRAC,A\nPL,1,\"NA\"\n").rows[0][2] == "NA");

    std::ostringstream out;
    write_csv(out, d);
    const auto again = csv(out.str());
    CHECK(again.rows == d.rows);
    CHECK(again.column_names == d.column_names);

    CHECK_THROWS_AS(csv(""), FormatError);
    CHECK_THROWS_AS(csv("SEG,IRAC\nPL\n"), FormatError);
    CHECK_THROWS_AS(csv("SEG,IRAC\nPL,\"1\n"), FormatError);
    CHECK(is_missing_token("NULL"));
    CHECK_FALSE(is_missing_token("0"));
}

TEST_CASE("column access") {
    const auto d = csv("SEG,IRAC,A,B\nPL,1,3,4\n");
    CHECK(d.column_index("B") == 3);
    CHECK_THROWS_AS(d.column_index("Z"), SchemaError);
    const std::vector<std::string> want{"B", "A"};
    const auto p = d.project_columns(want);
    CHECK(p.column_names == want);
    CHECK(*p.rows[0][0] == "4");
    const std::vector<std::string> absent{"A", "Q", "R"};
    try {
        d.project_columns(absent);
        FAIL("expected a schema error");
    } catch (const SchemaError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("Q") != std::string::npos);
        CHECK(msg.find("R") != std::string::npos);
    }
}

TEST_CASE("row-type map and partitioning") {
    std::istringstream text("# comment\nAG1 = Agriculture\nAG2=Agriculture\nPL1 = Personal\n");
    const auto map = RowTypeMap::parse(text);
    CHECK(map.resolve("AG2") == "Agriculture");
    CHECK(map.codes_for("Agriculture") == std::vector<std::string>{"AG1", "AG2"});
    try {
        map.resolve("ZZ9");
        FAIL("expected a schema error");
    } catch (const SchemaError &e) {
        CHECK(std::string(e.what()).find("ZZ9") != std::string::npos);
    }
    std::istringstream bad("AG1 Agriculture\n");
    CHECK_THROWS_AS(RowTypeMap::parse(bad), FormatError);
    std::istringstream clash("AG1 = A\nAG1 = B\n");
    CHECK_THROWS_AS(RowTypeMap::parse(clash), FormatError);

    const auto d = csv("SEG,IRAC\nAG1,1\nPL1,2\nAG2,1\nPL1,3\n");
    const auto parts = partition_by_row_type(d, &map);
    CHECK(parts.size() == 2);
    CHECK(parts.at("Agriculture").n_rows() == 2);
    CHECK(parts.at("Personal").n_rows() == 2);
    CHECK(parts.at("Personal").column_names == d.column_names);

    const auto single = csv("SEG,IRAC\nX,1\nX,2\n");
    const auto one = partition_by_row_type(single);
    CHECK(one.size() == 1);
    CHECK(one.at("X").rows == single.rows);

    CHECK_THROWS_AS(partition_by_row_type(csv("A,IRAC\nX,1\n", "SEG")), SchemaError);
    CHECK_THROWS_AS(partition_by_row_type(csv("SEG,IRAC\nQQ,1\n"), &map), SchemaError);

    SUBCASE("reference portfolio sizes") {
        const auto p = fixture::personal(), a = fixture::agriculture();
        TabularDataset both = p;
        both.rows.insert(both.rows.end(), a.rows.begin(), a.rows.end());
        const auto split = partition_by_row_type(both);
        CHECK(split.at("AG").n_rows() == 17496 + 294 + 2577 + 210);
        CHECK(split.at("AG").n_rows() == 20577);
        CHECK(split.at("PL").n_rows() == 4656);
    }

    SUBCASE("random partitions cover the input once") {
        Rng rng(3);
        for (int t = 0; t < 20; ++t) {
            TabularDataset r;
            r.column_names = {"SEG", "IRAC", "ID"};
            r.row_type_column = "SEG";
            const std::size_t n = 1 + rng.index(200);
            for (std::size_t i = 0; i < n; ++i)
                r.rows.push_back({Cell{"T" + std::to_string(rng.index(5))}, Cell{"1"},
                                  Cell{std::to_string(i)}});
            std::size_t total = 0;
            std::set<std::string> ids;
            for (const auto &[name, part] : partition_by_row_type(r)) {
                total += part.n_rows();
                for (const auto &row : part.rows) {
                    CHECK(*row[0] == name);
                    CHECK(ids.insert(*row[2]).second);
                }
            }
            CHECK(total == n);
        }
    }
}

TEST_CASE("inapplicable columns") {
    const auto d = csv("SEG,IRAC,DRYLAND,WETLAND,LIMIT\nPL,1,1,2,3\n");
    PreprocessReport report;
    const std::vector<std::string> personal{"DRYLAND", "WETLAND"};
    const auto out = drop_inapplicable_columns(d, personal, &report);
    CHECK(out.column_names == std::vector<std::string>{"SEG", "IRAC", "LIMIT"});
    CHECK(report.inapplicable_dropped == personal);

    CHECK(drop_inapplicable_columns(d, {}).column_names == d.column_names);

    PreprocessReport r2;
    const std::vector<std::string> ghost{"NOPE"};
    CHECK(drop_inapplicable_columns(d, ghost, &r2).column_names == d.column_names);
    CHECK(r2.notes.size() == 1);
}

TEST_CASE("mostly-missing columns") {
    SUBCASE("personal portfolio") {
        const auto res = drop_high_missing(fixture::personal(), 0.70);
        std::set<std::string> want;
        for (const auto &m : fixture::personal_missing())
            want.insert(m.column);
        CHECK(names(res.dropped) == want);
        for (const auto &d : res.dropped)
            if (d.name == "DIRFINFLG") {
                CHECK(d.missing == 4656);
                CHECK(d.fraction == 1.0);
            }
        CHECK(res.data.find_column("EDGECD"));
        CHECK(res.data.find_column("LIMITAMT"));
        CHECK(res.data.find_column("DRYLAND"));
    }

    SUBCASE("agriculture portfolio") {
        const auto res = drop_high_missing(fixture::agriculture(), 0.70);
        std::set<std::string> want;
        for (const auto &m : fixture::agriculture_missing())
            want.insert(m.column);
        CHECK(names(res.dropped) == want);
        for (const auto &d : res.dropped)
            if (d.name == "UNIFUNFLG")
                CHECK(std::abs(d.fraction - 0.766) <= 5e-4);
    }

    SUBCASE("no retained column exceeds the threshold") {
        Rng rng(9);
        for (double threshold : {0.1, 0.5, 0.7, 1.0}) {
            TabularDataset r;
            r.column_names = {"IRAC", "A", "B", "C"};
            for (int i = 0; i < 50; ++i) {
                std::vector<Cell> row{Cell{"1"}};
                for (int c = 0; c < 3; ++c)
                    row.push_back(rng.uniform() < 0.3 * (c + 1) ? Cell{} : Cell{"v"});
                r.rows.push_back(row);
            }
            const auto out = drop_high_missing(r, threshold).data;
            for (std::size_t c = 0; c < out.n_cols(); ++c) {
                std::size_t miss = 0;
                for (const auto &row : out.rows)
                    miss += !row[c];
                CHECK(static_cast<double>(miss) / 50.0 <= threshold);
            }
        }
    }

    const auto labels_missing = csv("SEG,IRAC\nPL,\nPL,\nPL,1\n");
    CHECK(drop_high_missing(labels_missing, 0.5).data.n_cols() == 2);
    CHECK_THROWS_AS(drop_high_missing(labels_missing, 0.0), ArgumentError);
    CHECK_THROWS_AS(drop_high_missing(labels_missing, 1.5), ArgumentError);
}

TEST_CASE("labels and class consolidation") {
    const auto p = fixture::personal();
    auto map = LabelMap::fit(p, fixture::irac_names());
    CHECK(map.n_classes() == 4);
    map.merge("Loss", "Doubtful");
    CHECK(map.class_names() == std::vector<std::string>{"Standard", "Sub-Standard", "Doubtful"});
    std::vector<std::size_t> counts(3);
    const auto col = p.column_index("IRAC");
    for (const auto &row : p.rows)
        ++counts[map.encode(*row[col])];
    CHECK(counts[2] == 132);
    CHECK(counts[0] + counts[1] + counts[2] == 4656);
    CHECK_THROWS_AS(map.merge("Loss", "Doubtful"), ArgumentError);
    CHECK_THROWS_AS(map.encode("9"), SchemaError);

    const auto inferred = LabelMap::fit(csv("SEG,IRAC\nA,10\nA,2\nA,1\n"));
    CHECK(inferred.class_names() == std::vector<std::string>{"1", "2", "10"});

    const auto back = LabelMap::from_json(Json::parse(map.to_json().dump()));
    CHECK(back.class_names() == map.class_names());
    CHECK(back.encode("4") == 2);

    SUBCASE("dataset-level merge") {
        RowTypeDataset ds;
        ds.class_names = {"Standard", "Sub-Standard", "Doubtful", "Loss"};
        ds.X = Eigen::MatrixXd::Zero(6, 1);
        ds.y = {0, 1, 2, 3, 3, 2};
        const auto merged = merge_minority_class(ds, "Loss", "Doubtful");
        CHECK(merged.class_names.size() == 3);
        CHECK(merged.class_counts() == std::vector<std::size_t>{1, 1, 4});
        CHECK(merged.n_rows() == ds.n_rows());
        const auto same = merge_minority_class(ds, "Loss", "Loss");
        CHECK(same.y == ds.y);
        CHECK_THROWS_AS(merge_minority_class(ds, "Gone", "Loss"), ArgumentError);

        // merging a class that sits before the target shifts later labels
        const auto early = merge_minority_class(ds, "Standard", "Loss");
        CHECK(early.class_names == std::vector<std::string>{"Sub-Standard", "Doubtful", "Loss"});
        CHECK(early.y == std::vector<std::size_t>{2, 0, 1, 2, 2, 1});
    }
}

TEST_CASE("imputation and encoding") {
    const auto d = csv("SEG,IRAC,NUM,CAT,DT,EMPTY\n"
                       "P,1,1,A,2020-01-01,\n"
                       "P,2,,B,2020-01-03,\n"
                       "P,1,3,,,\n");
    const auto labels = LabelMap::fit(d);
    PreprocessReport report;
    const auto enc = TabularEncoder::fit(d, {}, &report);
    CHECK(report.empty_dropped == std::vector<std::string>{"EMPTY"});
    const auto ds = enc.transform(d, labels);
    CHECK(ds.feature_names ==
          std::vector<std::string>{"NUM", "CAT=A", "CAT=B", "CAT=__missing__", "DT"});
    // median of {1, 3} fills the gap
    CHECK(ds.X(1, 0) == 2.0);
    CHECK(ds.X(0, 1) == 1.0);
    CHECK(ds.X(2, 3) == 1.0);
    CHECK(ds.X.row(2).segment(1, 3).sum() == 1.0);
    CHECK(ds.X(2, 4) == 18263.0);
    CHECK(ds.X.allFinite());
    CHECK(ds.y == std::vector<std::size_t>{0, 1, 0});

    // one unparseable value turns a date column categorical
    const auto mixed = csv("SEG,IRAC,DT\nP,1,2020-01-01\nP,1,bad-date\n");
    CHECK(TabularEncoder::fit(mixed).columns()[0].kind == ColumnKind::Categorical);
    const auto ok = csv("SEG,IRAC,DT\nP,1,2020-01-01\nP,1,2020-01-05\nP,2,\n");
    const auto e2 = TabularEncoder::fit(ok);
    CHECK(e2.columns()[0].kind == ColumnKind::Date);
    const auto X = e2.transform_features(ok);
    CHECK(X(0, 0) == 18262.0);
    CHECK(X(2, 0) == 18264.0);

    SUBCASE("unseen categories and missing columns at replay") {
        const auto later = csv("SEG,IRAC,NUM,CAT,DT\nP,1,5,Z,2020-01-02\n");
        const auto Xl = enc.transform_features(later);
        CHECK(Xl(0, 3) == 1.0);
        CHECK(Xl(0, 1) == 0.0);
        const auto drift = csv("SEG,IRAC,NUM\nP,1,5\n");
        try {
            enc.transform_features(drift);
            FAIL("expected a schema error");
        } catch (const SchemaError &e) {
            CHECK(std::string(e.what()).find("CAT") != std::string::npos);
            CHECK(std::string(e.what()).find("DT") != std::string::npos);
        }
    }

    SUBCASE("round trip") {
        const auto back = TabularEncoder::from_json(Json::parse(enc.to_json().dump()));
        CHECK(back.feature_names() == enc.feature_names());
        CHECK(back.transform_features(d) == enc.transform_features(d));
    }

    SUBCASE("winsorizing clips to training percentiles") {
        std::string text = "SEG,IRAC,V\n";
        for (int i = 0; i < 100; ++i)
            text += "P,1," + std::to_string(i == 99 ? 10000 : i) + "\n";
        const auto w = csv(text);
        EncodeOptions opt;
        opt.winsorize = true;
        const auto e = TabularEncoder::fit(w, opt);
        CHECK(e.transform_features(w).maxCoeff() < 10000.0);
    }

    SUBCASE("random tables encode to finite matrices") {
        Rng rng(21);
        for (int t = 0; t < 20; ++t) {
            std::string text = "SEG,IRAC,A,B,C\n";
            for (int i = 0; i < 30; ++i) {
                text += "P," + std::to_string(1 + rng.index(3)) + ",";
                text += (rng.uniform() < 0.3 ? "" : std::to_string(rng.uniform(-5, 5))) + ",";
                text += (rng.uniform() < 0.3 ? "" : std::string(1, static_cast<char>('a' + rng.index(4)))) + ",";
                text += rng.uniform() < 0.3 ? "" : "2021-0" + std::to_string(1 + rng.index(9)) + "-1" + std::to_string(rng.index(9));
                text += "\n";
            }
            const auto r = csv(text);
            const auto X = impute_and_encode(r, LabelMap::fit(r)).X;
            CHECK(X.allFinite());
        }
    }

    CHECK_THROWS_AS(TabularEncoder::fit(csv("SEG,IRAC,E\nP,1,\n")), SchemaError);
    CHECK(parse_date("1970-01-02", "%Y-%m-%d").value() == 1.0);
    CHECK(parse_date("02/01/1970", "%d/%m/%Y").value() == 1.0);
    CHECK_FALSE(parse_date("1970-13-40", "%Y-%m-%d").has_value());
    CHECK_FALSE(parse_date("yesterday", "%Y-%m-%d").has_value());
}

TEST_CASE("preprocess report document") {
    PreprocessReport r;
    r.row_type = "Personal";
    r.missing_dropped.push_back({"DIRFINFLG", 4656, 1.0});
    r.merged_classes.emplace_back("Loss", "Doubtful");
    r.counts_before_smote["Standard"] = 10;
    const auto doc = r.to_json();
    CHECK(doc["format"] == "hyquc-preprocess");
    CHECK(doc["missing_dropped"][0]["column"] == "DIRFINFLG");
    CHECK(doc["merged_classes"][0]["into"] == "Doubtful");
}
