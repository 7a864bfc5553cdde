#include <doctest.h>

#include <cmath>

#include "hyquc/error.hpp"
#include "hyquc/metrics.hpp"
#include "hyquc/random.hpp"
#include "oracles.hpp"

using namespace hyquc;
using namespace hyquc::metrics;

namespace {

// A confusion matrix consistent with the personal-loan table: diagonal
// 741/8/29 from recall x support, column sums 744/68/120 from the printed
// precisions.
ConfusionMatrix personal_cm() {
    return {{{741, 59, 70}, {3, 8, 21}, {0, 1, 29}}, {"Standard", "Sub-Standard", "Doubtful"}};
}

ConfusionMatrix random_cm(Rng &rng, std::size_t k) {
    ConfusionMatrix cm;
    cm.counts.assign(k, std::vector<std::size_t>(k));
    for (auto &row : cm.counts)
        for (auto &v : row)
            v = rng.index(20);
    cm.counts[0][0] += 1;
    return cm;
}

} // namespace

TEST_CASE("confusion matrix") {
    const std::vector<std::size_t> y{0, 1, 2, 2, 1};
    const auto perfect = confusion_matrix(y, y, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK((perfect.counts[i][j] != 0) == (i == j));

    const auto zeros = confusion_matrix(y, std::vector<std::size_t>(5, 0), 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(zeros.counts[i][1] == 0);
        CHECK(zeros.counts[i][2] == 0);
    }
    CHECK(zeros.col_sum(0) == 5);

    CHECK_THROWS_AS(confusion_matrix(y, std::vector<std::size_t>{0}, 3), ShapeError);
    CHECK_THROWS_AS(confusion_matrix(y, std::vector<std::size_t>{0, 0, 0, 0, 3}, 3), IndexError);

    Rng rng(12);
    std::vector<std::size_t> t(200), p(200);
    std::vector<std::size_t> hist(4);
    for (std::size_t i = 0; i < 200; ++i) {
        t[i] = rng.index(4);
        p[i] = rng.index(4);
        ++hist[t[i]];
    }
    const auto cm = confusion_matrix(t, p, 4);
    for (std::size_t c = 0; c < 4; ++c)
        CHECK(cm.row_sum(c) == hist[c]);
    CHECK(cm.total() == 200);
}

TEST_CASE("per-class scores from the personal-loan table") {
    const auto cm = personal_cm();
    const auto s = per_class_prf(cm, 0);
    CHECK(std::abs(s.precision - 0.99597) <= 1e-4);
    CHECK(std::abs(s.recall - 0.85172) <= 1e-4);
    CHECK(std::abs(s.f1 - 0.91822) <= 1e-4);
    CHECK(s.support == 870);
    CHECK(std::abs(per_class_prf(cm, 1).precision - 0.117647) <= 1e-6);
    CHECK(std::abs(per_class_prf(cm, 1).f1 - 0.160000) <= 1e-6);
    CHECK(std::abs(per_class_prf(cm, 2).precision - 0.241667) <= 1e-6);
    CHECK(std::abs(per_class_prf(cm, 2).recall - 0.966667) <= 1e-6);
    CHECK(std::abs(per_class_prf(cm, 2).f1 - 0.386667) <= 1e-6);
    CHECK(std::abs(accuracy(cm) - 0.834764) <= 1e-6);
    CHECK(cm.trace() == 778);
}

TEST_CASE("per-class edge cases") {
    const ConfusionMatrix perfect{{{4, 0}, {0, 6}}, {}};
    const auto s = per_class_prf(perfect, 1);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
    CHECK(s.support == 6);
    CHECK_FALSE(s.zero_division);

    const ConfusionMatrix absent{{{4, 0}, {0, 0}}, {}};
    const auto z = per_class_prf(absent, 1);
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
    CHECK(z.f1 == 0.0);
    CHECK(z.support == 0);
    CHECK(z.zero_division);
    CHECK_THROWS_AS(per_class_prf(absent, 2), IndexError);
}

TEST_CASE("accuracy") {
    CHECK(accuracy(ConfusionMatrix{{{3, 0}, {0, 9}}, {}}) == 1.0);
    CHECK_THROWS_AS(accuracy(ConfusionMatrix{{{0, 0}, {0, 0}}, {}}), ArgumentError);
    CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), ArgumentError);

    // agricultural reconstruction: TP = round(recall x support)
    const std::size_t tp = static_cast<std::size_t>(std::lround(0.8516 * 3525)) +
                           static_cast<std::size_t>(std::lround(0.60 * 50)) +
                           static_cast<std::size_t>(std::lround(0.545 * 488)) +
                           static_cast<std::size_t>(std::lround(0.7735 * 53));
    CHECK(tp == 3339);
    ConfusionMatrix agri;
    agri.counts = {{3002, 300, 100, 123}, {10, 30, 5, 5}, {50, 100, 266, 72}, {2, 5, 5, 41}};
    CHECK(agri.total() == 4116);
    CHECK(std::abs(accuracy(agri) - 0.8112) <= 5e-4);
}

TEST_CASE("macro and weighted averages") {
    const std::vector<double> precision{0.995968, 0.117647, 0.241667};
    const std::vector<std::size_t> support{870, 32, 30};
    const auto avg = macro_weighted_avg(precision, support);
    CHECK(std::abs(avg.macro - 0.451761) <= 1e-5);
    CHECK(std::abs(avg.macro - 0.451760) <= 1e-5);
    CHECK(std::abs(avg.weighted - 0.941531) <= 1e-4);

    const std::vector<double> same{0.3, 0.3, 0.3};
    const auto flat = macro_weighted_avg(same, support);
    CHECK(std::abs(flat.macro - flat.weighted) <= 1e-15);
    CHECK_THROWS_AS(macro_weighted_avg(std::vector<double>{}, std::vector<std::size_t>{}),
                    ArgumentError);
    CHECK_THROWS_AS(macro_weighted_avg(same, std::vector<std::size_t>{1}), ShapeError);

    SUBCASE("weighted recall equals accuracy") {
        Rng rng(4);
        for (int t = 0; t < 50; ++t) {
            const auto cm = random_cm(rng, 2 + t % 4);
            std::vector<double> recall;
            std::vector<std::size_t> sup;
            for (std::size_t c = 0; c < cm.n_classes(); ++c) {
                recall.push_back(per_class_prf(cm, c).recall);
                sup.push_back(cm.row_sum(c));
            }
            CHECK(std::abs(macro_weighted_avg(recall, sup).weighted - accuracy(cm)) <= 1e-12);
        }
    }
}

TEST_CASE("one-vs-rest AUC") {
    const std::vector<std::size_t> y{0, 0, 1, 1};
    const std::vector<double> sep{0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.4, 0.6};
    const auto a = roc_auc_ovr(sep, 2, y);
    CHECK(a[0].value() == 1.0);
    CHECK(a[1].value() == 1.0);

    const std::vector<double> flat(8, 0.5);
    CHECK(roc_auc_ovr(flat, 2, y)[0].value() == 0.5);

    const std::vector<std::size_t> one_class{0, 0, 0, 0};
    CHECK_FALSE(roc_auc_ovr(flat, 2, one_class)[0].has_value());
    CHECK_FALSE(roc_auc_ovr(flat, 2, one_class)[1].has_value());
    CHECK_THROWS_AS(roc_auc_ovr(std::vector<double>(7, 0.5), 2, y), ShapeError);

    SUBCASE("fast path equals the all-pairs count exactly") {
        Rng rng(55);
        for (int t = 0; t < 20; ++t) {
            const std::size_t n = 30, k = 3;
            std::vector<std::size_t> labels(n);
            std::vector<double> scores(n * k);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = i < k ? i : rng.index(k);
                // coarse grid so ties occur
                for (std::size_t c = 0; c < k; ++c)
                    scores[i * k + c] = static_cast<double>(rng.index(8)) / 8.0;
            }
            const auto fast = roc_auc_ovr(scores, k, labels);
            for (std::size_t c = 0; c < k; ++c) {
                const auto pc = oracle::auc_pairs(scores, k, labels, c);
                const double brute = static_cast<double>(pc.twice_wins) / 2.0 /
                                     static_cast<double>(pc.pairs);
                CHECK(fast[c].value() == brute);
            }
        }
    }

    SUBCASE("invariant under increasing transforms") {
        Rng rng(56);
        std::vector<std::size_t> labels(40);
        std::vector<double> s(80), t(80);
        for (std::size_t i = 0; i < 40; ++i)
            labels[i] = i % 2;
        for (std::size_t i = 0; i < 80; ++i) {
            s[i] = rng.uniform();
            t[i] = std::exp(3.0 * s[i]) - 7.0;
        }
        const auto a1 = roc_auc_ovr(s, 2, labels), a2 = roc_auc_ovr(t, 2, labels);
        CHECK(a1[0].value() == a2[0].value());
        CHECK(a1[1].value() == a2[1].value());
    }
}

TEST_CASE("Cohen's kappa") {
    CHECK(cohens_kappa(ConfusionMatrix{{{5, 0}, {0, 7}}, {}}).value == 1.0);
    CHECK(cohens_kappa(ConfusionMatrix{{{25, 25}, {25, 25}}, {}}).value == 0.0);
    const auto degenerate = cohens_kappa(ConfusionMatrix{{{5, 0}, {0, 0}}, {}});
    CHECK(degenerate.degenerate);
    CHECK(degenerate.value == 1.0);
    CHECK_THROWS_AS(cohens_kappa(ConfusionMatrix{{{0}}, {}}), ArgumentError);

    Rng rng(77);
    for (int t = 0; t < 50; ++t) {
        const auto cm = random_cm(rng, 2 + t % 3);
        long double n = 0, diag = 0, chance = 0;
        for (std::size_t i = 0; i < cm.n_classes(); ++i) {
            long double r = 0, c = 0;
            for (std::size_t j = 0; j < cm.n_classes(); ++j) {
                r += cm.counts[i][j];
                c += cm.counts[j][i];
                n += cm.counts[i][j];
            }
            diag += cm.counts[i][i];
            chance += r * c;
        }
        const long double po = diag / n, pe = chance / (n * n);
        const double want = static_cast<double>((po - pe) / (1 - pe));
        const auto k = cohens_kappa(cm);
        CHECK(std::abs(k.value - want) <= 1e-12);
        CHECK(k.value <= 1.0);
        CHECK(k.value >= -1.0);
    }
}

TEST_CASE("report") {
    const std::vector<std::size_t> y{0, 1, 2, 1, 0};
    std::vector<double> scores;
    for (auto c : y)
        for (std::size_t k = 0; k < 3; ++k)
            scores.push_back(k == c ? 0.8 : 0.1);
    const auto perfect = build_report(confusion_matrix(y, y, 3), scores, y);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro.f1 == 1.0);
    CHECK(perfect.weighted.precision == 1.0);
    CHECK(perfect.kappa.value == 1.0);
    for (const auto &a : perfect.roc_auc)
        CHECK(a.value() == 1.0);

    SUBCASE("personal-loan cells") {
        const auto cm = personal_cm();
        std::vector<std::size_t> labels;
        std::vector<double> sc;
        for (std::size_t t = 0; t < 3; ++t)
            for (std::size_t p = 0; p < 3; ++p)
                for (std::size_t i = 0; i < cm.counts[t][p]; ++i) {
                    labels.push_back(t);
                    for (std::size_t k = 0; k < 3; ++k)
                        sc.push_back(k == p ? 0.6 : 0.2);
                }
        const auto r = build_report(cm, sc, labels);
        CHECK(std::abs(r.accuracy - 0.834764) <= 1e-6);
        CHECK(std::abs(r.macro.precision - 0.451760) <= 1e-5);
        CHECK(std::abs(r.macro.recall - 0.689464) <= 1e-5);
        CHECK(std::abs(r.macro.f1 - 0.488294) <= 1e-5);
        CHECK(std::abs(r.weighted.precision - 0.941531) <= 1e-4);
        CHECK(std::abs(r.weighted.recall - 0.834764) <= 1e-6);
        CHECK(std::abs(r.weighted.f1 - 0.875073) <= 1e-5);
        CHECK(r.macro.support == 932);

        const auto doc = r.to_json();
        for (const char *key : {"classes", "accuracy", "macro_avg", "weighted_avg", "roc_auc",
                                "cohens_kappa", "confusion_matrix"})
            CHECK(doc.contains(key));
        auto with_extra = r;
        with_extra.additional["train_accuracy"] = 0.673375;
        const auto back = MetricsReport::from_json(nlohmann::ordered_json::parse(with_extra.to_json().dump()));
        CHECK(back == with_extra);
        CHECK(back.to_json().dump() == with_extra.to_json().dump());
    }
}
