#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyquc/error.hpp"
#include "hyquc/random.hpp"
#include "hyquc/rtdpa.hpp"

namespace hyquc::rtdpa {

namespace {

void check_fractions(const std::array<double, 3> &fractions) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0))
            throw ArgumentError("split fractions must all be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ArgumentError("split fractions must sum to 1");
    if (fractions[1] < kMinHoldoutFraction || fractions[2] < kMinHoldoutFraction)
        throw ArgumentError("validation and test fractions must be at least 0.05");
}

// Largest-remainder apportionment of `n` by `shares`; ties go to the
// earlier slot.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3> &shares) {
    std::array<std::size_t, 3> out{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        const double q = static_cast<double>(n) * shares[s];
        out[s] = static_cast<std::size_t>(std::floor(q + 1e-9));
        rem[s] = q - static_cast<double>(out[s]);
        assigned += out[s];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned)
        ++out[order[i % 3]];
    return out;
}

using Raised = std::vector<std::array<bool, 3>>;

// Alternating-path search in the class/split graph: class `start` gains a
// rounded-up cell, shifting other classes' round-ups between splits when
// the direct splits are full. Fractional cells are preferred unless
// `any_cell` is set.
bool augment_split(std::size_t start, Raised &raised, const std::vector<std::array<double, 3>> &frac,
                   std::array<std::size_t, 3> &split_room, bool any_cell) {
    const std::size_t n_classes = raised.size();
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> class_from(n_classes, kNone); // split that reached the class
    std::array<std::size_t, 3> split_from{kNone, kNone, kNone};
    std::vector<std::size_t> queue{start};
    class_from[start] = start;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t c = queue[head];
        for (std::size_t s = 0; s < 3; ++s) {
            if (raised[c][s] || split_from[s] != kNone || (!any_cell && frac[c][s] <= 1e-9))
                continue;
            split_from[s] = c;
            if (split_room[s] > 0) {
                --split_room[s];
                // Walk back flipping cells along the path.
                std::size_t split = s;
                for (;;) {
                    const std::size_t cls = split_from[split];
                    raised[cls][split] = true;
                    if (cls == start)
                        return true;
                    split = class_from[cls];
                    raised[cls][split] = false;
                }
            }
            for (std::size_t other = 0; other < n_classes; ++other)
                if (raised[other][s] && class_from[other] == kNone) {
                    class_from[other] = s;
                    queue.push_back(other);
                }
        }
    }
    return false;
}

} // namespace

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3> &fractions) {
    check_fractions(fractions);
    return apportion(n, fractions);
}

SplitIndices stratified_split(std::span<const std::size_t> labels,
                              std::span<const std::string> class_names,
                              const std::array<double, 3> &fractions, Rng &rng) {
    const auto targets = split_sizes(labels.size(), fractions);
    const std::size_t n_classes = class_names.size();
    std::vector<std::vector<std::size_t>> members(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n_classes)
            throw IndexError("label " + std::to_string(labels[i]) + " out of range");
        members[labels[i]].push_back(i);
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        if (!members[c].empty() && members[c].size() < 3)
            throw SplitError("class '" + class_names[c] + "' has " +
                             std::to_string(members[c].size()) +
                             " rows, fewer than the 3 splits");

    // Controlled rounding: per-class floors, then hand out the leftovers so
    // both class totals and split totals are met.
    std::vector<std::array<std::size_t, 3>> alloc(n_classes);
    std::vector<std::array<double, 3>> frac(n_classes);
    std::vector<std::size_t> class_need(n_classes, 0);
    std::array<std::size_t, 3> split_room = targets;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const double nc = static_cast<double>(members[c].size());
        std::size_t used = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            const double q = nc * fractions[s];
            alloc[c][s] = static_cast<std::size_t>(std::floor(q + 1e-9));
            frac[c][s] = q - static_cast<double>(alloc[c][s]);
            used += alloc[c][s];
            split_room[s] -= alloc[c][s];
        }
        class_need[c] = members[c].size() - used;
    }
    struct Cand {
        std::size_t cls, split;
        double frac;
    };
    std::vector<Cand> cands;
    for (std::size_t c = 0; c < n_classes; ++c)
        for (std::size_t s = 0; s < 3; ++s)
            cands.push_back({c, s, frac[c][s]});
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand &a, const Cand &b) { return a.frac > b.frac; });
    Raised raised(n_classes, {false, false, false});
    for (const auto &cand : cands) {
        if (class_need[cand.cls] > 0 && split_room[cand.split] > 0) {
            raised[cand.cls][cand.split] = true;
            --class_need[cand.cls];
            --split_room[cand.split];
        }
    }
    // Greedy can strand a class; reroute so every cell stays within one row
    // of its share.
    for (bool any_cell : {false, true})
        for (std::size_t c = 0; c < n_classes; ++c)
            while (class_need[c] > 0 && augment_split(c, raised, frac, split_room, any_cell))
                --class_need[c];
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (class_need[c] > 0)
            throw SplitError("cannot place every row of class '" + class_names[c] + "'");
        for (std::size_t s = 0; s < 3; ++s)
            alloc[c][s] += raised[c][s] ? 1 : 0;
    }

    SplitIndices out;
    std::array<std::vector<std::size_t> *, 3> dest{&out.train, &out.validation, &out.test};
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> rows = members[c];
        rng.shuffle(rows);
        std::size_t pos = 0;
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t k = 0; k < alloc[c][s]; ++k)
                dest[s]->push_back(rows[pos++]);
    }
    for (auto *d : dest)
        std::sort(d->begin(), d->end());
    return out;
}

DatasetSplit split_train_val_test(const RowTypeDataset &ds, const std::array<double, 3> &fractions,
                                  Rng &rng) {
    const auto idx = stratified_split(ds.y, ds.class_names, fractions, rng);
    return {ds.select_rows(idx.train), ds.select_rows(idx.validation), ds.select_rows(idx.test)};
}

RowTypeDataset smote_oversample(const RowTypeDataset &ds, std::size_t k_neighbors, Rng &rng) {
    if (k_neighbors < 1)
        throw ArgumentError("SMOTE needs k_neighbors >= 1");
    ds.validate();
    const auto counts = ds.class_counts();
    const std::size_t majority = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    std::vector<std::vector<std::size_t>> members(ds.n_classes());
    for (std::size_t i = 0; i < ds.y.size(); ++i)
        members[ds.y[i]].push_back(i);

    std::size_t extra = 0;
    for (std::size_t c = 0; c < ds.n_classes(); ++c) {
        if (counts[c] >= majority)
            continue;
        if (counts[c] < 2)
            throw AugmentationError("class '" + ds.class_names[c] + "' has " +
                                    std::to_string(counts[c]) +
                                    " sample(s); SMOTE needs at least 2");
        extra += majority - counts[c];
    }

    RowTypeDataset out = ds;
    if (extra == 0)
        return out;
    const Eigen::Index d = ds.X.cols();
    out.X.conservativeResize(ds.X.rows() + static_cast<Eigen::Index>(extra), d);
    Eigen::Index next = ds.X.rows();

    for (std::size_t c = 0; c < ds.n_classes(); ++c) {
        const auto &rows = members[c];
        const std::size_t m = rows.size();
        if (counts[c] >= majority)
            continue;
        const std::size_t k = std::min(k_neighbors, m - 1);
        // k nearest same-class neighbours of every member, ties by index.
        std::vector<std::vector<std::size_t>> neighbours(m);
        std::vector<std::pair<double, std::size_t>> dist(m);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b)
                dist[b] = {b == a ? std::numeric_limits<double>::infinity()
                                  : (ds.X.row(static_cast<Eigen::Index>(rows[a])) -
                                     ds.X.row(static_cast<Eigen::Index>(rows[b])))
                                        .squaredNorm(),
                           b};
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                              dist.end());
            for (std::size_t j = 0; j < k; ++j)
                neighbours[a].push_back(dist[j].second);
        }
        const std::size_t need = majority - m;
        for (std::size_t s = 0; s < need; ++s) {
            const std::size_t base = s % m;
            const std::size_t nn = neighbours[base][rng.index(k)];
            const double gap = rng.uniform_closed();
            const auto xi = ds.X.row(static_cast<Eigen::Index>(rows[base]));
            const auto xn = ds.X.row(static_cast<Eigen::Index>(rows[nn]));
            out.X.row(next++) = xi + gap * (xn - xi);
            out.y.push_back(c);
        }
    }
    return out;
}

RowTypeDataset smote_oversample(const RowTypeDataset &ds, std::size_t k_neighbors,
                                std::uint64_t seed) {
    Rng rng(seed);
    return smote_oversample(ds, k_neighbors, rng);
}

} // namespace hyquc::rtdpa
