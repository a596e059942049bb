#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylo/error.hpp"
#include "stylo/model.hpp"
#include "stylo/rng.hpp"

namespace stylo {

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

// Threshold strictly above lo and at most hi.
double midpoint(double lo, double hi) {
    const double t = lo + (hi - lo) / 2.0;
    return t > lo ? t : hi;
}

struct NodeTotals {
    double grad = 0.0;
    double hess = 0.0;
};

}  // namespace

double Tree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

double mean_logistic_loss(std::span<const double> margins, std::span<const int> labels) {
    double s = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double m = labels[i] == 1 ? -margins[i] : margins[i];
        s += m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    return s / static_cast<double>(margins.size());
}

double second_order_gain(double gl, double hl, double gr, double hr, double lambda) {
    const double g = gl + gr;
    const double h = hl + hr;
    return gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda);
}

ColumnIndex build_column_index(const Dataset& data) {
    ColumnIndex index;
    index.order.resize(data.cols);
    for (std::size_t f = 0; f < data.cols; ++f) {
        auto& order = index.order[f];
        order.resize(data.rows);
        std::iota(order.begin(), order.end(), std::uint32_t{0});
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double xa = data.at(a, f), xb = data.at(b, f);
            return xa < xb || (xa == xb && a < b);
        });
    }
    return index;
}

std::vector<SplitCandidate> find_best_splits(const Dataset& data, const ColumnIndex& index,
                                             std::span<const double> grad, std::span<const double> hess,
                                             std::span<const int> node_of_row, std::size_t num_nodes,
                                             const GbtParams& params, Execution execution) {
    std::vector<NodeTotals> totals(num_nodes);
    for (std::size_t r = 0; r < data.rows; ++r) {
        const int j = node_of_row[r];
        if (j < 0) continue;
        totals[static_cast<std::size_t>(j)].grad += grad[r];
        totals[static_cast<std::size_t>(j)].hess += hess[r];
    }

    const std::size_t num_features = data.cols;
    std::vector<SplitCandidate> per_feature(num_features * num_nodes);
    const long long nf = static_cast<long long>(num_features);
    const bool parallel = execution == Execution::parallel && num_features > 1;

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long fi = 0; fi < nf; ++fi) {
        const auto f = static_cast<std::size_t>(fi);
        std::vector<double> gl(num_nodes, 0.0), hl(num_nodes, 0.0), last(num_nodes, 0.0);
        std::vector<char> seen(num_nodes, 0);
        SplitCandidate* best = per_feature.data() + f * num_nodes;
        for (std::uint32_t r : index.order[f]) {
            const int jn = node_of_row[r];
            if (jn < 0) continue;
            const auto j = static_cast<std::size_t>(jn);
            const double x = data.at(r, f);
            if (seen[j] && x > last[j]) {
                const double gr = totals[j].grad - gl[j];
                const double hr = totals[j].hess - hl[j];
                if (hl[j] >= params.min_child_weight && hr >= params.min_child_weight) {
                    const double gain = second_order_gain(gl[j], hl[j], gr, hr, params.lambda);
                    if (gain > best[j].gain) {
                        best[j] = {static_cast<int>(f), midpoint(last[j], x), gain, gl[j], hl[j], gr, hr};
                    }
                }
            }
            gl[j] += grad[r];
            hl[j] += hess[r];
            last[j] = x;
            seen[j] = 1;
        }
    }

    std::vector<SplitCandidate> out(num_nodes);
    for (std::size_t j = 0; j < num_nodes; ++j) {
        for (std::size_t f = 0; f < num_features; ++f) {
            const auto& c = per_feature[f * num_nodes + j];
            if (c.valid() && c.gain > out[j].gain) out[j] = c;
        }
    }
    return out;
}

SplitCandidate find_best_split_reference(const Dataset& data, std::span<const std::size_t> rows,
                                         std::span<const double> grad, std::span<const double> hess,
                                         const GbtParams& params) {
    double g_total = 0.0, h_total = 0.0;
    for (std::size_t r : rows) {
        g_total += grad[r];
        h_total += hess[r];
    }
    SplitCandidate best;
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    for (std::size_t f = 0; f < data.cols; ++f) {
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            const double xa = data.at(a, f), xb = data.at(b, f);
            return xa < xb || (xa == xb && a < b);
        });
        double gl = 0.0, hl = 0.0;
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            const std::size_t r = sorted[k];
            if (k > 0) {
                const double prev = data.at(sorted[k - 1], f);
                const double x = data.at(r, f);
                const double gr = g_total - gl;
                const double hr = h_total - hl;
                if (x > prev && hl >= params.min_child_weight && hr >= params.min_child_weight) {
                    const double gain = second_order_gain(gl, hl, gr, hr, params.lambda);
                    if (gain > best.gain) best = {static_cast<int>(f), midpoint(prev, x), gain, gl, hl, gr, hr};
                }
            }
            gl += grad[r];
            hl += hess[r];
        }
    }
    return best;
}

TreeEnsemble train_gbt(const Dataset& data, const GbtParams& params, Execution execution, TrainingMeta* meta) {
    const std::size_t n = data.rows;
    TreeEnsemble ensemble;
    ensemble.base_margin = 0.0;  // base score 0.5
    const ColumnIndex index = build_column_index(data);
    std::vector<double> margin(n, ensemble.base_margin), grad(n), hess(n);
    std::vector<double> history{mean_logistic_loss(margin, data.labels)};
    std::vector<int> slot(n);

    for (int round = 0; round < params.rounds; ++round) {
        for (std::size_t r = 0; r < n; ++r) {
            const double p = sigmoid(margin[r]);
            grad[r] = p - static_cast<double>(data.labels[r]);
            hess[r] = std::max(p * (1.0 - p), 1e-16);
        }
        Tree tree;
        tree.nodes.emplace_back();
        std::vector<int> active{0};  // tree node index per slot
        std::fill(slot.begin(), slot.end(), 0);
        std::vector<NodeTotals> totals(1);
        for (std::size_t r = 0; r < n; ++r) {
            totals[0].grad += grad[r];
            totals[0].hess += hess[r];
        }

        auto make_leaf = [&](int node, const NodeTotals& t) {
            tree.nodes[static_cast<std::size_t>(node)].value = -t.grad / (t.hess + params.lambda) * params.learning_rate;
            tree.nodes[static_cast<std::size_t>(node)].cover = t.hess;
        };

        for (int depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
            const auto best =
                find_best_splits(data, index, grad, hess, slot, active.size(), params, execution);
            std::vector<int> next_active;
            std::vector<NodeTotals> next_totals;
            std::vector<int> child_slot(active.size() * 2, -1);
            for (std::size_t j = 0; j < active.size(); ++j) {
                const int node = active[j];
                if (!best[j].valid()) {
                    make_leaf(node, totals[j]);
                    continue;
                }
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& split = tree.nodes[static_cast<std::size_t>(node)];
                split.feature = best[j].feature;
                split.threshold = best[j].threshold;
                split.gain = best[j].gain;
                split.cover = totals[j].hess;
                split.left = left;
                split.right = left + 1;
                child_slot[2 * j] = static_cast<int>(next_active.size());
                next_active.push_back(left);
                next_totals.push_back({best[j].left_grad, best[j].left_hess});
                child_slot[2 * j + 1] = static_cast<int>(next_active.size());
                next_active.push_back(left + 1);
                next_totals.push_back({best[j].right_grad, best[j].right_hess});
            }
            for (std::size_t r = 0; r < n; ++r) {
                const int j = slot[r];
                if (j < 0) continue;
                const auto& split = tree.nodes[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])];
                if (split.is_leaf()) {
                    slot[r] = -1;
                    continue;
                }
                const bool go_left = data.at(r, static_cast<std::size_t>(split.feature)) < split.threshold;
                slot[r] = child_slot[2 * static_cast<std::size_t>(j) + (go_left ? 0 : 1)];
            }
            // Child totals are recomputed in row order so every node sees the
            // same summation order as a fresh find_best_splits call.
            std::vector<NodeTotals> recomputed(next_active.size());
            for (std::size_t r = 0; r < n; ++r) {
                if (slot[r] < 0) continue;
                recomputed[static_cast<std::size_t>(slot[r])].grad += grad[r];
                recomputed[static_cast<std::size_t>(slot[r])].hess += hess[r];
            }
            active = std::move(next_active);
            totals = std::move(recomputed);
        }
        for (std::size_t j = 0; j < active.size(); ++j) make_leaf(active[j], totals[j]);

        for (std::size_t r = 0; r < n; ++r) margin[r] += tree.predict(data.row(r));
        ensemble.trees.push_back(std::move(tree));
        const double loss = mean_logistic_loss(margin, data.labels);
        if (!std::isfinite(loss)) {
            throw RuntimeFailure("GBT: non-finite training loss at round " + std::to_string(round));
        }
        history.push_back(loss);
    }
    if (meta != nullptr) {
        meta->rounds_run = params.rounds;
        meta->final_loss = history.back();
        meta->loss_history = std::move(history);
    }
    return ensemble;
}

namespace {

Tree build_extra_tree(const Dataset& data, const ExtraTreesParams& params, std::size_t max_features, Rng& rng) {
    Tree tree;
    struct Pending {
        int node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    std::vector<std::size_t> all(data.rows);
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(all)});
    std::vector<std::size_t> features(data.cols);

    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();
        const auto& rows = item.rows;
        const double count = static_cast<double>(rows.size());
        std::size_t pos = 0;
        for (std::size_t r : rows) pos += static_cast<std::size_t>(data.labels[r]);
        auto& node = tree.nodes[static_cast<std::size_t>(item.node)];
        node.cover = count;
        node.value = static_cast<double>(pos) / count;
        if (rows.size() < static_cast<std::size_t>(params.min_samples_split) || pos == 0 || pos == rows.size()) {
            continue;
        }

        std::iota(features.begin(), features.end(), std::size_t{0});
        double best_impurity = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        const double parent_gini = 2.0 * node.value * (1.0 - node.value);
        std::size_t evaluated = 0;
        for (std::size_t k = 0; k < features.size() && evaluated < max_features; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(rng.below(features.size() - k));
            std::swap(features[k], features[pick]);
            const std::size_t f = features[k];
            double lo = data.at(rows.front(), f), hi = lo;
            for (std::size_t r : rows) {
                lo = std::min(lo, data.at(r, f));
                hi = std::max(hi, data.at(r, f));
            }
            if (!(hi > lo)) continue;  // constant here; does not count toward max_features
            ++evaluated;
            double t = lo + rng.uniform_open() * (hi - lo);
            if (!(t > lo)) t = hi;
            double nl = 0.0, pl = 0.0, pr = 0.0;
            for (std::size_t r : rows) {
                if (data.at(r, f) < t) {
                    nl += 1.0;
                    pl += data.labels[r];
                } else {
                    pr += data.labels[r];
                }
            }
            const double nr = count - nl;
            const double ql = pl / nl, qr = pr / nr;
            const double impurity = (nl * 2.0 * ql * (1.0 - ql) + nr * 2.0 * qr * (1.0 - qr)) / count;
            if (best_feature < 0 || impurity < best_impurity) {
                best_impurity = impurity;
                best_feature = static_cast<int>(f);
                best_threshold = t;
            }
        }
        if (best_feature < 0) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            (data.at(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left_rows : right_rows).push_back(r);
        }
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& split = tree.nodes[static_cast<std::size_t>(item.node)];
        split.feature = best_feature;
        split.threshold = best_threshold;
        split.gain = parent_gini - best_impurity;
        split.left = left;
        split.right = left + 1;
        stack.push_back({left + 1, std::move(right_rows)});
        stack.push_back({left, std::move(left_rows)});
    }
    return tree;
}

}  // namespace

TreeEnsemble train_extra_trees(const Dataset& data, const ExtraTreesParams& params, std::uint64_t seed,
                               Execution execution) {
    const std::size_t max_features =
        params.max_features > 0
            ? static_cast<std::size_t>(params.max_features)
            : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(data.cols))));
    TreeEnsemble ensemble;
    ensemble.trees.resize(static_cast<std::size_t>(params.trees));
    const long long count = params.trees;
    const bool parallel = execution == Execution::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long t = 0; t < count; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        ensemble.trees[static_cast<std::size_t>(t)] = build_extra_tree(data, params, max_features, rng);
    }
    return ensemble;
}

}  // namespace stylo
