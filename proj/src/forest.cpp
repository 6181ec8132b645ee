#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "memfuse/error.hpp"
#include "memfuse/regressors.hpp"
#include "memfuse/seeds.hpp"

namespace memfuse {

namespace {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    std::size_t n_left = 0;
};

// Columns sorted once per forest; each tree derives its bootstrap order from
// them and keeps every feature's node segment sorted by stable partitioning.
struct Presorted {
    std::vector<std::vector<Eigen::Index>> order;  // per feature, rows by value

    explicit Presorted(const Matrix& X) : order(static_cast<std::size_t>(X.cols())) {
        for (Eigen::Index f = 0; f < X.cols(); ++f) {
            auto& o = order[static_cast<std::size_t>(f)];
            o.resize(static_cast<std::size_t>(X.rows()));
            std::iota(o.begin(), o.end(), Eigen::Index{0});
            std::stable_sort(o.begin(), o.end(), [&](Eigen::Index a, Eigen::Index b) { return X(a, f) < X(b, f); });
        }
    }
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const Vector& y, const ForestParams& p, Rng& rng, const Presorted& pre)
        : X_(X), y_(y), p_(p), rng_(rng), pre_(pre), features_(static_cast<std::size_t>(X.cols())) {
        std::iota(features_.begin(), features_.end(), 0);
        const double want = std::round(p.max_features * static_cast<double>(X.cols()));
        mtry_ = static_cast<std::size_t>(std::clamp(want, 1.0, static_cast<double>(X.cols())));
    }

    RegressionTree build(const std::vector<Eigen::Index>& boot) {
        // sorted[f] holds row ids (with bootstrap multiplicity) ordered by feature f
        std::vector<int> count(static_cast<std::size_t>(X_.rows()), 0);
        for (auto b : boot) ++count[static_cast<std::size_t>(b)];
        const std::size_t n = boot.size();
        sorted_.assign(features_.size(), {});
        for (std::size_t f = 0; f < features_.size(); ++f) {
            auto& dst = sorted_[f];
            dst.reserve(n);
            for (auto row : pre_.order[f]) {
                for (int c = 0; c < count[static_cast<std::size_t>(row)]; ++c) {
                    dst.push_back(static_cast<std::uint32_t>(row));
                }
            }
        }
        scratch_.resize(n);
        goes_left_.assign(static_cast<std::size_t>(X_.rows()), 0);
        RegressionTree tree;
        grow(tree, 0, n, 0);
        return tree;
    }

private:
    int grow(RegressionTree& tree, std::size_t lo, std::size_t hi, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const auto& any = sorted_.front();
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += y_[any[i]];
        const std::size_t count = hi - lo;
        const double n = static_cast<double>(count);
        tree.nodes[id].value = sum / n;
        tree.nodes[id].n_samples = static_cast<int>(count);

        const std::size_t min_leaf = static_cast<std::size_t>(p_.min_leaf);
        if (count < 2 * min_leaf) return id;
        if (p_.max_depth && depth >= *p_.max_depth) return id;
        bool constant = true;
        for (std::size_t i = lo; i < hi; ++i) {
            if (y_[any[i]] != y_[any[lo]]) {
                constant = false;
                break;
            }
        }
        if (constant) return id;

        const SplitCandidate best = find_split(lo, hi, sum);
        if (best.feature < 0) return id;

        // rows are either all left or all right, so marking by row id is safe
        const auto& split_col = sorted_[static_cast<std::size_t>(best.feature)];
        for (std::size_t i = lo; i < hi; ++i) {
            const auto row = split_col[i];
            goes_left_[static_cast<std::size_t>(row)] = X_(row, best.feature) <= best.threshold ? 1 : 0;
        }
        for (auto& col : sorted_) {
            std::size_t l = lo;
            std::size_t r = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                const auto row = col[i];
                const std::size_t g = static_cast<std::size_t>(goes_left_[row]);
                col[l] = row;
                scratch_[r] = row;
                l += g;
                r += 1 - g;
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                      col.begin() + static_cast<std::ptrdiff_t>(l));
        }
        const std::size_t mid = lo + best.n_left;

        tree.nodes[id].feature = best.feature;
        tree.nodes[id].threshold = best.threshold;
        const int l = grow(tree, lo, mid, depth + 1);
        tree.nodes[id].left = l;
        const int r = grow(tree, mid, hi, depth + 1);
        tree.nodes[id].right = r;
        return id;
    }

    SplitCandidate find_split(std::size_t lo, std::size_t hi, double total) {
        // partial Fisher-Yates draws mtry distinct features
        for (std::size_t k = 0; k < mtry_; ++k) {
            const std::size_t pick = k + rng_.index(features_.size() - k);
            std::swap(features_[k], features_[pick]);
        }
        const std::size_t count = hi - lo;
        const double n = static_cast<double>(count);
        const std::size_t min_leaf = static_cast<std::size_t>(p_.min_leaf);
        SplitCandidate best;
        best.score = total * total / n + 1e-12 * std::max(1.0, std::abs(total * total / n));
        for (std::size_t k = 0; k < mtry_; ++k) {
            const int f = features_[k];
            const auto& col = sorted_[static_cast<std::size_t>(f)];
            if (X_(col[lo], f) == X_(col[hi - 1], f)) continue;
            double left_sum = 0.0;
            double next = X_(col[lo], f);
            for (std::size_t s = 0; s + 1 < count; ++s) {
                const double cur = next;
                next = X_(col[lo + s + 1], f);
                left_sum += y_[col[lo + s]];
                const std::size_t nl = s + 1;
                const std::size_t nr = count - nl;
                if (nl < min_leaf) continue;
                if (nr < min_leaf) break;
                if (cur == next) continue;
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(nl) +
                                     right_sum * right_sum / static_cast<double>(nr);
                if (score > best.score) {
                    double thr = 0.5 * (cur + next);
                    if (!(thr < next)) thr = cur;
                    best.feature = f;
                    best.threshold = thr;
                    best.score = score;
                    best.n_left = nl;
                }
            }
        }
        return best;
    }

    const Matrix& X_;
    const Vector& y_;
    const ForestParams& p_;
    Rng& rng_;
    const Presorted& pre_;
    std::vector<int> features_;
    std::size_t mtry_ = 1;
    std::vector<std::vector<std::uint32_t>> sorted_;
    std::vector<std::uint32_t> scratch_;
    std::vector<char> goes_left_;
};

}  // namespace

void ForestParams::validate() const {
    if (n_trees < 1) throw InputError("forest: n_trees must be at least 1");
    if (!(max_features > 0.0 && max_features <= 1.0)) throw InputError("forest: max_features must be in (0, 1]");
    if (min_leaf < 1) throw InputError("forest: min_leaf must be at least 1");
    if (max_depth && *max_depth < 1) throw InputError("forest: max_depth must be at least 1");
}

double RegressionTree::predict(const double* row, Eigen::Index stride) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        id = row[node.feature * stride] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
}

ForestModel fit_forest(const Matrix& X, const Vector& y, const ForestParams& params) {
    params.validate();
    if (X.rows() != y.size()) throw std::invalid_argument("fit_forest: X/y row mismatch");
    if (X.rows() < 2 * static_cast<Eigen::Index>(params.min_leaf)) {
        throw InputError("fit_forest: need at least 2*min_leaf = " + std::to_string(2 * params.min_leaf) +
                         " samples, got " + std::to_string(X.rows()));
    }
    if (X.cols() == 0) throw InputError("fit_forest: no features");
    if (!X.allFinite() || !y.allFinite()) throw InputError("fit_forest: non-finite input");

    ForestModel m;
    m.params = params;
    m.n_features = X.cols();
    m.trees.reserve(static_cast<std::size_t>(params.n_trees));
    const auto n = static_cast<std::size_t>(X.rows());
    const Presorted pre(X);
    for (int t = 0; t < params.n_trees; ++t) {
        // each tree owns its stream, so results do not depend on build order
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::vector<Eigen::Index> boot(n);
        for (auto& b : boot) b = static_cast<Eigen::Index>(rng.index(n));
        TreeBuilder builder(X, y, params, rng, pre);
        m.trees.push_back(builder.build(boot));
    }
    return m;
}

Vector predict_forest(const ForestModel& m, const Matrix& X) {
    if (X.cols() != m.n_features) {
        throw std::invalid_argument("predict_forest: expected " + std::to_string(m.n_features) + " features, got " +
                                    std::to_string(X.cols()));
    }
    if (m.trees.empty()) throw std::invalid_argument("predict_forest: model has no trees");
    Vector out = Vector::Zero(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double* row = X.data() + i;
        double s = 0.0;
        for (const auto& tree : m.trees) s += tree.predict(row, X.rows());
        out[i] = s / static_cast<double>(m.trees.size());
    }
    return out;
}

}  // namespace memfuse
