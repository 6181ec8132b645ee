#include "memfuse/model_io.hpp"

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"

namespace memfuse {

namespace {

json header(std::string_view kind) {
    return json{{"kind", kind}, {"format_version", kModelFormatVersion}};
}

template <typename T>
T get(const json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("model JSON: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("model JSON: field '") + key + "': " + e.what());
    }
}

}  // namespace

void check_header(const json& j, std::string_view kind) {
    if (!j.is_object()) throw InputError("model JSON: expected an object");
    const auto k = get<std::string>(j, "kind");
    if (k != kind) throw InputError("model JSON: expected kind '" + std::string(kind) + "', found '" + k + "'");
    const int v = get<int>(j, "format_version");
    if (v < 1 || v > kModelFormatVersion) {
        throw InputError("model JSON: unsupported format_version " + std::to_string(v));
    }
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw InputError("model JSON: expected a numeric array");
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
    return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index cols) {
    if (!j.is_array()) throw InputError("model JSON: expected an array of rows");
    Matrix m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Vector row = vector_from_json(j[i]);
        if (row.size() != cols) throw InputError("model JSON: matrix row " + std::to_string(i) + " has wrong width");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

json scaler_to_json(const Scaler& s) {
    json j = header("scaler");
    j["means"] = vector_to_json(s.means());
    j["stds"] = vector_to_json(s.stds());
    return j;
}

Scaler scaler_from_json(const json& j) {
    check_header(j, "scaler");
    try {
        return Scaler(vector_from_json(j.at("means")), vector_from_json(j.at("stds")));
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("model JSON: scaler: ") + e.what());
    }
}

json svr_to_json(const SvrModel& m) {
    json j = header("svr");
    json p = {{"c", m.params.c}, {"epsilon", m.params.epsilon}, {"tol", m.params.tol},
              {"max_passes", m.params.max_passes}};
    p["gamma"] = m.params.gamma ? json(*m.params.gamma) : json(nullptr);
    j["params"] = p;
    j["gamma"] = m.gamma;
    j["bias"] = m.bias;
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    j["dual_objective"] = m.dual_objective;
    j["scaler"] = scaler_to_json(m.scaler);
    j["dual_coefs"] = vector_to_json(m.dual_coefs);
    j["support_vectors"] = matrix_to_json(m.support_vectors);
    return j;
}

SvrModel svr_from_json(const json& j) {
    check_header(j, "svr");
    SvrModel m;
    const json& p = j.at("params");
    m.params.c = get<double>(p, "c");
    m.params.epsilon = get<double>(p, "epsilon");
    m.params.tol = get<double>(p, "tol");
    m.params.max_passes = get<int>(p, "max_passes");
    if (p.contains("gamma") && !p.at("gamma").is_null()) m.params.gamma = get<double>(p, "gamma");
    m.params.validate();
    m.gamma = get<double>(j, "gamma");
    m.bias = get<double>(j, "bias");
    m.converged = get<bool>(j, "converged");
    m.iterations = get<std::size_t>(j, "iterations");
    m.dual_objective = get<double>(j, "dual_objective");
    m.scaler = scaler_from_json(j.at("scaler"));
    m.dual_coefs = vector_from_json(j.at("dual_coefs"));
    m.support_vectors = matrix_from_json(j.at("support_vectors"), m.scaler.n_features());
    if (m.support_vectors.rows() != m.dual_coefs.size()) {
        throw InputError("model JSON: svr support vector count does not match dual_coefs");
    }
    return m;
}

json forest_to_json(const ForestModel& m) {
    json j = header("forest");
    json p = {{"n_trees", m.params.n_trees}, {"max_features", m.params.max_features},
              {"min_leaf", m.params.min_leaf}, {"seed", m.params.seed}};
    p["max_depth"] = m.params.max_depth ? json(*m.params.max_depth) : json(nullptr);
    j["params"] = p;
    j["n_features"] = m.n_features;
    json trees = json::array();
    for (const auto& t : m.trees) {
        std::vector<int> feature, left, right, count;
        std::vector<double> threshold, value;
        for (const auto& node : t.nodes) {
            feature.push_back(node.feature);
            left.push_back(node.left);
            right.push_back(node.right);
            count.push_back(node.n_samples);
            threshold.push_back(node.threshold);
            value.push_back(node.value);
        }
        trees.push_back({{"feature", feature},
                         {"threshold", threshold},
                         {"left", left},
                         {"right", right},
                         {"value", value},
                         {"n_samples", count}});
    }
    j["trees"] = std::move(trees);
    return j;
}

ForestModel forest_from_json(const json& j) {
    check_header(j, "forest");
    ForestModel m;
    const json& p = j.at("params");
    m.params.n_trees = get<int>(p, "n_trees");
    m.params.max_features = get<double>(p, "max_features");
    m.params.min_leaf = get<int>(p, "min_leaf");
    m.params.seed = get<std::uint64_t>(p, "seed");
    if (p.contains("max_depth") && !p.at("max_depth").is_null()) m.params.max_depth = get<int>(p, "max_depth");
    m.params.validate();
    m.n_features = get<Eigen::Index>(j, "n_features");
    for (const auto& t : j.at("trees")) {
        const auto feature = get<std::vector<int>>(t, "feature");
        const auto threshold = get<std::vector<double>>(t, "threshold");
        const auto left = get<std::vector<int>>(t, "left");
        const auto right = get<std::vector<int>>(t, "right");
        const auto value = get<std::vector<double>>(t, "value");
        const auto count = get<std::vector<int>>(t, "n_samples");
        const std::size_t n = feature.size();
        if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
            count.size() != n) {
            throw InputError("model JSON: forest tree arrays are empty or of unequal length");
        }
        RegressionTree tree;
        tree.nodes.resize(n);
        const int limit = static_cast<int>(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto& node = tree.nodes[k];
            node = TreeNode{feature[k], threshold[k], left[k], right[k], value[k], count[k]};
            if (node.feature >= m.n_features) throw InputError("model JSON: forest split on unknown feature");
            const int self = static_cast<int>(k);
            // children always follow their parent, which also rules out cycles
            if (node.feature >= 0 && (node.left <= self || node.left >= limit || node.right <= self ||
                                      node.right >= limit)) {
                throw InputError("model JSON: forest node " + std::to_string(k) + " has invalid children");
            }
        }
        m.trees.push_back(std::move(tree));
    }
    if (m.trees.empty()) throw InputError("model JSON: forest has no trees");
    return m;
}

json ridge_to_json(const RidgeModel& m) {
    json j = header("ridge");
    j["alpha"] = m.alpha;
    j["intercept"] = m.intercept;
    j["weights"] = vector_to_json(m.weights);
    j["scaler"] = scaler_to_json(m.scaler);
    return j;
}

RidgeModel ridge_from_json(const json& j) {
    check_header(j, "ridge");
    RidgeModel m;
    m.alpha = get<double>(j, "alpha");
    m.intercept = get<double>(j, "intercept");
    m.weights = vector_from_json(j.at("weights"));
    m.scaler = scaler_from_json(j.at("scaler"));
    if (m.weights.size() != m.scaler.n_features()) throw InputError("model JSON: ridge weights/scaler mismatch");
    return m;
}

json load_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void save_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

}  // namespace memfuse
