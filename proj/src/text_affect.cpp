#include "memfuse/text_affect.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"

namespace memfuse {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

double parse_cell(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    auto [end, ec] = std::from_chars(first, last, v);
    if (first == last || ec != std::errc() || end != last) {
        throw InputError(where + ": cannot parse '" + cell + "' as a number");
    }
    if (!std::isfinite(v)) throw InputError(where + ": non-finite value '" + cell + "'");
    return v;
}

// Word tokens of the preprocessed text.
std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> words;
    for (auto& t : tokenize(preprocess(text))) {
        if (!t.punct) words.push_back(std::move(t.text));
    }
    return words;
}

template <typename Resource>
const std::vector<double>* lookup(const Resource& r, const std::string& token, const std::string& lemma) {
    if (const auto* v = r.find(token)) return v;
    if (lemma != token) return r.find(lemma);
    return nullptr;
}

// Per-resource means over matched tokens, concatenated; zero block for a miss.
template <typename Resource, typename DimOf>
PooledFeatures pool(const std::vector<std::string>& words, std::span<const Resource> resources, DimOf dim_of) {
    std::size_t total_dim = 0;
    for (const auto& r : resources) total_dim += dim_of(r);
    PooledFeatures out;
    out.values.assign(total_dim, 0.0);

    std::vector<std::string> lemmas;
    lemmas.reserve(words.size());
    for (const auto& w : words) lemmas.push_back(lemmatize(w));

    std::vector<bool> matched(words.size(), false);
    std::size_t offset = 0;
    for (const auto& r : resources) {
        const std::size_t dim = dim_of(r);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto* vec = lookup(r, words[i], lemmas[i]);
            if (!vec) continue;
            matched[i] = true;
            ++hits;
            for (std::size_t k = 0; k < dim; ++k) out.values[offset + k] += (*vec)[k];
        }
        if (hits > 0) {
            for (std::size_t k = 0; k < dim; ++k) out.values[offset + k] /= static_cast<double>(hits);
        }
        offset += dim;
    }
    if (!words.empty()) {
        out.coverage = static_cast<double>(std::count(matched.begin(), matched.end(), true)) /
                       static_cast<double>(words.size());
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Lexicon::Lexicon(std::string name, std::vector<std::string> dims) : name_(std::move(name)), dims_(std::move(dims)) {
    if (dims_.empty()) throw InputError("lexicon '" + name_ + "' declares no dimensions");
}

void Lexicon::add(const std::string& word, std::vector<double> values) {
    if (values.size() != dims_.size()) {
        throw InputError("lexicon '" + name_ + "': entry '" + word + "' has " + std::to_string(values.size()) +
                         " values, expected " + std::to_string(dims_.size()));
    }
    entries_[lower(word)] = std::move(values);
}

const std::vector<double>* Lexicon::find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

Lexicon Lexicon::scaled(double factor) const {
    Lexicon out(name_, dims_);
    for (const auto& [w, v] : entries_) {
        std::vector<double> s = v;
        for (double& x : s) x *= factor;
        out.entries_.emplace(w, std::move(s));
    }
    return out;
}

Lexicon load_lexicon_tsv(const std::filesystem::path& path, const std::string& name) {
    const std::string content = read_text_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    std::optional<Lexicon> lex;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line, '\t');
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        if (!lex) {
            if (cells.size() < 2) throw InputError(where + ": header must be word<TAB>dim1<TAB>...");
            lex.emplace(name, std::vector<std::string>(cells.begin() + 1, cells.end()));
            continue;
        }
        if (cells.size() != lex->dims().size() + 1) {
            throw InputError(where + ": expected " + std::to_string(lex->dims().size() + 1) + " fields, found " +
                             std::to_string(cells.size()));
        }
        std::vector<double> values;
        values.reserve(cells.size() - 1);
        for (std::size_t k = 1; k < cells.size(); ++k) values.push_back(parse_cell(cells[k], where));
        lex->add(cells[0], std::move(values));
    }
    if (!lex) throw InputError(path.string() + ": empty lexicon file");
    return std::move(*lex);
}

// ---------------------------------------------------------------------------

EmbeddingTable::EmbeddingTable(std::string name, std::size_t dim) : name_(std::move(name)), dim_(dim) {
    if (dim_ == 0) throw InputError("embedding table '" + name_ + "' has dimension 0");
}

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
    if (vec.size() != dim_) {
        throw InputError("embedding table '" + name_ + "': vector for '" + word + "' has length " +
                         std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    entries_.emplace(lower(word), std::move(vec));
}

const std::vector<double>* EmbeddingTable::find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

EmbeddingTable load_embedding_text(const std::filesystem::path& path, const std::string& name) {
    const std::string content = read_text_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    std::optional<EmbeddingTable> table;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        std::vector<double> vec;
        std::string cell;
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        while (fields >> cell) vec.push_back(parse_cell(cell, where));
        if (!table) {
            if (vec.empty()) throw InputError(where + ": no vector components");
            table.emplace(name, vec.size());
        }
        if (vec.size() != table->dim()) {
            throw InputError(where + ": expected " + std::to_string(table->dim()) + " components, found " +
                             std::to_string(vec.size()));
        }
        table->add(word, std::move(vec));
    }
    if (!table) throw InputError(path.string() + ": empty embedding file");
    return std::move(*table);
}

// ---------------------------------------------------------------------------

PooledFeatures lexical_features(const std::string& text, std::span<const Lexicon> lexicons, const RuleScorer& scorer) {
    if (lexicons.empty()) throw InputError("lexical_features: no lexicons loaded");
    PooledFeatures out = pool(word_tokens(text), lexicons, [](const Lexicon& l) { return l.dims().size(); });
    const SentimentScores s = scorer.score(text);
    out.values.insert(out.values.end(), {s.negative, s.neutral, s.positive, s.compound});
    return out;
}

PooledFeatures embed_features(const std::string& text, std::span<const EmbeddingTable> tables) {
    if (tables.empty()) throw InputError("embed_features: no embedding tables loaded");
    return pool(word_tokens(text), tables, [](const EmbeddingTable& t) { return t.dim(); });
}

std::size_t TextResources::lexical_dim() const {
    std::size_t n = RuleScorer::dim_names().size();
    for (const auto& l : lexicons) n += l.dims().size();
    return n;
}

std::size_t TextResources::embedding_dim() const {
    std::size_t n = 0;
    for (const auto& t : tables) n += t.dim();
    return n;
}

std::vector<std::string> TextResources::lexical_dim_names() const {
    std::vector<std::string> names;
    for (const auto& l : lexicons) {
        for (const auto& d : l.dims()) names.push_back(l.name() + "." + d);
    }
    for (const auto& d : RuleScorer::dim_names()) names.push_back(d);
    return names;
}

TextFeatures TextResources::extract(const std::string& text) const {
    auto lex = lexical_features(text, lexicons, scorer);
    auto emb = embed_features(text, tables);
    return TextFeatures{std::move(lex.values), std::move(emb.values), lex.coverage, emb.coverage};
}

TextResources load_text_resources(const std::filesystem::path& manifest) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(manifest));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(manifest.string() + ": " + e.what());
    }
    const auto base = manifest.parent_path();
    auto resolve = [&](const nlohmann::json& entry, const char* what) {
        if (!entry.is_object() || !entry.contains("path") || !entry.at("path").is_string()) {
            throw InputError(manifest.string() + ": each " + what + " entry needs a string 'path'");
        }
        std::filesystem::path p = entry.at("path").get<std::string>();
        return p.is_absolute() ? p : base / p;
    };
    auto name_of = [](const nlohmann::json& entry, const std::filesystem::path& p) {
        return entry.contains("name") ? entry.at("name").get<std::string>() : p.stem().string();
    };

    TextResources res;
    for (const auto& entry : doc.value("lexicons", nlohmann::json::array())) {
        const auto p = resolve(entry, "lexicon");
        Lexicon lex = load_lexicon_tsv(p, name_of(entry, p));
        if (entry.contains("dims") && entry.at("dims").get<std::size_t>() != lex.dims().size()) {
            throw InputError(p.string() + ": manifest declares " + entry.at("dims").dump() + " dims, file has " +
                             std::to_string(lex.dims().size()));
        }
        res.lexicons.push_back(std::move(lex));
    }
    if (!doc.contains("scorer")) throw InputError(manifest.string() + ": missing 'scorer'");
    res.scorer = load_rule_scorer(resolve(doc.at("scorer"), "scorer"));
    for (const auto& entry : doc.value("embeddings", nlohmann::json::array())) {
        const auto p = resolve(entry, "embedding");
        res.tables.push_back(load_embedding_text(p, name_of(entry, p)));
    }
    if (res.lexicons.empty()) throw InputError(manifest.string() + ": no lexicons listed");
    if (res.tables.empty()) throw InputError(manifest.string() + ": no embedding tables listed");
    return res;
}

}  // namespace memfuse
