#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace memfuse {

// ---------------------------------------------------------------------------
// Preprocessing and tokenization
// ---------------------------------------------------------------------------

// Normalizes a memory description before feature extraction. Rules apply in
// this order: decade references ("the 90s", "the 1990s", "'90s") become
// "that decade"; year tokens 1900-2099 become "that year"; every remaining
// digit run becomes "0"; contractions are expanded from a fixed table.
// Possessive "'s" is left alone (only "it's" and "that's" are expanded).
std::string preprocess(const std::string& text);

struct Token {
    std::string text;      // lowercased
    std::string original;  // as written, for capitalization cues
    bool punct = false;
};

// Words are runs of letters/digits (bytes >= 0x80 count as letters) with
// internal apostrophes; every other non-space character is its own
// punctuation token.
std::vector<Token> tokenize(const std::string& text);

// Rule-based lemma for a lowercase token: irregular table first, then
// possessive, plural, -ing and -ed stripping with consonant undoubling and
// silent-e restoration. Unknown shapes pass through unchanged.
std::string lemmatize(const std::string& token);

// ---------------------------------------------------------------------------
// Resources
// ---------------------------------------------------------------------------

class Lexicon {
public:
    Lexicon(std::string name, std::vector<std::string> dims);

    void add(const std::string& word, std::vector<double> values);
    const std::vector<double>* find(const std::string& word) const;

    const std::string& name() const { return name_; }
    const std::vector<std::string>& dims() const { return dims_; }
    std::size_t size() const { return entries_.size(); }

    // Every entry multiplied by `factor`.
    Lexicon scaled(double factor) const;

private:
    std::string name_;
    std::vector<std::string> dims_;
    std::unordered_map<std::string, std::vector<double>> entries_;
};

// TSV with header "word<TAB>dim1<TAB>dim2..."; words are lowercased.
Lexicon load_lexicon_tsv(const std::filesystem::path& path, const std::string& name);

class EmbeddingTable {
public:
    EmbeddingTable(std::string name, std::size_t dim);

    // Keys are lowercased; the first occurrence of a key wins.
    void add(const std::string& word, std::vector<double> vec);
    const std::vector<double>* find(const std::string& word) const;

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::string name_;
    std::size_t dim_;
    std::unordered_map<std::string, std::vector<double>> entries_;
};

// GloVe-style text: "word v1 v2 ... vd" per line, d inferred from the first line.
EmbeddingTable load_embedding_text(const std::filesystem::path& path, const std::string& name);

// ---------------------------------------------------------------------------
// Rule-based valence scorer
// ---------------------------------------------------------------------------

struct SentimentScores {
    double negative = 0.0;
    double neutral = 1.0;
    double positive = 0.0;
    double compound = 0.0;
};

// Valence lexicon (word -> [-4, 4]) plus booster, negation, exclamation and
// capitalization rules.
class RuleScorer {
public:
    static constexpr double kBoosterIncrement = 0.293;
    static constexpr double kNegationScalar = -0.74;
    static constexpr double kExclamationIncrement = 0.292;
    static constexpr int kMaxExclamations = 3;
    static constexpr double kCapsIncrement = 0.733;
    static constexpr double kNormalizationAlpha = 15.0;
    static constexpr std::size_t kWindow = 3;

    RuleScorer() = default;
    explicit RuleScorer(std::unordered_map<std::string, double> valences);

    void set(const std::string& word, double valence);
    // Valence for a lowercase token (raw form, then lemma), 0 when absent.
    double valence(const std::string& word) const;

    SentimentScores score(const std::string& text) const;

    static const std::vector<std::string>& dim_names();

private:
    std::unordered_map<std::string, double> valences_;
};

// TSV with header "word<TAB>valence".
RuleScorer load_rule_scorer(const std::filesystem::path& path);

SentimentScores rule_sentiment(const std::string& text, const RuleScorer& scorer);

// ---------------------------------------------------------------------------
// Feature extraction
// ---------------------------------------------------------------------------

struct PooledFeatures {
    std::vector<double> values;
    double coverage = 0.0;  // fraction of word tokens matched by at least one resource
};

// Per-lexicon dimension-wise means over matched tokens (raw form, then lemma),
// concatenated in lexicon order, followed by the four scorer outputs.
PooledFeatures lexical_features(const std::string& text, std::span<const Lexicon> lexicons,
                                const RuleScorer& scorer);

// Per-table means of in-vocabulary token vectors, concatenated in table order.
PooledFeatures embed_features(const std::string& text, std::span<const EmbeddingTable> tables);

struct TextFeatures {
    std::vector<double> lexical;
    std::vector<double> embedding;
    double lexical_coverage = 0.0;
    double embedding_coverage = 0.0;
};

// The full text resource suite: lexicons in load order, the rule scorer and
// the embedding tables.
struct TextResources {
    std::vector<Lexicon> lexicons;
    RuleScorer scorer;
    std::vector<EmbeddingTable> tables;

    std::size_t lexical_dim() const;
    std::size_t embedding_dim() const;
    std::vector<std::string> lexical_dim_names() const;

    TextFeatures extract(const std::string& text) const;
};

// Loads a resource manifest:
// {"lexicons": [{"name", "path"}...], "scorer": {"path"}, "embeddings": [{"name", "path"}...]}
// Relative paths resolve against the manifest's directory.
TextResources load_text_resources(const std::filesystem::path& manifest);

// Extracted features of one response's memory text.
struct TextFeatureRow {
    std::string participant_id;
    std::string video_id;
    TextFeatures features;
};

// Writes lexical.csv and embedding.csv (one row per response, in order) and a
// manifest.json listing the response keys and coverage values. Returns the
// manifest path.
std::filesystem::path write_text_features(const std::filesystem::path& dir, std::span<const TextFeatureRow> rows,
                                          std::size_t lexical_dim, std::size_t embedding_dim);
std::vector<TextFeatureRow> load_text_features(const std::filesystem::path& manifest);

}  // namespace memfuse
