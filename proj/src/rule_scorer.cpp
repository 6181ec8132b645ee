#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"
#include "memfuse/text_affect.hpp"

namespace memfuse {

namespace {

// Intensifiers (+1) and dampeners (-1).
const std::unordered_map<std::string, int>& boosters() {
    static const std::unordered_map<std::string, int> table = {
        {"absolutely", 1}, {"amazingly", 1}, {"awfully", 1},    {"completely", 1}, {"deeply", 1},
        {"enormously", 1}, {"entirely", 1},  {"especially", 1}, {"extremely", 1},  {"highly", 1},
        {"incredibly", 1}, {"intensely", 1}, {"really", 1},     {"remarkably", 1}, {"so", 1},
        {"thoroughly", 1}, {"totally", 1},   {"truly", 1},      {"utterly", 1},    {"very", 1},
        {"most", 1},       {"more", 1},      {"super", 1},      {"almost", -1},    {"barely", -1},
        {"hardly", -1},    {"kinda", -1},    {"less", -1},      {"little", -1},    {"marginally", -1},
        {"partly", -1},    {"scarcely", -1}, {"slightly", -1},  {"somewhat", -1},  {"occasionally", -1},
    };
    return table;
}

const std::unordered_set<std::string>& negations() {
    static const std::unordered_set<std::string> words = {
        "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "cannot", "without",
        "rarely", "seldom", "despite",
    };
    return words;
}

bool all_caps(const std::string& s) {
    int letters = 0;
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalpha(c)) {
            if (!std::isupper(c)) return false;
            ++letters;
        }
    }
    return letters >= 2;
}

bool clause_break(const Token& t) {
    return t.punct && (t.text == "." || t.text == "?" || t.text == ";" || t.text == ":" || t.text == ",");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

RuleScorer::RuleScorer(std::unordered_map<std::string, double> valences) : valences_(std::move(valences)) {}

void RuleScorer::set(const std::string& word, double valence) { valences_[word] = valence; }

double RuleScorer::valence(const std::string& word) const {
    if (auto it = valences_.find(word); it != valences_.end()) return it->second;
    if (auto it = valences_.find(lemmatize(word)); it != valences_.end()) return it->second;
    return 0.0;
}

const std::vector<std::string>& RuleScorer::dim_names() {
    static const std::vector<std::string> names = {"rule_negative", "rule_neutral", "rule_positive",
                                                   "rule_compound"};
    return names;
}

SentimentScores RuleScorer::score(const std::string& text) const {
    const std::vector<Token> tokens = tokenize(preprocess(text));

    std::size_t words = 0;
    std::size_t caps = 0;
    for (const auto& t : tokens) {
        if (t.punct) continue;
        ++words;
        if (all_caps(t.original)) ++caps;
    }
    if (words == 0) return {};
    const bool mixed_case = caps > 0 && caps < words;

    std::vector<double> val(tokens.size(), 0.0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.punct || boosters().count(t.text)) continue;
        double v = valence(t.text);
        if (v == 0.0) continue;
        const double dir = sign(v);
        if (mixed_case && all_caps(t.original)) v += dir * kCapsIncrement;

        // Left window of up to three words within the clause.
        bool negated = false;
        std::size_t seen = 0;
        for (std::size_t k = i; k > 0 && seen < kWindow; --k) {
            const Token& prev = tokens[k - 1];
            if (clause_break(prev) || prev.text == "!") break;
            if (prev.punct) continue;
            if (auto b = boosters().find(prev.text); b != boosters().end()) {
                double scalar = kBoosterIncrement * b->second * dir;
                if (mixed_case && all_caps(prev.original)) scalar += dir * kCapsIncrement;
                v += scalar * (seen == 0 ? 1.0 : (seen == 1 ? 0.95 : 0.9));
            }
            if (negations().count(prev.text)) negated = true;
            ++seen;
        }
        if (negated) v *= kNegationScalar;
        val[i] = v;
    }

    // Each run of '!' emphasizes the nearest preceding valenced word of its sentence.
    std::vector<int> bangs(tokens.size(), 0);
    std::ptrdiff_t last = -1;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (val[i] != 0.0) {
            last = static_cast<std::ptrdiff_t>(i);
        } else if (tokens[i].text == "!" && last >= 0) {
            bangs[static_cast<std::size_t>(last)] = std::min(bangs[static_cast<std::size_t>(last)] + 1, kMaxExclamations);
        } else if (tokens[i].text == "." || tokens[i].text == "?") {
            last = -1;
        }
    }

    double sum = 0.0;
    double pos = 0.0;
    double neg = 0.0;
    double neu = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].punct) continue;
        double v = val[i];
        if (v != 0.0) v += sign(v) * kExclamationIncrement * bangs[i];
        sum += v;
        if (v > 0.0) {
            pos += v + 1.0;
        } else if (v < 0.0) {
            neg += -v + 1.0;
        } else {
            neu += 1.0;
        }
    }

    SentimentScores s;
    s.compound = std::clamp(sum / std::sqrt(sum * sum + kNormalizationAlpha), -1.0, 1.0);
    const double total = pos + neg + neu;
    s.positive = pos / total;
    s.negative = neg / total;
    s.neutral = neu / total;
    return s;
}

SentimentScores rule_sentiment(const std::string& text, const RuleScorer& scorer) { return scorer.score(text); }

RuleScorer load_rule_scorer(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    RuleScorer scorer;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) + ": expected word<TAB>valence");
        }
        std::string word = line.substr(0, tab);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        NumericRows v = parse_numeric_csv(line.substr(tab + 1), path.string() + " line " + std::to_string(line_no), 1);
        if (v.empty()) throw InputError(path.string() + ": line " + std::to_string(line_no) + ": missing valence");
        scorer.set(word, v[0][0]);
    }
    return scorer;
}

}  // namespace memfuse
