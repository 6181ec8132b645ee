#include <cctype>
#include <regex>
#include <string>
#include <vector>

#include "memfuse/text_affect.hpp"

namespace memfuse {

namespace {

using Replacer = std::string (*)(const std::smatch&);

std::string replace_all(const std::string& in, const std::regex& re, Replacer fn) {
    std::string out;
    auto it = std::sregex_iterator(in.begin(), in.end(), re);
    auto last = in.cbegin();
    for (; it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        out.append(last, m[0].first);
        out += fn(m);
        last = m[0].second;
    }
    out.append(last, in.cend());
    return out;
}

std::string replace_all(const std::string& in, const std::regex& re, const std::string& with) {
    return std::regex_replace(in, re, with);
}

// Keeps the capitalization of the first letter of the matched text.
std::string match_case(const std::string& matched, std::string replacement) {
    if (!matched.empty() && std::isupper(static_cast<unsigned char>(matched[0])) && !replacement.empty()) {
        replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
    }
    return replacement;
}

struct Contraction {
    std::regex pattern;
    std::string replacement;
    bool whole_word;  // replacement substitutes the whole match (vs. a suffix)
};

const std::vector<Contraction>& contraction_table() {
    static const auto flags = std::regex::ECMAScript | std::regex::icase;
    static const std::vector<Contraction> table = {
        {std::regex(R"(\bwon't\b)", flags), "will not", true},
        {std::regex(R"(\bcan't\b)", flags), "cannot", true},
        {std::regex(R"(\bshan't\b)", flags), "shall not", true},
        {std::regex(R"(\bain't\b)", flags), "is not", true},
        {std::regex(R"(\bit's\b)", flags), "it is", true},
        {std::regex(R"(\bthat's\b)", flags), "that is", true},
        {std::regex(R"(n't\b)", flags), " not", false},
        {std::regex(R"('re\b)", flags), " are", false},
        {std::regex(R"('ve\b)", flags), " have", false},
        {std::regex(R"('ll\b)", flags), " will", false},
        {std::regex(R"('d\b)", flags), " would", false},
        {std::regex(R"('m\b)", flags), " am", false},
    };
    return table;
}

std::string expand_contractions(std::string s) {
    for (const auto& c : contraction_table()) {
        std::string out;
        auto last = s.cbegin();
        for (auto it = std::sregex_iterator(s.begin(), s.end(), c.pattern); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            out.append(last, m[0].first);
            out += c.whole_word ? match_case(m.str(), c.replacement) : c.replacement;
            last = m[0].second;
        }
        out.append(last, s.cend());
        s = std::move(out);
    }
    return s;
}

std::string that_decade(const std::smatch&) { return "that decade"; }

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::string preprocess(const std::string& text) {
    static const std::regex right_quote("\xE2\x80\x99");
    static const std::regex decade_four(R"((?:\bthe\s+)?'?\b(?:19|20)\d0'?s\b)", std::regex::icase);
    static const std::regex decade_two(R"(\bthe\s+'?\d0'?s\b|'\d0s\b)", std::regex::icase);
    static const std::regex year(R"(\b(?:19|20)\d\d\b)");
    static const std::regex number(R"(\d+)");

    std::string s = replace_all(text, right_quote, "'");
    s = replace_all(s, decade_four, &that_decade);
    s = replace_all(s, decade_two, &that_decade);
    s = replace_all(s, year, "that year");
    s = replace_all(s, number, "0");
    return expand_contractions(std::move(s));
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (is_word_byte(c)) {
            std::size_t j = i;
            while (j < n) {
                const auto cj = static_cast<unsigned char>(text[j]);
                if (is_word_byte(cj)) {
                    ++j;
                } else if (cj == '\'' && j + 1 < n && std::isalpha(static_cast<unsigned char>(text[j + 1]))) {
                    ++j;
                } else {
                    break;
                }
            }
            Token t;
            t.original = text.substr(i, j - i);
            t.text = t.original;
            for (char& ch : t.text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            tokens.push_back(std::move(t));
            i = j;
        } else {
            Token t;
            t.original = std::string(1, text[i]);
            t.text = t.original;
            t.punct = true;
            tokens.push_back(std::move(t));
            ++i;
        }
    }
    return tokens;
}

}  // namespace memfuse
