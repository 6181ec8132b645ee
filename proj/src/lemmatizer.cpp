#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "memfuse/text_affect.hpp"

namespace memfuse {

namespace {

const std::unordered_map<std::string, std::string>& irregulars() {
    static const std::unordered_map<std::string, std::string> table = {
        {"am", "be"}, {"are", "be"}, {"is", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"},
        {"being", "be"}, {"has", "have"}, {"had", "have"}, {"does", "do"}, {"did", "do"},
        {"done", "do"}, {"goes", "go"}, {"went", "go"}, {"gone", "go"}, {"ran", "run"},
        {"felt", "feel"}, {"children", "child"}, {"men", "man"}, {"women", "woman"},
        {"people", "person"}, {"feet", "foot"}, {"teeth", "tooth"}, {"mice", "mouse"},
        {"made", "make"}, {"saw", "see"}, {"seen", "see"}, {"came", "come"}, {"got", "get"},
        {"gotten", "get"}, {"took", "take"}, {"taken", "take"}, {"gave", "give"}, {"given", "give"},
        {"told", "tell"}, {"said", "say"}, {"thought", "think"}, {"brought", "bring"},
        {"bought", "buy"}, {"knew", "know"}, {"known", "know"}, {"lost", "lose"}, {"won", "win"},
        {"sang", "sing"}, {"sung", "sing"}, {"fell", "fall"}, {"fallen", "fall"}, {"met", "meet"},
        {"wore", "wear"}, {"worn", "wear"}, {"drove", "drive"}, {"driven", "drive"}, {"ate", "eat"},
        {"eaten", "eat"}, {"slept", "sleep"}, {"kept", "keep"}, {"left", "leave"}, {"heard", "hear"},
        {"held", "hold"}, {"found", "find"}, {"began", "begin"}, {"begun", "begin"}, {"wrote", "write"},
        {"written", "write"}, {"spoke", "speak"}, {"spoken", "speak"}, {"broke", "break"},
        {"broken", "break"}, {"chose", "choose"}, {"chosen", "choose"}, {"flew", "fly"},
        {"grew", "grow"}, {"grown", "grow"}, {"sat", "sit"}, {"stood", "stand"}, {"taught", "teach"},
        {"caught", "catch"}, {"fought", "fight"}, {"sent", "send"}, {"spent", "spend"},
        {"built", "build"}, {"paid", "pay"}, {"laid", "lay"}, {"lay", "lie"}, {"led", "lead"},
        {"understood", "understand"}, {"swam", "swim"}, {"threw", "throw"}, {"hid", "hide"},
        {"hidden", "hide"}, {"woke", "wake"}, {"died", "die"}, {"dies", "die"}, {"dying", "die"},
        {"lied", "lie"}, {"lies", "lie"}, {"lying", "lie"}, {"tied", "tie"}, {"ties", "tie"},
        {"using", "use"}, {"used", "use"}, {"better", "good"}, {"best", "good"}, {"worse", "bad"}, {"worst", "bad"},
    };
    return table;
}

// -ing / -s forms that are lemmas in their own right.
const std::unordered_set<std::string>& protected_words() {
    static const std::unordered_set<std::string> words = {
        "morning", "evening", "wedding", "ceiling", "nothing", "something", "anything", "everything",
        "during", "spring", "string", "thing", "sibling", "darling", "ring", "king", "sing", "bring",
        "wing", "swing", "sting", "ping", "this", "his", "its", "was", "has", "yes", "us", "bus",
        "gas", "plus", "always", "perhaps", "news", "christmas", "series", "species", "towards",
        "lens", "bias", "chaos", "famous", "various", "during", "nervous", "anxious", "ceiling",
        "need", "speed", "seed", "feed", "bed", "red", "shed", "wed", "hundred", "sacred", "naked",
        "wicked", "beloved", "kindred", "hatred",
    };
    return words;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Vowel test where 'y' counts as a vowel after a consonant.
bool is_vowel_at(std::string_view w, std::size_t i) {
    if (is_vowel(w[i])) return true;
    return w[i] == 'y' && i > 0 && !is_vowel(w[i - 1]);
}

bool has_vowel(std::string_view w) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (is_vowel_at(w, i)) return true;
    }
    return false;
}

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

// Number of vowel-consonant sequences (Porter's "measure").
int measure(std::string_view w) {
    int m = 0;
    bool prev_vowel = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const bool v = is_vowel_at(w, i);
        if (prev_vowel && !v) ++m;
        prev_vowel = v;
    }
    return m;
}

bool ends_cvc(std::string_view w) {
    if (w.size() < 3) return false;
    const std::size_t n = w.size();
    const char last = w[n - 1];
    return !is_vowel_at(w, n - 3) && is_vowel_at(w, n - 2) && !is_vowel_at(w, n - 1) && last != 'w' &&
           last != 'x' && last != 'y';
}

// Restores the stem after -ing/-ed removal.
std::string repair_stem(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z') {
        stem.pop_back();
        return stem;
    }
    if (stem == "creat") return "create";
    if (ends_with(stem, "eat") || ends_with(stem, "oat")) return stem;
    static const std::string_view add_e_suffixes[] = {"at", "bl", "iz", "dl", "tl", "kl", "pl", "gl", "fl", "c",
                                                       "v",  "u",  "z",  "rg", "dg", "lg", "rs", "ls", "ns", "is",
                                                       "as"};
    for (auto suffix : add_e_suffixes) {
        if (ends_with(stem, suffix)) return stem + "e";
    }
    if (ends_cvc(stem) && measure(stem) == 1) return stem + "e";
    return stem;
}

}  // namespace

std::string lemmatize(const std::string& token) {
    if (token.size() < 3) return token;
    if (auto it = irregulars().find(token); it != irregulars().end()) return it->second;
    if (ends_with(token, "'s")) return lemmatize(token.substr(0, token.size() - 2));
    if (ends_with(token, "s'")) return token.substr(0, token.size() - 1);
    if (protected_words().count(token)) return token;

    std::string_view w = token;
    if (ends_with(w, "ies") && w.size() > 4) return std::string(w.substr(0, w.size() - 3)) + "y";
    if (ends_with(w, "sses")) return std::string(w.substr(0, w.size() - 2));
    if (ends_with(w, "es") && w.size() > 4) {
        auto stem = w.substr(0, w.size() - 2);
        if (ends_with(stem, "sh") || ends_with(stem, "ch") || ends_with(stem, "x") || ends_with(stem, "z") ||
            ends_with(stem, "ss")) {
            return std::string(stem);
        }
    }
    if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is") && w.size() > 3) {
        return std::string(w.substr(0, w.size() - 1));
    }
    if (ends_with(w, "ing") && w.size() > 4) {
        auto stem = w.substr(0, w.size() - 3);
        if (has_vowel(stem) && stem.size() >= 2) return repair_stem(std::string(stem));
        return token;
    }
    if (ends_with(w, "ied") && w.size() > 4) return std::string(w.substr(0, w.size() - 3)) + "y";
    if (ends_with(w, "eed")) return token;
    if (ends_with(w, "ed") && w.size() > 4) {
        auto stem = w.substr(0, w.size() - 2);
        if (has_vowel(stem)) return repair_stem(std::string(stem));
    }
    return token;
}

}  // namespace memfuse
