#include "peirce/text.hpp"

#include <algorithm>
#include <cctype>

#include <peirce/assets_gen.hpp>

namespace peirce::text {

std::vector<std::string> tokenize(const std::string& s, size_t min_len) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            if (cur.size() >= min_len) out.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= min_len) out.push_back(cur);
    return out;
}

std::vector<std::string> split_sentences(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        size_t b = cur.find_first_not_of(" \t\r\n");
        size_t e = cur.find_last_not_of(" \t\r\n");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (size_t i = 0; i < s.size(); ++i) {
        cur.push_back(s[i]);
        if (s[i] == '.' || s[i] == '!' || s[i] == '?') {
            bool boundary = (i + 1 == s.size()) || std::isspace(static_cast<unsigned char>(s[i + 1]));
            if (boundary) flush();
        }
    }
    flush();
    return out;
}

namespace {

// ---- Porter stemmer ----
// Straight implementation of the 1980 algorithm. Letters are classified per
// word: y counts as a vowel only when preceded by a consonant.

bool is_consonant(const std::string& w, size_t i) {
    char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
    if (c == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
    return true;
}

// m in [C](VC)^m[V]
int measure(const std::string& w) {
    int m = 0;
    size_t i = 0, n = w.size();
    while (i < n && is_consonant(w, i)) ++i;
    while (i < n) {
        while (i < n && !is_consonant(w, i)) ++i;
        if (i == n) break;
        ++m;
        while (i < n && is_consonant(w, i)) ++i;
    }
    return m;
}

bool contains_vowel(const std::string& w) {
    for (size_t i = 0; i < w.size(); ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

bool ends_double_consonant(const std::string& w) {
    size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: cvc where the final consonant is not w, x or y
bool ends_cvc(const std::string& w) {
    size_t n = w.size();
    if (n < 3) return false;
    if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, const std::string& suf) {
    return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

struct Rule {
    const char* suffix;
    const char* replacement;
    int min_measure;  // condition m > min_measure on the stem
};

// Longest matching suffix wins; its condition decides, no further rules tried.
bool apply_rules(std::string& w, const std::vector<Rule>& rules) {
    for (const auto& r : rules) {
        if (!ends_with(w, r.suffix)) continue;
        std::string stem = w.substr(0, w.size() - std::string(r.suffix).size());
        if (measure(stem) > r.min_measure) w = stem + r.replacement;
        return true;
    }
    return false;
}

void step_1a(std::string& w) {
    if (ends_with(w, "sses")) w.erase(w.size() - 2);
    else if (ends_with(w, "ies")) w.erase(w.size() - 2);
    else if (ends_with(w, "ss")) {}
    else if (ends_with(w, "s")) w.pop_back();
}

void step_1b(std::string& w) {
    if (ends_with(w, "eed")) {
        std::string stem = w.substr(0, w.size() - 3);
        if (measure(stem) > 0) w = stem + "ee";
        return;
    }
    bool fired = false;
    if (ends_with(w, "ed")) {
        std::string stem = w.substr(0, w.size() - 2);
        if (contains_vowel(stem)) { w = stem; fired = true; }
    } else if (ends_with(w, "ing")) {
        std::string stem = w.substr(0, w.size() - 3);
        if (contains_vowel(stem)) { w = stem; fired = true; }
    }
    if (!fired) return;
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w.push_back('e');
    } else if (ends_double_consonant(w)) {
        char c = w.back();
        if (c != 'l' && c != 's' && c != 'z') w.pop_back();
    } else if (measure(w) == 1 && ends_cvc(w)) {
        w.push_back('e');
    }
}

void step_1c(std::string& w) {
    if (ends_with(w, "y") && contains_vowel(w.substr(0, w.size() - 1))) w.back() = 'i';
}

void step_2(std::string& w) {
    static const std::vector<Rule> rules = {
        {"ational", "ate", 0}, {"tional", "tion", 0}, {"enci", "ence", 0},
        {"anci", "ance", 0},   {"izer", "ize", 0},    {"abli", "able", 0},
        {"alli", "al", 0},     {"entli", "ent", 0},   {"eli", "e", 0},
        {"ousli", "ous", 0},   {"ization", "ize", 0}, {"ation", "ate", 0},
        {"ator", "ate", 0},    {"alism", "al", 0},    {"iveness", "ive", 0},
        {"fulness", "ful", 0}, {"ousness", "ous", 0}, {"aliti", "al", 0},
        {"iviti", "ive", 0},   {"biliti", "ble", 0},
    };
    apply_rules(w, rules);
}

void step_3(std::string& w) {
    static const std::vector<Rule> rules = {
        {"icate", "ic", 0}, {"ative", "", 0}, {"alize", "al", 0}, {"iciti", "ic", 0},
        {"ical", "ic", 0},  {"ful", "", 0},   {"ness", "", 0},
    };
    apply_rules(w, rules);
}

void step_4(std::string& w) {
    static const char* suffixes[] = {"ement", "ance", "ence", "able", "ible", "ment",
                                     "ant",   "ent",  "ism",  "ate",  "iti",  "ous",
                                     "ive",   "ize",  "ion",  "al",   "er",   "ic",
                                     "ou"};
    for (const char* suf : suffixes) {
        if (!ends_with(w, suf)) continue;
        std::string stem = w.substr(0, w.size() - std::string(suf).size());
        bool ok = measure(stem) > 1;
        if (ok && std::string(suf) == "ion")
            ok = !stem.empty() && (stem.back() == 's' || stem.back() == 't');
        if (ok) w = stem;
        return;
    }
}

void step_5a(std::string& w) {
    if (!ends_with(w, "e")) return;
    std::string stem = w.substr(0, w.size() - 1);
    int m = measure(stem);
    if (m > 1 || (m == 1 && !ends_cvc(stem))) w = stem;
}

void step_5b(std::string& w) {
    if (measure(w) > 1 && ends_double_consonant(w) && w.back() == 'l') w.pop_back();
}

}  // namespace

std::string porter_stem(const std::string& word) {
    if (word.size() <= 2) return word;
    std::string w = word;
    step_1a(w);
    step_1b(w);
    step_1c(w);
    step_2(w);
    step_3(w);
    step_4(w);
    step_5a(w);
    step_5b(w);
    return w;
}

const std::set<std::string>& default_stopwords() {
    // Parsed once from the embedded lexicon asset (one word per line).
    static const std::set<std::string> words = [] {
        std::set<std::string> out;
        std::string cur;
        for (char c : assets::lexicon_stopwords) {
            if (c == '\n') {
                if (!cur.empty() && cur[0] != '#') out.insert(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        if (!cur.empty() && cur[0] != '#') out.insert(cur);
        return out;
    }();
    return words;
}

std::set<std::string> concept_set(const std::string& s, const std::set<std::string>& stopwords) {
    std::set<std::string> out;
    for (const auto& tok : tokenize(s, 1)) {
        if (stopwords.count(tok)) continue;
        out.insert(porter_stem(tok));
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace peirce::text
