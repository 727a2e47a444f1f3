#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace neardup {

// Porter stemmer (M.F. Porter, 1980), following the canonical reference
// implementation rule for rule. Operates on lowercase words; words of one
// or two characters are returned unchanged. Indices are signed because a
// suffix may cover the whole word, leaving an empty stem (j == -1).
namespace porter_detail {

class Stemmer {
public:
    explicit Stemmer(std::string word)
        : b_(std::move(word)), k_(static_cast<std::ptrdiff_t>(b_.size()) - 1) {}

    std::string run() {
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        b_.resize(static_cast<std::size_t>(k_ + 1));
        return std::move(b_);
    }

private:
    std::string b_;
    std::ptrdiff_t k_;      // index of last letter of the current stem
    std::ptrdiff_t j_ = 0;  // index of last letter before a matched suffix

    bool cons(std::ptrdiff_t i) const {
        switch (b_[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    char at(std::ptrdiff_t i) const { return b_[static_cast<std::size_t>(i)]; }

    // Number of consonant-vowel sequences [C](VC)^m[V] in b_[0..j_].
    int m() const {
        int n = 0;
        std::ptrdiff_t i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (std::ptrdiff_t i = 0; i <= j_; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }

    bool doublec(std::ptrdiff_t j) const {
        if (j < 1) return false;
        if (at(j) != at(j - 1)) return false;
        return cons(j);
    }

    // consonant-vowel-consonant ending at i with the final consonant not
    // w, x or y; signals that a stripped word wants its e back (fil -> file).
    bool cvc(std::ptrdiff_t i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = at(i);
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        const auto len = static_cast<std::ptrdiff_t>(s.size());
        if (len > k_ + 1) return false;
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ + 1 - len),
                                        s.size()) != s) {
            return false;
        }
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1),
                   b_.size() - static_cast<std::size_t>(j_ + 1), s);
        k_ = j_ + static_cast<std::ptrdiff_t>(s.size());
    }

    void replace_if_m(std::string_view s) {
        if (m() > 0) set_to(s);
    }

    void step1ab() {
        if (at(k_) == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                set_to("i");
            } else if (at(k_ - 1) != 's') {
                --k_;
            }
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) {
                set_to("ate");
            } else if (ends("bl")) {
                set_to("ble");
            } else if (ends("iz")) {
                set_to("ize");
            } else if (doublec(k_)) {
                --k_;
                const char ch = at(k_);
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    void step2() {
        struct Rule { std::string_view suffix, replacement; };
        static constexpr Rule rules[] = {
            {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
            {"anci", "ance"},   {"izer", "ize"},    {"bli", "ble"},
            {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
            {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
            {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
            {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
            {"iviti", "ive"},   {"biliti", "ble"},  {"logi", "log"},
        };
        for (const auto& r : rules) {
            if (ends(r.suffix)) {
                replace_if_m(r.replacement);
                return;
            }
        }
    }

    void step3() {
        struct Rule { std::string_view suffix, replacement; };
        static constexpr Rule rules[] = {
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
            {"ical", "ic"},  {"ful", ""},   {"ness", ""},
        };
        for (const auto& r : rules) {
            if (ends(r.suffix)) {
                replace_if_m(r.replacement);
                return;
            }
        }
    }

    void step4() {
        static constexpr std::string_view suffixes[] = {
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
            "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        };
        for (const auto& s : suffixes) {
            if (ends(s)) {
                if (s == "ion" && !(j_ >= 0 && (at(j_) == 's' || at(j_) == 't'))) {
                    return;
                }
                if (m() > 1) k_ = j_;
                return;
            }
        }
    }

    void step5() {
        j_ = k_;
        if (at(k_) == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (at(k_) == 'l' && doublec(k_) && m() > 1) --k_;
    }
};

} // namespace porter_detail

/// Porter-stem a lowercase word.
inline std::string porter_stem(std::string word) {
    if (word.size() <= 2) return word;
    return porter_detail::Stemmer(std::move(word)).run();
}

} // namespace neardup
