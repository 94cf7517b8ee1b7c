#include "weakbench/answer.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>

#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"

namespace weakbench::answer {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

size_t rfind_ci(std::string_view haystack, std::string_view needle) {
    return lower(haystack).rfind(lower(needle));
}

/// Content of the brace group starting at `open` (index of '{'), honoring
/// nesting. Returns npos-pair when unbalanced.
std::pair<size_t, size_t> brace_group(std::string_view s, size_t open) {
    int depth = 0;
    for (size_t i = open; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        else if (s[i] == '}') {
            if (--depth == 0) return {open + 1, i};
        }
    }
    return {std::string_view::npos, std::string_view::npos};
}

std::optional<std::string> last_boxed(std::string_view raw) {
    size_t pos = raw.rfind("\\boxed");
    while (pos != std::string_view::npos) {
        size_t open = raw.find('{', pos);
        if (open != std::string_view::npos) {
            auto [b, e] = brace_group(raw, open);
            if (b != std::string_view::npos) {
                std::string inner = trim(raw.substr(b, e - b));
                if (!inner.empty()) return inner;
            }
        }
        if (pos == 0) break;
        pos = raw.rfind("\\boxed", pos - 1);
    }
    return std::nullopt;
}

std::optional<std::string> last_sentinel(std::string_view raw) {
    size_t best = std::string_view::npos;
    size_t after = 0;
    for (std::string_view sentinel : {std::string_view("final answer:"), std::string_view("the answer is")}) {
        size_t pos = rfind_ci(raw, sentinel);
        if (pos != std::string_view::npos && (best == std::string_view::npos || pos > best)) {
            best = pos;
            after = pos + sentinel.size();
        }
    }
    if (best == std::string_view::npos) return std::nullopt;
    size_t eol = raw.find('\n', after);
    std::string tail = trim(raw.substr(after, eol == std::string_view::npos ? raw.size() - after
                                                                            : eol - after));
    while (!tail.empty() && (tail.back() == '.' || tail.back() == ','))
        tail.pop_back();
    tail = trim(tail);
    if (tail.empty()) return std::nullopt;
    return tail;
}

/// Removes LaTeX sizing/formatting tokens that never change the value.
std::string strip_markup(std::string_view raw) {
    static const std::string_view tokens[] = {
        "\\left", "\\right", "\\bigg", "\\Bigg", "\\big", "\\Big",
        "\\displaystyle", "\\,", "\\;", "\\!", "\\ ",
    };
    std::string s(raw);
    for (std::string_view tok : tokens) {
        size_t pos = 0;
        while ((pos = s.find(tok, pos)) != std::string::npos) s.erase(pos, tok.size());
    }
    std::erase(s, '$');
    std::string out = trim(s);
    // Strip fully enclosing brace layers: "{2}" -> "2".
    while (out.size() >= 2 && out.front() == '{' && out.back() == '}') {
        auto [b, e] = brace_group(out, 0);
        if (b != 1 || e != out.size() - 1) break;
        out = trim(std::string_view(out).substr(1, out.size() - 2));
    }
    return out;
}

bool parse_int(std::string_view s, int64_t& out) {
    std::string t(trim(s));
    if (t.empty()) return false;
    // Tolerate thousands separators: 1,234,567.
    if (t.find(',') != std::string::npos) {
        std::string digitsonly;
        size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
        digitsonly = t.substr(0, i);
        size_t group = 0;
        bool first = true;
        std::string cur;
        for (; i <= t.size(); ++i) {
            if (i == t.size() || t[i] == ',') {
                if (cur.empty()) return false;
                if (!first && cur.size() != 3) return false;
                if (first && cur.size() > 3) return false;
                first = false;
                digitsonly += cur;
                cur.clear();
                ++group;
                continue;
            }
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
            cur.push_back(t[i]);
        }
        if (group < 2) return false;
        t = digitsonly;
    }
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

int64_t igcd(int64_t a, int64_t b) {
    return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

bool make_rational(int64_t num, int64_t den, CanonicalAnswer& out) {
    if (den == 0) return false;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    int64_t g = igcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    out.num = num;
    out.den = den;
    return true;
}

bool parse_fraction(std::string_view s, CanonicalAnswer& out) {
    std::string t(trim(s));
    // \frac{a}{b}, \dfrac{a}{b}, \tfrac{a}{b}
    for (std::string_view cmd : {std::string_view("\\frac"), std::string_view("\\dfrac"),
                                 std::string_view("\\tfrac")}) {
        if (t.size() > cmd.size() && std::string_view(t).substr(0, cmd.size()) == cmd) {
            size_t open1 = t.find('{', cmd.size());
            if (open1 == std::string::npos) continue;
            auto [b1, e1] = brace_group(t, open1);
            if (b1 == std::string::npos) continue;
            size_t open2 = t.find('{', e1 + 1);
            if (open2 == std::string::npos) continue;
            auto [b2, e2] = brace_group(t, open2);
            if (b2 == std::string::npos || trim(t.substr(e2 + 1)) != "") continue;
            int64_t a, b;
            if (parse_int(t.substr(b1, e1 - b1), a) && parse_int(t.substr(b2, e2 - b2), b))
                return make_rational(a, b, out);
            return false;
        }
    }
    // plain a/b
    size_t slash = t.find('/');
    if (slash != std::string::npos && t.rfind('/') == slash) {
        int64_t a, b;
        if (parse_int(t.substr(0, slash), a) && parse_int(t.substr(slash + 1), b))
            return make_rational(a, b, out);
    }
    return false;
}

bool parse_decimal(std::string_view s, CanonicalAnswer& out) {
    std::string t(trim(s));
    size_t dot = t.find('.');
    if (dot == std::string::npos || t.rfind('.') != dot) return false;
    std::string intpart = t.substr(0, dot);
    std::string fracpart = t.substr(dot + 1);
    if (fracpart.empty() ||
        !std::all_of(fracpart.begin(), fracpart.end(),
                     [](unsigned char c) { return std::isdigit(c); }))
        return false;
    bool neg = false;
    if (!intpart.empty() && (intpart[0] == '+' || intpart[0] == '-')) {
        neg = intpart[0] == '-';
        intpart.erase(0, 1);
    }
    if (intpart.empty()) intpart = "0";
    int64_t whole;
    if (!parse_int(intpart, whole)) return false;
    // value = whole + frac / 10^len, sign applied afterwards
    int64_t den = 1;
    for (size_t i = 0; i < fracpart.size(); ++i) {
        if (den > INT64_MAX / 10) return false;
        den *= 10;
    }
    int64_t frac;
    if (!parse_int(fracpart, frac)) return false;
    if (whole > (INT64_MAX - frac) / den) return false;
    int64_t num = whole * den + frac;
    if (neg) num = -num;
    CanonicalAnswer value;
    if (!make_rational(num, den, value)) return false;
    out.num = value.num;
    out.den = value.den;
    out.digits = (neg ? "-" : "") + intpart + "." + fracpart;
    return true;
}

}  // namespace

std::string_view to_string(GradeLabel label) {
    switch (label) {
        case GradeLabel::correct: return "correct";
        case GradeLabel::wrong: return "wrong";
        case GradeLabel::ungradable: return "ungradable";
    }
    return "ungradable";
}

GradeLabel grade_label_from_string(std::string_view s) {
    if (s == "correct") return GradeLabel::correct;
    if (s == "wrong") return GradeLabel::wrong;
    if (s == "ungradable") return GradeLabel::ungradable;
    throw ParseError("unknown grade label: " + std::string(s));
}

std::string CanonicalAnswer::to_string() const {
    switch (kind) {
        case AnswerKind::integer: return std::to_string(int_value);
        case AnswerKind::rational:
            return std::to_string(num) + "/" + std::to_string(den);
        case AnswerKind::decimal: return digits;
        case AnswerKind::symbolic_text: return text;
    }
    return text;
}

std::optional<std::string> try_extract_final_answer(std::string_view raw) {
    if (auto boxed = last_boxed(raw)) return boxed;
    return last_sentinel(raw);
}

std::string extract_final_answer(std::string_view raw) {
    if (auto found = try_extract_final_answer(raw)) return *found;
    throw ParseError("no final answer found in model output");
}

CanonicalAnswer normalize(std::string_view raw) {
    CanonicalAnswer out;
    std::string s = strip_markup(raw);

    int64_t iv;
    if (parse_int(s, iv)) {
        out.kind = AnswerKind::integer;
        out.int_value = iv;
        out.num = iv;
        out.den = 1;
        return out;
    }
    if (parse_fraction(s, out)) {
        if (out.den == 1) {
            out.kind = AnswerKind::integer;
            out.int_value = out.num;
        } else {
            out.kind = AnswerKind::rational;
        }
        return out;
    }
    if (parse_decimal(s, out)) {
        out.kind = AnswerKind::decimal;
        return out;
    }
    out.kind = AnswerKind::symbolic_text;
    out.text = normalize_whitespace(s);
    return out;
}

bool equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b) {
    const bool a_num = a.kind != AnswerKind::symbolic_text;
    const bool b_num = b.kind != AnswerKind::symbolic_text;
    if (a_num != b_num) return false;
    if (!a_num) return a.text == b.text;
    using i128 = __int128;
    return i128(a.num) * b.den == i128(b.num) * a.den;
}

GradeLabel grade_attempt(std::string_view raw, std::string_view reference) {
    if (reference.empty()) throw ProtocolError("grade_attempt: empty reference answer");
    auto extracted = try_extract_final_answer(raw);
    if (!extracted) return GradeLabel::ungradable;
    return equivalent(normalize(*extracted), normalize(reference)) ? GradeLabel::correct
                                                                   : GradeLabel::wrong;
}

}  // namespace weakbench::answer
