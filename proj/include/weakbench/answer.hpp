#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace weakbench::answer {

enum class GradeLabel { correct, wrong, ungradable };

std::string_view to_string(GradeLabel label);
GradeLabel grade_label_from_string(std::string_view s);

enum class AnswerKind { integer, rational, decimal, symbolic_text };

/// Normalized final answer. Rationals are kept in lowest terms with a
/// positive denominator; decimals keep their digit string but compare by
/// exact value; everything non-numeric is whitespace- and brace-normalized
/// text compared by string equality.
struct CanonicalAnswer {
    AnswerKind kind = AnswerKind::symbolic_text;
    int64_t int_value = 0;          // integer
    int64_t num = 0, den = 1;       // rational, lowest terms, den > 0
    std::string digits;             // decimal, as written (sign + digits + optional point)
    std::string text;               // symbolic_text

    std::string to_string() const;
};

/// Last boxed expression if any, else the text after the last
/// "Final answer:" / "The answer is" sentinel. Throws ParseError when
/// neither yields a non-empty answer.
std::string extract_final_answer(std::string_view raw);

/// Non-throwing variant; empty optional when no answer is found.
std::optional<std::string> try_extract_final_answer(std::string_view raw);

/// Total function: strips formatting markup and classifies the answer as
/// integer, a/b or \frac{a}{b} rational, finite decimal, or symbolic text.
CanonicalAnswer normalize(std::string_view raw);

/// Exact-value equality for numeric kinds (decimals promote to rationals);
/// normalized string equality for symbolic text; numeric vs symbolic is false.
bool equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b);

/// correct iff extraction succeeds and the normalized forms are equivalent;
/// ungradable iff extraction fails; wrong otherwise.
GradeLabel grade_attempt(std::string_view raw, std::string_view reference);

}  // namespace weakbench::answer
