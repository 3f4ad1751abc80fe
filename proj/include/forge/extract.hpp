#pragma once

#include "forge/corpus.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace forge::extract {

enum class Anomaly { none, bulk_preamble, no_tags };

struct ExtractionResult {
    std::vector<std::string> examples;
    Anomaly anomaly = Anomaly::none;
};

enum class Equality { equal, not_equal, undecided };

// Inner text of each balanced <example>...</example> pair, in order.
// Maximal non-overlapping pairs are taken left to right; nesting is not
// supported. A completion that opens with "Here are 5 examples" or
// "Here are five examples" (after leading whitespace) is flagged
// bulk_preamble; one without any tags is flagged no_tags. Never throws.
ExtractionResult extract_examples(std::string_view completion);

// Case-insensitive containment scan; "not equal" wins over "equal",
// neither present -> undecided. Never throws.
Equality parse_equality(std::string_view completion);

// Tolerant status/rating/reason tag extraction. Blank or tagless
// completions, unparseable ratings and ratings outside [1,7] all come back
// undecided (rating absent, reason preserved when present). Never throws.
corpus::JudgeVerdict parse_verdict(std::string_view completion);

std::string_view to_string(Anomaly a);
std::string_view to_string(Equality e);

}  // namespace forge::extract
