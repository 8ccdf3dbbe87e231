#pragma once

#include <string_view>

namespace patenthan {

// Technological value class. The integer value is the logit/column index used
// by the prediction head: [t_PBT, t_MT].
enum class ValueClass : int {
  kPBT = 0,  // potential breakthrough technology
  kMT = 1,   // marginal technology
};

inline constexpr int class_index(ValueClass c) { return static_cast<int>(c); }

inline constexpr std::string_view to_string(ValueClass c) {
  return c == ValueClass::kPBT ? "PBT" : "MT";
}

ValueClass parse_value_class(std::string_view text);

}  // namespace patenthan
