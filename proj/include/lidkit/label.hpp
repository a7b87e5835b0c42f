#pragma once

#include <string>
#include <string_view>

namespace lidkit {

// Language code, ISO 639-3 by convention with an optional script suffix
// ("srp_Cyrl"). The toolkit treats it as opaque.
using Label = std::string;

// Sentinel emitted when the decision rule refuses to pick a language.
inline constexpr std::string_view kUndetermined = "und";

// FastText supervised-format prefix.
inline constexpr std::string_view kLabelPrefix = "__label__";

}  // namespace lidkit
