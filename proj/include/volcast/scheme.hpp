#pragma once

#include <string_view>

namespace volcast {

enum class Scheme { Rolling, Expanding };
enum class Loss { Squared, Absolute };

std::string_view to_string(Scheme s) noexcept;
std::string_view to_string(Loss l) noexcept;
Scheme parse_scheme(std::string_view text);
Loss parse_loss(std::string_view text);

}  // namespace volcast
