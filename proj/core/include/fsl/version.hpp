#pragma once

namespace fsl {

inline constexpr const char* version = "0.1.0";

} // namespace fsl
