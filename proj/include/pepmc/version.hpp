#pragma once

namespace pepmc {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kReportFormatVersion = 1;

}  // namespace pepmc
