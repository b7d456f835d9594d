#pragma once

#include <string_view>

// Cosmetic constants shared by every figure.
namespace premium::style {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 480.0;
inline constexpr double kMarginLeft = 80.0;
inline constexpr double kMarginRight = 24.0;
inline constexpr double kMarginTop = 44.0;
inline constexpr double kMarginBottom = 56.0;

inline constexpr std::string_view kFont = "Helvetica, Arial, sans-serif";
inline constexpr double kTitleSize = 15.0;
inline constexpr double kLabelSize = 12.0;
inline constexpr double kTickSize = 10.0;

inline constexpr std::string_view kBackground = "#ffffff";
inline constexpr std::string_view kAxis = "#333333";
inline constexpr std::string_view kGrid = "#e5e5e5";
inline constexpr std::string_view kPrimary = "#1f77b4";
inline constexpr std::string_view kSecondary = "#d62728";
inline constexpr std::string_view kReference = "#7f7f7f";
inline constexpr std::string_view kCurve = "#9ecae1";
inline constexpr std::string_view kBar = "#1f77b4";
inline constexpr std::string_view kBox = "#c6dbef";

// Beeswarm gradient, low feature value to high.
inline constexpr std::string_view kLowColor = "#008bfb";
inline constexpr std::string_view kHighColor = "#ff0052";

// Heatmap: -1, 0, +1.
inline constexpr std::string_view kNegative = "#3b4cc0";
inline constexpr std::string_view kNeutral = "#f7f7f7";
inline constexpr std::string_view kPositive = "#b40426";

inline constexpr double kPointRadius = 2.5;
inline constexpr double kSwarmRadius = 2.0;

}  // namespace premium::style
