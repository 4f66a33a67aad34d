#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace equiflow {

/// Version tag embedded in every JSON artifact.
inline constexpr std::string_view kFormatVersion = "equiflow/1";

/// Significant digits used for every serialized report number.
inline constexpr int kReportDigits = 12;

/// `value` rounded to `digits` significant decimal digits.
double round_significant(double value, int digits = kReportDigits);

/// "%.12g"-style rendering; non-finite values become "inf", "-inf", "nan".
std::string format_number(double value, int digits = kReportDigits);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace equiflow
