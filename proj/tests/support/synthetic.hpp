#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace premium::testing {

// CSV text with the insurance header and plausible, seeded rows. The target
// follows a fixed additive-with-interactions rule plus noise. Test data only.
std::string synthetic_insurance_csv(std::size_t rows, std::uint64_t seed);

void write_synthetic_csv(const std::filesystem::path& path, std::size_t rows,
                         std::uint64_t seed);

// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_temp_dir(const std::string& name);

}  // namespace premium::testing
