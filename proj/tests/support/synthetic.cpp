#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "premium/io.hpp"
#include "premium/rng.hpp"

namespace premium::testing {

namespace {

double normal(RandomStream& rng) {
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int bernoulli(RandomStream& rng, double p) { return rng.uniform01() < p ? 1 : 0; }

}  // namespace

std::string synthetic_insurance_csv(std::size_t rows, std::uint64_t seed) {
  RandomStream rng(seed);
  std::ostringstream out;
  out << "Age,Diabetes,BloodPressureProblems,AnyTransplants,AnyChronicDiseases,"
         "Height,Weight,KnownAllergies,HistoryOfCancerInFamily,"
         "NumberOfMajorSurgeries,PremiumPrice\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const int age = 18 + static_cast<int>(rng.uniform_index(49));
    const int diabetes = bernoulli(rng, 0.42);
    const int bp = bernoulli(rng, 0.47);
    const int transplant = bernoulli(rng, 0.06);
    const int chronic = bernoulli(rng, 0.18);
    const int height = std::clamp(static_cast<int>(std::lround(168 + 10 * normal(rng))), 145, 188);
    const int weight = std::clamp(static_cast<int>(std::lround(77 + 14 * normal(rng))), 51, 132);
    const int allergy = bernoulli(rng, 0.22);
    const int cancer = bernoulli(rng, 0.12);
    const double s = rng.uniform01();
    const int surgeries = s < 0.45 ? 0 : s < 0.87 ? 1 : s < 0.97 ? 2 : 3;

    const double bmi = weight / std::pow(height / 100.0, 2);
    double premium = 15000.0;
    premium += age > 30 ? 6000.0 + 120.0 * (age - 30) : 1000.0;
    premium += 7000.0 * transplant + 3000.0 * chronic + 2000.0 * cancer;
    premium += 600.0 * bp + 150.0 * diabetes * (age > 50);
    premium += 250.0 * std::max(0.0, bmi - 27.0);
    premium -= surgeries >= 2 ? 1500.0 : 0.0;
    premium += 1200.0 * normal(rng);
    premium = std::clamp(std::round(premium / 1000.0) * 1000.0, 15000.0, 40000.0);

    out << age << ',' << diabetes << ',' << bp << ',' << transplant << ','
        << chronic << ',' << height << ',' << weight << ',' << allergy << ','
        << cancer << ',' << surgeries << ',' << premium << '\n';
  }
  return out.str();
}

void write_synthetic_csv(const std::filesystem::path& path, std::size_t rows,
                         std::uint64_t seed) {
  write_file_atomic(path, synthetic_insurance_csv(rows, seed));
}

std::filesystem::path fresh_temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("premium_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace premium::testing
