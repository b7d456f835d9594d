#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "premium/error.hpp"
#include "premium/io.hpp"
#include "synthetic.hpp"

namespace premium {
namespace {

TEST(FormatFixed, RoundsToRequestedDecimals) {
  EXPECT_EQ(format_fixed(1.23456, 3), "1.235");
  EXPECT_EQ(format_fixed(24336.7099, 2), "24336.71");
  EXPECT_EQ(format_fixed(2.0, 2), "2.00");
}

TEST(FormatFixed, NeverPrintsNegativeZero) {
  EXPECT_EQ(format_fixed(-0.0001, 3), "0.000");
  EXPECT_EQ(format_fixed(-0.0, 2), "0.00");
  EXPECT_EQ(format_fixed(-0.5, 1), "-0.5");
}

TEST(FormatExact, RoundTripsDoubles) {
  for (const double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
    EXPECT_EQ(std::stod(format_exact(v)), v);
  }
  EXPECT_EQ(format_exact(0.5), "0.5");
}

TEST(Fnv1a, MatchesPublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(ArtifactMeta, CarriesSeedVersionAndHash) {
  const Json config = {{"a", 1}};
  const Json meta = artifact_meta(42, config);
  EXPECT_EQ(meta["seed"], 42);
  EXPECT_EQ(meta["format_version"], kFormatVersion);
  EXPECT_EQ(meta["config_hash"].get<std::string>().size(), 16u);
  EXPECT_NE(config_hash(config), config_hash(Json{{"a", 2}}));
}

TEST(Csv, EscapesAndReadsBack) {
  const auto dir = testing::fresh_temp_dir("csv");
  CsvBuilder csv;
  csv.comment("provenance line");
  csv.header({"name", "value"});
  csv.row({"plain", "1"});
  csv.row({"with, comma", "say \"hi\""});
  write_file_atomic(dir / "t.csv", csv.str());
  const auto rows = read_csv_cells(dir / "t.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"name", "value"}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"with, comma", "say \"hi\""}));
  EXPECT_EQ(csv.str().find('\r'), std::string::npos);
  EXPECT_EQ(csv.str().rfind("# provenance line\n", 0), 0u);
}

TEST(AtomicWrite, CreatesParentsAndLeavesNoTemporary) {
  const auto dir = testing::fresh_temp_dir("atomic");
  write_file_atomic(dir / "a" / "b" / "f.txt", "hello");
  EXPECT_EQ(read_text_file(dir / "a" / "b" / "f.txt"), "hello");
  EXPECT_FALSE(std::filesystem::exists(dir / "a" / "b" / "f.txt.tmp"));
}

TEST(AtomicWrite, UnwritableLocationIsAnIoError) {
  const auto dir = testing::fresh_temp_dir("atomic_bad");
  write_file_atomic(dir / "file", "x");
  try {
    write_file_atomic(dir / "file" / "child.txt", "y");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_EQ(e.exit_code(), 4);
  }
}

TEST(JsonDocuments, RequireKindAndVersion) {
  Json doc = {{"format_version", kFormatVersion}, {"kind", "model"}};
  EXPECT_NO_THROW(require_document(doc, "model"));
  EXPECT_THROW(require_document(doc, "grid"), IoError);
  doc["format_version"] = 99;
  EXPECT_THROW(require_document(doc, "model"), IoError);
  EXPECT_THROW(require_document(Json::array(), "model"), IoError);
}

TEST(JsonDocuments, TruncatedFileIsAParseError) {
  const auto dir = testing::fresh_temp_dir("json");
  write_file_atomic(dir / "bad.json", "{\"format_version\": 1, \"kind\"");
  EXPECT_THROW(read_json_file(dir / "bad.json"), IoError);
  EXPECT_THROW(read_json_file(dir / "missing.json"), IoError);
}

TEST(Errors, ExitCodesFollowTheConvention) {
  EXPECT_EQ(UsageError("u").exit_code(), 2);
  EXPECT_EQ(ValidationError("v").exit_code(), 3);
  EXPECT_EQ(IoError("i").exit_code(), 4);
  EXPECT_EQ(NumericError("n").exit_code(), 5);
}

}  // namespace
}  // namespace premium
