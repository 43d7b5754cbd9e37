#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "irpdfl/errors.hpp"
#include "irpdfl/instance.hpp"

namespace irpdfl {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("irpdfl_instance_" + name);
}

TEST(Instance, Tiny2x2IsValid) {
  const auto report = validate_instance(tiny2x2());
  EXPECT_TRUE(report.ok());
}

TEST(Instance, ShippedFixtureMatchesBuiltin) {
  const auto inst = read_instance(std::filesystem::path(IRPDFL_DATA_DIR) / "tiny2x2.json");
  EXPECT_EQ(inst, tiny2x2());
}

TEST(Instance, NegativeDemandIsReported) {
  auto inst = tiny2x2();
  inst.demand(0, 1) = -1.0;
  const auto report = validate_instance(inst);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(report.has("demand nonnegative"));
  EXPECT_EQ(report.violations.front().field, "demand[0][1]");
}

TEST(Instance, UncoveredCustomerIsReported) {
  auto inst = tiny2x2();
  inst.routes = {{{0}, 10.0}};
  const auto report = validate_instance(inst);
  EXPECT_TRUE(report.has("route coverage"));
}

TEST(Instance, InitialInventoryAboveCapacityIsReported) {
  auto inst = tiny2x2();
  inst.initial_inventory[1] = 11.0;
  EXPECT_TRUE(validate_instance(inst).has("initial inventory within capacity"));
}

TEST(Instance, ReportsEveryViolation) {
  auto inst = tiny2x2();
  inst.demand(0, 0) = -1.0;
  inst.demand(1, 1) = -2.0;
  inst.vehicle_capacity = 0.0;
  EXPECT_EQ(validate_instance(inst).violations.size(), 3u);
}

TEST(Generator, SeededDeterminism) {
  EXPECT_EQ(generate_instance(2, 2, 3, 7), generate_instance(2, 2, 3, 7));
  EXPECT_FALSE(generate_instance(2, 2, 3, 7) == generate_instance(2, 2, 3, 8));
}

TEST(Generator, RejectsBadParameters) {
  EXPECT_THROW(generate_instance(0, 2, 3, 7), InvalidParameter);
  EXPECT_THROW(generate_instance(2, 0, 3, 7), InvalidParameter);
  EXPECT_THROW(generate_instance(3, 2, 2, 7), InvalidParameter);
}

TEST(Generator, ValidAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = generate_instance(2, 2, 3, seed);
    const auto report = validate_instance(inst);
    ASSERT_TRUE(report.ok()) << "seed " << seed << ": "
                             << report.violations.front().message;
    EXPECT_GE(inst.demand.minCoeff(), 0.0);
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    ASSERT_TRUE(validate_instance(generate_instance(1 + seed % 5, 1 + seed % 7,
                                                    5 + seed % 3, seed))
                    .ok());
}

TEST(Generator, CatalogStartsWithSingletons) {
  const auto inst = generate_instance(4, 3, 7, 11);
  ASSERT_EQ(inst.routes.size(), 7u);
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_EQ(inst.routes[i].visits.size(), 1u);
    EXPECT_EQ(inst.routes[i].visits[0], i);
  }
  for (std::size_t r = 4; r < 7; ++r) EXPECT_GE(inst.routes[r].visits.size(), 2u);
}

TEST(InstanceIo, RoundTripPreservesEveryField) {
  const auto path = temp_file("roundtrip.json");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto inst = generate_instance(3, 4, 5, seed);
    if (seed == 2) inst.max_visits_per_day = 2;
    write_instance(inst, path);
    EXPECT_EQ(read_instance(path), inst);
  }
  write_instance(tiny2x2(), path);
  EXPECT_EQ(read_instance(path), tiny2x2());
}

TEST(InstanceIo, MissingFieldIsNamed) {
  auto text = serialize_instance(tiny2x2());
  const auto pos = text.find("\"vehicle_capacity\"");
  text.replace(pos, 18, "\"vehicle_capacity_renamed\"");
  try {
    parse_instance(text);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "vehicle_capacity");
    EXPECT_NE(std::string(e.what()).find("vehicle_capacity"), std::string::npos);
  }
}

TEST(InstanceIo, TypeMismatchIsNamed) {
  auto text = serialize_instance(tiny2x2());
  const auto pos = text.find("\"horizon\": 2");
  text.replace(pos, 12, "\"horizon\": \"two\"");
  try {
    parse_instance(text);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "horizon");
  }
}

TEST(InstanceIo, UnknownFieldWarns) {
  auto text = serialize_instance(tiny2x2());
  text.insert(text.find('{') + 1, "\n  \"comment\": \"hello\",");
  std::vector<std::string> warnings;
  const auto inst = parse_instance(text, &warnings);
  EXPECT_EQ(inst, tiny2x2());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("comment"), std::string::npos);
}

TEST(InstanceIo, UnreadableFileNamesPath) {
  try {
    read_instance("/nonexistent/missing.json");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.json"), std::string::npos);
  }
}

TEST(InstanceIo, WriteRejectsInvalidInstance) {
  auto inst = tiny2x2();
  inst.demand(0, 0) = -3.0;
  EXPECT_THROW(write_instance(inst, temp_file("bad.json")), InvalidParameter);
}

}  // namespace
}  // namespace irpdfl
