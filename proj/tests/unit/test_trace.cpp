#include <gtest/gtest.h>

#include <fstream>

#include "joinsim/errors.hpp"
#include "joinsim/trace.hpp"
#include "test_support.hpp"

namespace joinsim {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Trace sample_trace() {
  Trace t("q7_3", {2, 5, 9}, {0.5, 1.0, 0.125});
  for (std::uint64_t m = 1; m < 8; ++m) t.set_local(m, Cardinality{m * 1000 + 7});
  t.set_local(7, Cardinality::saturated_value());
  t.optimal().left_deep_cp = Cardinality{42};
  t.optimal().bushy_no_cp = Cardinality{uint128{1} << 90};
  return t;
}

TEST(Trace, GlobalAndLocalKeys) {
  const Trace t = sample_trace();
  EXPECT_EQ(t.full_set().bits, (1ULL << 2) | (1ULL << 5) | (1ULL << 9));
  EXPECT_EQ(t.to_local(SubsetKey{(1ULL << 5) | (1ULL << 9)}), 0b110u);
  EXPECT_EQ(t.to_global(0b101).bits, (1ULL << 2) | (1ULL << 9));
  EXPECT_EQ(t.lookup(SubsetKey{1ULL << 5}), Cardinality{2007});
  EXPECT_THROW(t.lookup(SubsetKey{1ULL << 3}), LimitError);
  EXPECT_THROW(t.lookup(SubsetKey{0}), LimitError);
}

TEST(Trace, PartialTraceReportsMissingEntries) {
  Trace t("p", {0, 1}, {1.0, 1.0});
  t.set(SubsetKey{1}, Cardinality{3});
  EXPECT_FALSE(t.complete());
  EXPECT_EQ(t.entry_count(), 1u);
  EXPECT_THROW(t.lookup(SubsetKey{3}), MissingEntryError);
  EXPECT_THROW(t.lookup_local(2), MissingEntryError);
  const Trace back = parse_trace(serialize_trace(t));
  EXPECT_EQ(back, t);
  EXPECT_THROW(parse_trace(serialize_trace(t), true), FormatError);
}

TEST(Trace, SaveLoadByteAndValueIdentical) {
  const Trace t = sample_trace();
  const auto dir = testing::scratch_dir("trace_io");
  save_trace(t, dir / "a.trace");
  const Trace loaded = load_trace(dir / "a.trace", true);
  EXPECT_EQ(loaded, t);
  save_trace(loaded, dir / "b.trace");
  EXPECT_EQ(slurp(dir / "a.trace"), slurp(dir / "b.trace"));
  EXPECT_TRUE(loaded.lookup_local(7).saturated());
  EXPECT_FALSE(loaded.optimal().left_deep_no_cp.has_value());
}

TEST(Trace, DetectsCorruption) {
  const std::string text = serialize_trace(sample_trace());
  std::string flipped = text;
  flipped[text.find("1007")] = '2';
  EXPECT_THROW(parse_trace(flipped), ChecksumError);

  const std::string truncated = text.substr(0, text.rfind("checksum"));
  EXPECT_THROW(parse_trace(truncated), ChecksumError);
  EXPECT_THROW(parse_trace("garbage"), FormatError);
}

TEST(TraceStore, ManifestRoundTrip) {
  const auto dir = testing::scratch_dir("trace_store");
  Trace a = sample_trace();
  Trace b("other", {0, 1}, {1.0, 1.0});
  for (std::uint64_t m = 1; m < 4; ++m) b.set_local(m, Cardinality{m});
  std::filesystem::create_directories(dir / "t");
  save_trace(a, dir / "t" / "a.trace");
  save_trace(b, dir / "t" / "b.trace");
  save_manifest({{a.query_id(), "t/a.trace"}, {b.query_id(), "t/b.trace"}}, dir / "manifest.txt");
  const TraceStore store = TraceStore::from_manifest(dir / "manifest.txt");
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.at("q7_3"), a);
  EXPECT_EQ(store.find("missing"), nullptr);
  EXPECT_THROW(store.at("missing"), MissingEntryError);
  EXPECT_EQ(store.ids(), (std::vector<std::string>{"other", "q7_3"}));

  save_manifest({{"wrong", "t/a.trace"}}, dir / "bad.txt");
  EXPECT_THROW(TraceStore::from_manifest(dir / "bad.txt"), FormatError);

  TraceStore dup;
  dup.add(std::make_shared<Trace>(a));
  EXPECT_THROW(dup.add(std::make_shared<Trace>(a)), FormatError);
}

TEST(OptimalCosts, IndexedByRegime) {
  OptimalCosts c;
  const Regime bushy_no_cp{PlanType::bushy, false};
  const Regime bushy_cp{PlanType::bushy, true};
  c[bushy_no_cp] = Cardinality{5};
  EXPECT_EQ(c.bushy_no_cp, Cardinality{5});
  EXPECT_FALSE(c[bushy_cp].has_value());
  EXPECT_EQ(to_string(Regime{PlanType::left_deep, true}), "left-deep/enable-cp");
  EXPECT_EQ(parse_plan_type("bushy"), PlanType::bushy);
}

}  // namespace
}  // namespace joinsim
