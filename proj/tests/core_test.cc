#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "roads/errors.h"
#include "roads/taxonomy.h"
#include "roads/types.h"

namespace roads {
namespace {

std::vector<FieldTag> Tags(std::initializer_list<const char*> raw) {
  std::vector<FieldTag> out;
  for (const char* r : raw) out.emplace_back(r);
  return out;
}

Taxonomy XyTaxonomy() {
  std::vector<ConceptId> concepts{{StepKind::kJob, 0, "X"},
                                  {StepKind::kJob, 1, "Y"}};
  std::map<FieldTag, std::vector<int>> map;
  map.emplace(FieldTag("a"), std::vector<int>{0});
  map.emplace(FieldTag("b"), std::vector<int>{0, 1});
  map.emplace(FieldTag("c"), std::vector<int>{1});
  return Taxonomy(StepKind::kJob, concepts, map);
}

TEST(FieldTagTest, NormalizesCaseAndSpaces) {
  EXPECT_EQ(FieldTag("  Computer   SCIENCE ").label(), "computer science");
  EXPECT_THROW(FieldTag("   "), InvalidArgumentError);
}

TEST(DateTest, ParsesMonthAndDay) {
  Date d = Date::Parse("2009-06");
  EXPECT_EQ(d.year, 2009);
  EXPECT_EQ(d.month, 6);
  EXPECT_FALSE(d.day.has_value());
  EXPECT_EQ(d.ToString(), "2009-06");
  EXPECT_EQ(Date::Parse("2009-06-15").ToString(), "2009-06-15");
  EXPECT_THROW(Date::Parse("2009-13"), InvalidArgumentError);
  EXPECT_THROW(Date::Parse("june 2009"), InvalidArgumentError);
}

TEST(StepKindTest, RoundTrips) {
  EXPECT_EQ(ParseStepKind("diploma"), StepKind::kDiploma);
  EXPECT_EQ(ParseStepKind(ToString(StepKind::kJob)), StepKind::kJob);
  EXPECT_THROW(ParseStepKind("hobby"), InvalidArgumentError);
}

TEST(ClassifyStepTest, TwoFieldsOneConcept) {
  std::vector<ConceptId> concepts{{StepKind::kDiploma, 0, "Math & Science"},
                                  {StepKind::kDiploma, 1, "CS & Internet"}};
  std::map<FieldTag, std::vector<int>> map;
  map.emplace(FieldTag("computer science"), std::vector<int>{1});
  map.emplace(FieldTag("internet"), std::vector<int>{1});
  Taxonomy tax(StepKind::kDiploma, concepts, map);
  auto got = ClassifyStep(Tags({"computer science", "internet"}), tax);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].label, "CS & Internet");
}

TEST(ClassifyStepTest, EmptyFields) {
  EXPECT_TRUE(ClassifyStep({}, XyTaxonomy()).empty());
}

TEST(ClassifyStepTest, EqualSupportOrdersByIndex) {
  auto got = ClassifyStep(Tags({"a", "b", "c"}), XyTaxonomy());
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].label, "X");
  EXPECT_EQ(got[1].label, "Y");
}

TEST(ClassifyStepTest, HigherSupportFirst) {
  auto got = ClassifyStep(Tags({"b", "c"}), XyTaxonomy());
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].label, "Y");
}

TEST(ClassifyStepTest, UnknownFieldsIgnored) {
  EXPECT_TRUE(ClassifyStep(Tags({"zzz"}), XyTaxonomy()).empty());
}

TEST(ClassifyStepTest, PermutationInvariantAndDeterministic) {
  std::mt19937_64 rng(7);
  const auto tax = XyTaxonomy();
  const std::vector<std::string> pool{"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FieldTag> fields;
    for (const auto& p : pool) {
      if (rng() % 2) fields.emplace_back(p);
    }
    auto expected = ClassifyStep(fields, tax);
    std::shuffle(fields.begin(), fields.end(), rng);
    EXPECT_EQ(ClassifyStep(fields, tax), expected);
    EXPECT_EQ(ClassifyStep(fields, tax), ClassifyStep(fields, tax));
    EXPECT_LE(expected.size(), kMaxConceptsPerStep);
  }
}

TEST(TaxonomyTest, RejectsUnknownConceptInMap) {
  std::vector<ConceptId> concepts{{StepKind::kJob, 0, "X"}};
  std::map<FieldTag, std::vector<int>> map;
  map.emplace(FieldTag("a"), std::vector<int>{3});
  EXPECT_THROW(Taxonomy(StepKind::kJob, concepts, map), Error);
}

TEST(TaxonomyTest, RejectsDuplicateIndex) {
  std::vector<ConceptId> concepts{{StepKind::kJob, 0, "X"},
                                  {StepKind::kJob, 0, "Y"}};
  EXPECT_THROW(Taxonomy(StepKind::kJob, concepts, {}), Error);
}

TEST(TaxonomyTest, LookupByLabelIgnoresCase) {
  auto tax = XyTaxonomy();
  ASSERT_NE(tax.FindByLabel("y"), nullptr);
  EXPECT_EQ(tax.FindByLabel("y")->index, 1);
  EXPECT_EQ(tax.FindByLabel("nope"), nullptr);
  EXPECT_THROW(tax.At(9), ConceptNotInTaxonomyError);
}

TEST(TaxonomyCsvTest, RoundTrip) {
  std::istringstream in(
      "domain,concept_index,concept_label,field\n"
      "job,0,\"Business, Sales & Marketing\",sales\n"
      "job,0,\"Business, Sales & Marketing\",marketing\n"
      "job,1,Health care,nursing\n"
      "job,2,Unused,\n");
  Taxonomy tax = ReadTaxonomyCsv(in, StepKind::kJob);
  EXPECT_EQ(tax.size(), 3u);
  EXPECT_EQ(tax.At(0).label, "Business, Sales & Marketing");
  std::ostringstream out;
  WriteTaxonomyCsv(out, tax);
  std::istringstream again(out.str());
  EXPECT_EQ(ReadTaxonomyCsv(again, StepKind::kJob), tax);
}

TEST(TaxonomyCsvTest, BadHeader) {
  std::istringstream header("a,b,c,d\n");
  EXPECT_THROW(ReadTaxonomyCsv(header, StepKind::kJob), ParseError);
}

TEST(TaxonomyCsvTest, KeepsOnlyRequestedDomain) {
  std::istringstream in(
      "domain,concept_index,concept_label,field\n"
      "diploma,0,Math,algebra\n"
      "job,0,Sales,sales\n");
  Taxonomy tax = ReadTaxonomyCsv(in, StepKind::kJob);
  ASSERT_EQ(tax.size(), 1u);
  EXPECT_EQ(tax.At(0).label, "Sales");
}

TEST(TaxonomyCsvTest, ErrorCarriesLineNumber) {
  std::istringstream in(
      "domain,concept_index,concept_label,field\n"
      "job,0,Sales,sales\n"
      "job,zero,Sales,sales\n");
  try {
    ReadTaxonomyCsv(in, StepKind::kJob);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(StepOrderTest, OpenEndSortsLast) {
  Trajectory t;
  Step a;
  a.title = "a";
  a.start = Date{2010, 1, {}};
  Step b;
  b.title = "b";
  b.start = Date{2010, 1, {}};
  b.end = Date{2011, 1, {}};
  Step c;
  c.title = "c";
  c.start = Date{2005, 1, {}};
  t.steps = {a, b, c};
  SortSteps(t);
  EXPECT_EQ(t.steps[0].title, "c");
  EXPECT_EQ(t.steps[1].title, "b");
  EXPECT_EQ(t.steps[2].title, "a");
}

}  // namespace
}  // namespace roads
