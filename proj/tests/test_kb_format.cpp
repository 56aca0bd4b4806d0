#include <gtest/gtest.h>

#include "support.hpp"

using namespace cbdx;
using namespace cbdx::testing;

namespace {

const char* kSmall = R"(name "small"
version "0.1"

symptom a "A" {
  base male { (0, 0.1) }
  base female { (0, 0.1) (60, 0.2) }
}

symptom b {
  base male { (0, 0) }
  base female { (0, 0) }
}

disease d "D" {
  prior male { (0, 0.5) }
  prior female { (0, 0.5) }
  pathstate p {
    link { (0, 0.5) (24, 0.75) }
    symptom a {
      link { (0, 0.9) }
    }
  }
  symptom b {
    link { (0, 0.25) }
  }
  direct a { (0, 0.4) }
}

utilities {
  d { symptomatic 1 operation 2.5 }
}
)";

std::vector<ParseDiagnostic> errors_of(std::string_view text) {
    std::vector<ParseDiagnostic> out;
    for (const auto& d : parse_kb(text).diagnostics)
        if (d.severity == Severity::error) out.push_back(d);
    return out;
}

} // namespace

TEST(Format, ParsesSmallKb) {
    const auto r = parse_kb(kSmall);
    ASSERT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : r.diagnostics[0].to_string());
    const auto& kb = *r.kb;
    EXPECT_EQ(kb.name, "small");
    ASSERT_EQ(kb.symptoms.size(), 2u);
    EXPECT_EQ(kb.symptoms[0].label, "A");
    EXPECT_EQ(kb.symptoms[1].label, "");
    const auto& d = kb.disease("d");
    EXPECT_EQ(d.tree.kind, NodeKind::disease_root);
    ASSERT_EQ(d.tree.children.size(), 2u);
    EXPECT_EQ(d.tree.children[0].child.id, "p");
    EXPECT_EQ(d.tree.children[0].link, (TimeCurve{{0, 0.5}, {24, 0.75}}));
    EXPECT_EQ(d.tree.children[1].child.symptom_id, "b");
    ASSERT_NE(d.direct_curve("a"), nullptr);
    EXPECT_EQ(kb.utilities.at("d").operation, 2.5);
}

TEST(Format, SmallKbIsCanonical) { EXPECT_EQ(serialize_kb(*parse_kb(kSmall).kb), kSmall); }

TEST(Format, FixtureRoundTripsByteExactly) {
    const std::string text = read_file(data_path("fixture.pkb"));
    const auto r = parse_kb(text);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(serialize_kb(*r.kb), text);
}

TEST(Format, RandomKbsRoundTrip) {
    TreeGen gen(2024);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<CausalNode> trees;
        const int n = gen.pick(1, 3);
        BaseRates rates;
        for (int i = 0; i < n; ++i) {
            auto rc = gen.tree();
            rc.tree.id = "d" + std::to_string(i);
            for (const auto& s : rc.symptoms) rates.set(s, rc.rates(s));
            trees.push_back(rc.tree);
        }
        KnowledgeBase kb = kb_for(trees, rates);
        kb.symptoms[0].label = "quote \" and \\ and\ttab";
        const std::string text = serialize_kb(kb);
        const auto r = parse_kb(text);
        ASSERT_TRUE(r.ok()) << text;
        EXPECT_EQ(*r.kb, kb);
        EXPECT_EQ(serialize_kb(*r.kb), text);
    }
}

TEST(Format, CommentsAndWhitespaceAreIgnored) {
    std::string text = kSmall;
    text = "# leading comment\n" + text;
    text.replace(text.find("disease d"), 9, "disease   d # trailing\n");
    const auto r = parse_kb(text);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(serialize_kb(*r.kb), kSmall);
}

TEST(Format, OutOfRangeProbabilityIsLocated) {
    std::string text = kSmall;
    text.replace(text.find("(0, 0.25)"), 9, "(0, 1.25)");
    const auto errs = errors_of(text);
    ASSERT_EQ(errs.size(), 1u);
    const std::size_t at = text.find("1.25");
    EXPECT_EQ(errs[0].span.start_offset, at);
    EXPECT_EQ(errs[0].span.end_offset, at + 4);
    EXPECT_EQ(errs[0].span.start_line, 24u);
    EXPECT_NE(errs[0].message.find("1.25"), std::string::npos);
}

TEST(Format, TimeOutsideDomainIsRejected) {
    std::string text = kSmall;
    text.replace(text.find("(24, 0.75)"), 10, "(140, 0.75)");
    EXPECT_EQ(errors_of(text).size(), 1u);
}

TEST(Format, NonIncreasingBreakpoints) {
    std::string text = kSmall;
    text.replace(text.find("(24, 0.75)"), 10, "(0, 0.75)");
    const auto errs = errors_of(text);
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_NE(errs[0].message.find("strictly increasing"), std::string::npos);
}

TEST(Format, UnresolvedSymptomReference) {
    std::string text = kSmall;
    text.replace(text.find("symptom b {\n    link"), 9, "symptom z");
    const auto errs = errors_of(text);
    ASSERT_FALSE(errs.empty());
    EXPECT_NE(errs[0].message.find("'z'"), std::string::npos);
}

TEST(Format, RecoversAndReportsSeveralErrors) {
    const char* text = "symptom a {\n  base male { (0, 0.1) (0, 0.2) }\n  bogus\n}\n"
                       "symptom b { base male { (0, 2) } }\n"
                       "disease d \"x\n";
    const auto errs = errors_of(text);
    EXPECT_GE(errs.size(), 4u);
    for (std::size_t i = 1; i < errs.size(); ++i)
        EXPECT_LE(errs[i - 1].span.start_offset, errs[i].span.start_offset);
}

TEST(Format, DuplicateDeclarations) {
    std::string text = kSmall;
    text += "\nsymptom a { base male { (0, 0.1) } }\n";
    EXPECT_FALSE(errors_of(text).empty());
}

TEST(Format, FemaleOnlyRules) {
    std::string text = kSmall;
    text.replace(text.find("  prior male { (0, 0.5) }\n"), 0, "  female_only\n");
    EXPECT_FALSE(errors_of(text).empty()); // male prior on a female-only disease

    std::string cyc = kSmall;
    cyc.replace(cyc.find("  pathstate p"), 0, "  cycle { (1, 0.5) (28, 1) }\n");
    EXPECT_FALSE(errors_of(cyc).empty()); // cycle weight needs female_only
}

TEST(Format, MissingUtilities) {
    std::string text = kSmall;
    text.erase(text.find("utilities"));
    const auto errs = errors_of(text);
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_NE(errs[0].message.find("utility"), std::string::npos);
}

TEST(Format, LexerErrors) {
    EXPECT_FALSE(errors_of("name \"open").empty());
    EXPECT_FALSE(errors_of("name @").empty());
    EXPECT_FALSE(errors_of("symptom a { base male { (0, 1e-3) } }").empty());
    EXPECT_FALSE(errors_of("symptom a { base male { (0, -) } }").empty());
}

TEST(Format, DeepNestingIsBounded) {
    std::string text = "symptom s { base male { (0, 0) } }\ndisease d { prior male { (0, 1) }\n";
    for (int i = 0; i < 500; ++i) text += "pathstate p" + std::to_string(i) + " { link { (0, 1) }\n";
    const auto r = parse_kb(text);
    EXPECT_FALSE(r.ok());
}

TEST(Format, FuzzNeverCrashes) {
    std::mt19937_64 rng(99);
    const std::string alphabet = "{}(),.-0123456789 \n\"#abcdeimnoprstuvyz_\\";
    const std::string fixture_text = read_file(data_path("fixture.pkb"));
    for (int rep = 0; rep < 2000; ++rep) {
        std::string s;
        if (rep % 2 == 0) {
            const std::size_t len = rng() % 200;
            for (std::size_t i = 0; i < len; ++i)
                s += rep % 4 == 0 ? static_cast<char>(rng() & 0xff) : alphabet[rng() % alphabet.size()];
        } else {
            // Mutate a valid document.
            s = fixture_text;
            const int edits = 1 + static_cast<int>(rng() % 8);
            for (int e = 0; e < edits; ++e) {
                const std::size_t pos = rng() % s.size();
                switch (rng() % 3) {
                case 0: s.erase(pos, 1 + rng() % 20); break;
                case 1: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
                default: s[pos] = static_cast<char>(rng() & 0xff); break;
                }
            }
        }
        const auto r = parse_kb(s);
        EXPECT_EQ(r.ok(), r.error_count() == 0);
        for (const auto& d : r.diagnostics) {
            EXPECT_LE(d.span.start_offset, d.span.end_offset);
            EXPECT_LE(d.span.end_offset, s.size());
            EXPECT_GE(d.span.start_line, 1u);
            EXPECT_GE(d.span.start_column, 1u);
        }
    }
}

TEST(Format, ExportJsonMatchesGolden) {
    const Json golden = Json::parse(read_file(golden_path("fixture.json")));
    EXPECT_EQ(export_json(fixture()), golden);
}

TEST(Format, ExportJsonShape) {
    const Json j = export_json(*parse_kb(kSmall).kb);
    EXPECT_EQ(j["symptoms"][0]["base"]["female"], Json::parse("[[0, 0.1], [60, 0.2]]"));
    const Json& tree = j["diseases"][0]["tree"];
    EXPECT_EQ(tree["kind"], "disease");
    EXPECT_TRUE(tree["link"].is_null());
    EXPECT_EQ(tree["children"][0]["kind"], "pathstate");
    EXPECT_EQ(tree["children"][0]["children"][0]["kind"], "symptom");
    EXPECT_TRUE(j["diseases"][0]["cycle"].is_null());
    EXPECT_EQ(j["utilities"]["d"]["operation"], 2.5);
}
