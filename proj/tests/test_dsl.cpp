#include <catch2/catch_amalgamated.hpp>

#include "sds/dsl/interpreter.hpp"
#include "support/program_fuzzer.hpp"
#include "support/reference_eval.hpp"

using namespace sds;
using namespace sds::dsl;

TEST_CASE("parse: minimal velocity program") {
    const RewardProgram p = parse("vel = exp(-square(base_lin_vel.x - command.x))");
    REQUIRE(p.subs.size() == 1);
    CHECK(p.subs[0].name == "vel");
    CHECK(p.subs[0].weight == 1.0);
}

TEST_CASE("parse: leading literal factor becomes the weight") {
    const RewardProgram p = parse(
        "bh = 2.0 * exp(-square(base_height - 0.30))\n"
        "or = exp(-norm(gravity_proj - [0, 0, -1]))\n");
    REQUIRE(p.subs.size() == 2);
    CHECK(p.subs[0].name == "bh");
    CHECK(p.subs[0].weight == 2.0);
    CHECK(p.subs[1].name == "or");
    CHECK(p.subs[1].weight == 1.0);
}

TEST_CASE("parse: unknown builtin") {
    try {
        parse("x = frobnicate(1)");
        FAIL("expected UnknownFunction");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownFunction);
    }
}

TEST_CASE("parse: syntax errors carry line and column") {
    try {
        parse("a = 1\nb = (2 + \n");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseError);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("parse: duplicate sub-reward names rejected") {
    CHECK_THROWS_AS(parse("a = 1\na = 2\n"), Error);
}

TEST_CASE("validate: well-formed program passes all checks") {
    const ValidationReport r =
        validate(parse("vel = exp(-square(base_lin_vel.x - command.x))"));
    CHECK(r.ok);
    for (const auto& c : r.checks) {
        INFO(c.check);
        CHECK(c.passed);
    }
}

TEST_CASE("validate: the eight documented malformation classes") {
    auto report_for = [](const std::string& src) { return validate_source(src); };

    SECTION("syntax error") {
        const auto r = report_for("x = = 1");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("parse"));
    }
    SECTION("unknown function") {
        const auto r = report_for("x = frobnicate(1)");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("unknown-function"));
    }
    SECTION("unresolved identifier") {
        const auto r = report_for("x = base_heihgt + 1");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("identifier-resolution"));
    }
    SECTION("wrong arity") {
        const auto r = report_for("x = clip(base_height, 0)");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("arity"));
    }
    SECTION("shape mismatch") {
        const auto r = report_for("x = sum(base_lin_vel + foot_contacts)");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("shape"));
    }
    SECTION("index out of bounds") {
        const auto r = report_for("j = joint_pos[12]");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("index-bounds"));
    }
    SECTION("division by constant zero") {
        const auto r = report_for("x = 1 / (2 - 2)");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("constant-division"));
    }
    SECTION("runtime probe failure") {
        const auto r = report_for("d = 1 / (base_height - base_height)");
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.passed("runtime-probe"));
    }
}

TEST_CASE("validate: foot index bound is 4") {
    CHECK_FALSE(validate_source("x = foot_contacts[4]").ok);
    CHECK(validate_source("x = foot_contacts[3]").ok);
}

TEST_CASE("evaluate: velocity term is 1 when tracking the command") {
    const RewardProgram p = parse("vel = exp(-square(base_lin_vel.x - command.x))");
    const CompiledProgram cp = compile(p);
    Observation obs;
    obs.base_lin_vel[0] = 0.7;
    obs.command[0] = 0.7;
    const SubRewardBreakdown b = evaluate(cp, obs);
    CHECK(b.components[0].raw == 1.0);
    CHECK(b.total == 1.0);
}

TEST_CASE("evaluate: base-height term reports the weighted contribution") {
    const RewardProgram p = parse("bh = 2.0 * exp(-square(base_height - 0.30))");
    const CompiledProgram cp = compile(p);
    Observation obs;
    obs.base_height = 0.30;
    const SubRewardBreakdown b = evaluate(cp, obs);
    CHECK(b.components[0].raw == 1.0);
    CHECK(b.components[0].weighted == 2.0);
    CHECK(b.total == 2.0);
}

TEST_CASE("evaluate: clip saturates") {
    const CompiledProgram cp = compile(parse("c = clip(5, 0, 1)"));
    CHECK(evaluate(cp, Observation{}).total == 1.0);
}

TEST_CASE("evaluate: division by a zero-valued field raises NumericError") {
    const RewardProgram p = parse("d = 1 / base_height");
    const CompiledProgram cp = compile(p);
    Observation obs;  // base_height == 0
    try {
        evaluate(cp, obs);
        FAIL("expected NumericError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NumericError);
        CHECK(std::string(e.what()).find("'d'") != std::string::npos);
    }
}

TEST_CASE("evaluate: purity, identical inputs give identical breakdowns") {
    sds_test::ProgramFuzzer fuzz(99);
    const RewardProgram p = parse(
        "a = match_phase(foot_contacts, \"trot\") + joint_vel[3] * 0.25\n"
        "b = norm(base_lin_vel - command)\n");
    const CompiledProgram cp = compile(p);
    const Observation obs = fuzz.random_observation();
    const SubRewardBreakdown x = evaluate(cp, obs);
    const SubRewardBreakdown y = evaluate(cp, obs);
    REQUIRE(x.components.size() == y.components.size());
    CHECK(x.total == y.total);
    for (std::size_t i = 0; i < x.components.size(); ++i) {
        CHECK(x.components[i].raw == y.components[i].raw);
        CHECK(x.components[i].weighted == y.components[i].weighted);
    }
}

TEST_CASE("property: scaling weights scales the total, raw values unchanged") {
    sds_test::ProgramFuzzer fuzz(123);
    for (int trial = 0; trial < 20; ++trial) {
        RewardProgram p;
        const ValidationReport r = validate_source(fuzz.random_program(), &p);
        if (!r.ok) continue;
        CompiledProgram cp = compile(p);
        const Observation obs = fuzz.random_observation();

        SubRewardBreakdown base;
        try {
            base = evaluate(cp, obs);
        } catch (const Error&) {
            continue;  // runtime blowup; not this property's concern
        }
        const double c = 3.5;
        CompiledProgram scaled = cp;
        for (double& w : scaled.weights) w *= c;
        const SubRewardBreakdown after = evaluate(scaled, obs);
        for (std::size_t i = 0; i < base.components.size(); ++i)
            CHECK(after.components[i].raw == base.components[i].raw);
        CHECK_THAT(after.total, Catch::Matchers::WithinRel(c * base.total, 1e-12) ||
                                    Catch::Matchers::WithinAbs(c * base.total, 1e-15));
    }
}

TEST_CASE("property: parse/pretty-print/parse is a fixpoint") {
    sds_test::ProgramFuzzer fuzz(2024);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::string src = fuzz.random_program();
        const RewardProgram p1 = parse(src);
        const std::string printed = pretty_print(p1);
        const RewardProgram p2 = parse(printed);
        INFO("source:\n" << src << "printed:\n" << printed);
        REQUIRE(ast_equal(p1, p2));
        CHECK(pretty_print(p2) == printed);
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("property: VM matches the reference evaluator") {
    sds_test::ProgramFuzzer fuzz(7);
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        RewardProgram p;
        if (!validate_source(fuzz.random_program(), &p).ok) continue;
        const CompiledProgram cp = compile(p);
        const Observation obs = fuzz.random_observation();

        bool vm_threw = false;
        SubRewardBreakdown vm;
        try {
            vm = evaluate(cp, obs);
        } catch (const Error&) {
            vm_threw = true;
        }
        bool ref_threw = false;
        sds_test::RefBreakdown ref;
        try {
            ref = sds_test::ref_evaluate(p, obs);
        } catch (const sds_test::RefNonFinite&) {
            ref_threw = true;
        }
        REQUIRE(vm_threw == ref_threw);
        if (vm_threw) continue;
        REQUIRE(vm.components.size() == ref.raw.size());
        for (std::size_t i = 0; i < ref.raw.size(); ++i)
            CHECK_THAT(vm.components[i].raw,
                       Catch::Matchers::WithinAbs(ref.raw[i], 1e-12) ||
                           Catch::Matchers::WithinRel(ref.raw[i], 1e-12));
        CHECK_THAT(vm.total, Catch::Matchers::WithinAbs(ref.total, 1e-12) ||
                                 Catch::Matchers::WithinRel(ref.total, 1e-12));
        ++compared;
    }
    CHECK(compared > 50);
}

TEST_CASE("extract_candidates: fenced blocks in order") {
    CHECK(extract_candidates("no fences here").empty());
    const auto blocks = extract_candidates(
        "first:\n```\na = 1\n```\nsecond:\n```text\nb = 2\n```\ntail");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0] == "a = 1\n");
    CHECK(blocks[1] == "b = 2\n");
}

TEST_CASE("match_phase scores canonical states") {
    Observation obs;
    obs.foot_contacts = {1, 0, 0, 1};  // diagonal pair down
    const CompiledProgram trot = compile(parse("m = match_phase(foot_contacts, \"trot\")"));
    CHECK(evaluate(trot, obs).total == 1.0);
    const CompiledProgram pace = compile(parse("m = match_phase(foot_contacts, \"pace\")"));
    CHECK(evaluate(pace, obs).total < 1.0);
    obs.foot_contacts = {1, 1, 1, 1};
    const CompiledProgram hop = compile(parse("m = match_phase(foot_contacts, \"hop\")"));
    CHECK(evaluate(hop, obs).total == 1.0);
}
