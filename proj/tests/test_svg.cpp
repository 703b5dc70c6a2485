// Plot rendering is pure string assembly; the cases that matter are the
// guards: empty plots, ragged inputs, and log axes fed zeros or a single
// value (a linear pad there would cross zero and break the decade ticks).
#include <catch2/catch_amalgamated.hpp>

#include "snls/svg.hpp"

using namespace snls;

TEST_CASE("rendering requires data") {
    SvgPlot p("t", "x", "y");
    REQUIRE_THROWS_AS(p.render(), Error);
    SvgPlot q("t", "x", "y");
    q.add_line("nan only", {1.0}, {std::nan("")});
    REQUIRE_THROWS_AS(q.render(), Error);
}

TEST_CASE("ragged inputs are rejected") {
    SvgPlot p("t", "x", "y");
    REQUIRE_THROWS_AS(p.add_line("bad", {1.0, 2.0}, {1.0}), Error);
    REQUIRE_THROWS_AS(p.add_histogram("bad", {0.0, 1.0}, {}), Error);
    REQUIRE_THROWS_AS(p.add_histogram("bad", {0.0, 1.0}, {1.0, 2.0}), Error);
}

TEST_CASE("basic line plot carries labels, legend, and comment") {
    SvgPlot p("Growth", "time", "norm");
    p.set_comment("run deadbeef");
    p.add_line("measured", {0.0, 1.0, 2.0}, {1.0, 2.0, 1.5});
    p.add_line("envelope", {0.0, 1.0, 2.0}, {2.0, 3.0, 3.5}, true);
    auto s = p.render();
    REQUIRE(s.find("<svg") == 0);
    REQUIRE(s.find("run deadbeef") != std::string::npos);
    REQUIRE(s.find("Growth") != std::string::npos);
    REQUIRE(s.find("measured") != std::string::npos);
    REQUIRE(s.find("stroke-dasharray") != std::string::npos);
    REQUIRE(s.find("polyline") != std::string::npos);
}

TEST_CASE("log axes survive zeros and spans of many decades") {
    // zero probabilities are dropped from the range; the pad must stay
    // positive so the decade ticks terminate
    SvgPlot p("Small ball", "delta", "prob");
    p.set_log_x(true);
    p.set_log_y(true);
    p.add_line("probs", {0.01, 0.1, 1.0}, {0.0, 0.005, 1.0});
    auto s = p.render();
    REQUIRE(s.find("polyline") != std::string::npos);

    SvgPlot q("Wide", "x", "y");
    q.set_log_y(true);
    q.add_line("v", {1.0, 2.0}, {1e-30, 1e30});
    REQUIRE(q.render().find("polyline") != std::string::npos);
}

TEST_CASE("degenerate ranges render") {
    SvgPlot p("Flat", "x", "y");
    p.add_line("const", {0.0, 1.0}, {3.0, 3.0});
    REQUIRE(p.render().find("polyline") != std::string::npos);

    SvgPlot q("Point", "x", "y");
    q.set_log_x(true);
    q.set_log_y(true);
    q.add_line("one", {2.0}, {5.0});
    REQUIRE(q.render().find("<svg") == 0);
}

TEST_CASE("histograms draw bars and markup is escaped") {
    SvgPlot p("Mass law", "mass", "density");
    p.add_histogram("<raw & masses>", {0.0, 0.5, 1.0, 1.5}, {0.2, 0.6, 0.2});
    auto s = p.render();
    REQUIRE(s.find("<rect") != std::string::npos);
    REQUIRE(s.find("&lt;raw &amp; masses&gt;") != std::string::npos);
    REQUIRE(s.find("<raw") == std::string::npos);
}
