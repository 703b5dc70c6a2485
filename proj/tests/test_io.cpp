// Binary artifacts: header token round trips, legacy files without one stay
// readable, and corrupt headers are refused rather than read as coefficients.
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "snls/field.hpp"
#include "snls/io.hpp"
#include "snls/rng.hpp"

using namespace snls;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

SpectralField sample_field(int N, std::uint64_t seed) {
    RngStream rng(seed, 0);
    auto basis = build_basis(1, N);
    return random_field(basis, 2.0, rng, 1.0, 2.0);
}

}  // namespace

TEST_CASE("field files round trip with and without a run token") {
    auto u = sample_field(6, 11);
    FieldHeader h{1, 6, 7.0, 2.0, 0.1};

    auto tagged = tmp_path("snls_io_field_tag.snls1");
    save_field(tagged, u, h, "00ff00ff00ff00ff");
    FieldHeader hb;
    std::string rid;
    auto v = load_field(tagged, &hb, &rid);
    REQUIRE(rid == "00ff00ff00ff00ff");
    REQUIRE(hb.N == 6);
    REQUIRE(l2_norm(v - u) == 0.0);

    auto plain = tmp_path("snls_io_field_plain.snls1");
    save_field(plain, u, h);
    rid = "sentinel";
    auto w = load_field(plain, nullptr, &rid);
    REQUIRE(rid.empty());
    REQUIRE(l2_norm(w - u) == 0.0);
}

TEST_CASE("packs preserve weights, order, and the run token") {
    FieldHeader h{1, 4, 7.0, 2.0, 0.1};
    std::vector<SpectralField> snaps = {sample_field(4, 1), sample_field(4, 2),
                                        sample_field(4, 3)};
    std::vector<double> weights = {0.5, 0.25, 0.25};
    auto path = tmp_path("snls_io_pack.snlsp");
    save_pack(path, snaps, weights, h, "abcdef0123456789");

    std::vector<SpectralField> back;
    std::vector<double> wback;
    std::string rid;
    FieldHeader hb;
    load_pack(path, back, wback, &hb, &rid);
    REQUIRE(rid == "abcdef0123456789");
    REQUIRE(back.size() == 3);
    REQUIRE(wback == weights);
    for (std::size_t i = 0; i < back.size(); ++i) REQUIRE(l2_norm(back[i] - snaps[i]) == 0.0);

    SECTION("writes are byte-stable") {
        auto again = tmp_path("snls_io_pack2.snlsp");
        save_pack(again, snaps, weights, h, "abcdef0123456789");
        REQUIRE(file_digest(again) == file_digest(path));
    }
    SECTION("weight count mismatch is refused") {
        REQUIRE_THROWS_AS(save_pack(path, snaps, {1.0}, h), Error);
    }
}

TEST_CASE("foreign bytes are not a pack") {
    auto path = tmp_path("snls_io_junk.bin");
    save_text(path, "SNLSX 9 9 garbage\n");
    std::vector<SpectralField> snaps;
    std::vector<double> weights;
    REQUIRE_THROWS_AS(load_pack(path, snaps, weights), Error);
    REQUIRE_THROWS_AS(load_field(path), Error);
}

TEST_CASE("json dump escapes and nests") {
    Json j = Json::object();
    j.set("name", "a\"b\\c\n<tag>");
    j.set("count", std::size_t{3});
    j.set("ok", true);
    Json arr = Json::array();
    arr.push(Json::num(1.5));
    arr.push(Json::str("x"));
    j.set("items", std::move(arr));
    auto text = j.dump();
    REQUIRE(text.find("\\\"b\\\\c\\n") != std::string::npos);
    REQUIRE(text.find("\"count\": 3") != std::string::npos);
    REQUIRE(text.find("\n  \"name\"") != std::string::npos);
    REQUIRE(text.find("\"items\": [") != std::string::npos);
    REQUIRE(text.find("1.5") != std::string::npos);
}
