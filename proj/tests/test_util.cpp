#include <catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <set>

#include "persum/util/digest.hpp"
#include "persum/util/io.hpp"
#include "persum/util/parallel.hpp"
#include "persum/util/random.hpp"
#include "persum/util/utf8.hpp"

using namespace persum;

TEST_CASE("derived seeds are stable and distinct") {
    STATIC_REQUIRE(derive_seed(7, 0) == derive_seed(7, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("seeded shuffle is a reproducible permutation") {
    std::vector<int> a(50), b;
    for (int i = 0; i < 50; ++i) a[i] = i;
    b = a;
    auto r1 = make_rng(9), r2 = make_rng(9);
    seeded_shuffle(a, r1);
    seeded_shuffle(b, r2);
    CHECK(a == b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("sample_without_replacement draws distinct indices") {
    auto rng = make_rng(3);
    auto s = sample_without_replacement(10, 4, rng);
    REQUIRE(s.size() == 4);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 4);
    for (auto i : s) CHECK(i < 10);
    CHECK(sample_without_replacement(3, 9, rng).size() == 3);
}

TEST_CASE("uniform_index covers its range") {
    auto rng = make_rng(1);
    std::vector<int> hits(5, 0);
    for (int i = 0; i < 5000; ++i) ++hits[uniform_index(rng, 5)];
    for (int h : hits) CHECK(h > 800);
}

TEST_CASE("sha256 known vectors and field framing") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Sha256Builder{}.add("ab").add("c").hex() != Sha256Builder{}.add("a").add("bc").hex());
}

TEST_CASE("utf8 round trip and code point substrings") {
    std::string s = "caf\xC3\xA9 \xE2\x82\xAC \xF0\x9F\x98\x80!";
    auto cps = utf8::decode(s);
    CHECK(cps.size() == 9);
    CHECK(utf8::encode(cps) == s);
    CHECK(utf8::length(s) == 9);
    CHECK(utf8::substr(s, 3, 4) == "\xC3\xA9");
    CHECK_THROWS_AS(utf8::substr(s, 5, 20), IntegrityError);
    CHECK_THROWS_AS(utf8::decode("\xC3"), ParseError);
    CHECK_THROWS_AS(utf8::decode("\xFF"), ParseError);
}

TEST_CASE("atomic writes and JSON helpers") {
    auto dir = std::filesystem::temp_directory_path() / "persum_test_util";
    std::filesystem::remove_all(dir);
    auto path = dir / "nested" / "out.jsonl";
    write_file_atomic(path, to_jsonl({Json{{"a", 1}}, Json{{"b", "x"}}}));
    auto rows = read_jsonl(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["a"] == 1);
    CHECK(require<std::string>(rows[1], "b", "row") == "x");
    CHECK_THROWS_AS(require<int>(rows[1], "missing", "row"), ParseError);
    CHECK(optional_field<int>(rows[1], "missing", 5) == 5);
    for (const auto& e : std::filesystem::directory_iterator(dir / "nested"))
        CHECK(e.path().filename() == "out.jsonl");
    CHECK_THROWS_AS(parse_json("{", "bad"), ParseError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for fills every slot and rethrows the lowest-index error") {
    std::vector<int> out(100, 0);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
    CHECK_THROWS_WITH(parallel_for(10, 1,
                                   [](std::size_t i) {
                                       if (i == 3 || i == 7) throw ParameterError("bad " + std::to_string(i));
                                   }),
                      "bad 3");
}
