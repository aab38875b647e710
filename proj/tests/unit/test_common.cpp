#include "varmcs/common/csv.hpp"
#include "varmcs/common/format.hpp"
#include "varmcs/common/hash.hpp"
#include "varmcs/common/parallel.hpp"
#include "varmcs/common/random.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <stdexcept>

using namespace varmcs;

TEST_CASE("format_double round-trips and is locale free", "[common]") {
    for (double v : {0.0, -1.5, 1e-300, 3.141592653589793, 123456789.125}) {
        const auto text = format_double(v);
        REQUIRE(parse_double(text).value() == v);
    }
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK_FALSE(parse_double("1,5").has_value());
    CHECK_FALSE(parse_double("").has_value());
    CHECK(parse_double(" +2.5\r").value() == 2.5);
}

TEST_CASE("CSV records split with quotes", "[common]") {
    const auto f = split_csv_line("a, \"b,c\" ,\"d\"\"e\",\r");
    REQUIRE(f.size() == 4);
    CHECK(f[0] == "a");
    CHECK(f[1] == "b,c");
    CHECK(f[2] == "d\"e");
    CHECK(f[3].empty());
    CHECK(csv_field("x,y") == "\"x,y\"");
    CHECK(csv_field("plain") == "plain");
}

TEST_CASE("fnv1a64 matches published vectors", "[common]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(to_hex(0xabcull) == "0000000000000abc");
}

TEST_CASE("uniform_below stays in range and is reproducible", "[common]") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) {
        const auto x = uniform_below(a, 7);
        REQUIRE(x < 7);
        REQUIRE(x == uniform_below(b, 7));
    }
    Rng c(1);
    CHECK(uniform_below(c, 1) == 0);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
}

TEST_CASE("parallel_for visits every index once and rethrows", "[common]") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) REQUIRE(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 5) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
