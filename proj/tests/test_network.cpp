#include "doctest.h"

#include <random>
#include <set>

#include "eet/errors.hpp"
#include "eet/network.hpp"

using namespace eet;
using namespace eet::network;

namespace {

bool symmetric(const NetworkSpec& s) {
  return (s.hopping - s.hopping.transpose()).cwiseAbs().maxCoeff() == 0.0 && s.hopping.diagonal().isZero(0.0);
}

}  // namespace

TEST_CASE("complete networks") {
  const auto fcn6 = complete_network(6, 0, 5);
  CHECK(fcn6.edge_count() == 15);
  CHECK(fcn6.injection_site == 0);
  CHECK(fcn6.sink_site == 5);
  for (double w : fcn6.site_energies) CHECK(w == 1.0);
  for (auto [a, b] : fcn6.edges()) CHECK(fcn6.hopping(a, b) == 1.0);

  const auto two = complete_network(2, 0, 1);
  CHECK(two.edge_count() == 1);
  CHECK(two.hopping(0, 1) == 1.0);
  CHECK(complete_network(7, 0, 6).edge_count() == 21);

  CHECK_THROWS_AS(complete_network(6, 0, 6), InvalidArgument);
  CHECK_THROWS_AS(complete_network(6, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(complete_network(1, 0, 0), InvalidArgument);
}

TEST_CASE("delete_edge and set_hopping") {
  const auto fcn6 = complete_network(6, 0, 5);
  const auto cut = delete_edge(fcn6, 0, 5);
  CHECK(cut.hopping(0, 5) == 0.0);
  CHECK(cut.hopping(5, 0) == 0.0);
  CHECK(cut.edge_count() == 14);
  CHECK(fcn6.hopping(0, 5) == 1.0);  // input untouched
  CHECK(delete_edge(cut, 0, 5) == cut);

  const auto cut23 = delete_edge(fcn6, 1, 2);
  CHECK(cut23.hopping(1, 2) == 0.0);
  CHECK(cut23.edge_count() == 14);

  const auto half = set_hopping(fcn6, 0, 5, 0.5);
  CHECK(half.hopping(0, 5) == 0.5);
  CHECK(half.hopping(5, 0) == 0.5);
  CHECK(set_hopping(fcn6, 0, 5, 1.0) == fcn6);
  CHECK(set_hopping(fcn6, 0, 5, 3.04).hopping(5, 0) == 3.04);

  // delete then restore
  CHECK(set_hopping(delete_edge(fcn6, 2, 4), 2, 4, 1.0) == fcn6);

  CHECK_THROWS_AS(delete_edge(fcn6, 3, 3), InvalidArgument);
  CHECK_THROWS_AS(delete_edge(fcn6, 0, 6), InvalidArgument);
  CHECK_THROWS_AS(set_hopping(fcn6, 9, 1, 1.0), InvalidArgument);
}

TEST_CASE("hopping stays symmetric under random operation sequences") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> node(0, 6);
  std::uniform_real_distribution<double> weight(0.0, 3.0);
  auto spec = complete_network(7, 0, 6);
  for (int step = 0; step < 500; ++step) {
    std::size_t a = node(rng), b = node(rng);
    if (a == b) continue;
    switch (step % 3) {
      case 0: spec = delete_edge(spec, a, b); break;
      case 1: spec = set_hopping(spec, a, b, weight(rng)); break;
      default: spec = apply_disorder(spec, {0.3, static_cast<std::uint64_t>(step), 4}, step % 4); break;
    }
    REQUIRE(symmetric(spec));
    REQUIRE(violations(spec).empty());
  }
}

TEST_CASE("apply_disorder contract") {
  const auto fcn6 = complete_network(6, 0, 5);
  CHECK(apply_disorder(fcn6, {0.0, 42, 10}, 3) == fcn6);

  const DisorderConfig cfg{0.3, 1234, 50};
  std::set<double> seen;
  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    const auto d = apply_disorder(fcn6, cfg, r);
    CHECK(symmetric(d));
    for (auto [a, b] : fcn6.edges()) {
      CHECK(d.hopping(a, b) >= 0.7);
      CHECK(d.hopping(a, b) <= 1.3);
      seen.insert(d.hopping(a, b));
    }
    CHECK(d.site_energies == fcn6.site_energies);
    CHECK(apply_disorder(fcn6, cfg, r) == d);
  }
  CHECK(seen.size() > 700);  // distinct draws per pair and realization

  // Deleted edges stay deleted; order of realization evaluation is irrelevant.
  const auto cut = delete_edge(fcn6, 0, 5);
  const auto d7 = apply_disorder(cut, cfg, 7);
  CHECK(d7.hopping(0, 5) == 0.0);
  CHECK(d7.hopping(1, 2) == apply_disorder(fcn6, cfg, 7).hopping(1, 2));

  // Negative base couplings keep their sign.
  const auto neg = set_hopping(fcn6, 1, 3, -2.0);
  for (std::size_t r = 0; r < 20; ++r) CHECK(apply_disorder(neg, {0.9, 5, 20}, r).hopping(1, 3) < 0.0);

  CHECK_THROWS_AS(apply_disorder(fcn6, {0.1, 1, 3}, 3), InvalidArgument);
  CHECK_THROWS_AS(apply_disorder(fcn6, {-0.1, 1, 3}, 0), InvalidArgument);
}

TEST_CASE("keyed_uniform is stateless and roughly uniform") {
  CHECK(keyed_uniform(1, 2, 3, 4) == keyed_uniform(1, 2, 3, 4));
  CHECK(keyed_uniform(1, 2, 3, 4) != keyed_uniform(1, 2, 4, 3));
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = keyed_uniform(9, static_cast<std::uint64_t>(i), 0, 1);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("enumerate_topologies") {
  SUBCASE("only the complete graph has all edges") {
    const auto out = enumerate_topologies({6, 0, 5, {15}, 0, 1});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == complete_network(6, 0, 5));
  }
  SUBCASE("three-node paths") {
    // All three labeled 2-edge graphs on 3 nodes are paths; with injection
    // and sink labels fixed, none are equivalent to each other.
    const auto out = enumerate_topologies({3, 0, 2, {2}, 0, 1});
    CHECK(out.size() == 3);
    std::set<std::vector<std::pair<std::size_t, std::size_t>>> edge_sets;
    for (const auto& g : out) {
      CHECK(is_connected(g));
      CHECK(g.edge_count() == 2);
      edge_sets.insert(g.edges());
    }
    CHECK(edge_sets.size() == 3);
  }
  SUBCASE("connectivity filter below the tree threshold") {
    CHECK(enumerate_topologies({4, 0, 3, {2}, 0, 1}).empty());
  }
  SUBCASE("per-count sampling is deterministic and seed dependent") {
    const TopologyQuery q{6, 0, 5, {6, 7, 8, 9}, 3, 99};
    const auto a = enumerate_topologies(q);
    const auto b = enumerate_topologies(q);
    CHECK(a.size() == 12);
    CHECK(a == b);
    auto q2 = q;
    q2.seed = 100;
    CHECK(enumerate_topologies(q2) != a);
    for (const auto& g : a) CHECK(is_connected(g));
  }
  SUBCASE("larger networks are sampled") {
    const auto out = enumerate_topologies({7, 0, 6, {8, 12}, 2, 5});
    CHECK(out.size() == 4);
    for (const auto& g : out) CHECK(is_connected(g));
    CHECK_THROWS_AS(enumerate_topologies({7, 0, 6, {8}, 0, 5}), InvalidArgument);
  }
  CHECK_THROWS_AS(enumerate_topologies({6, 0, 5, {16}, 0, 1}), InvalidArgument);
}

TEST_CASE("network documents use 1-based labels") {
  const auto spec = set_hopping(delete_edge(complete_network(4, 0, 3), 0, 3), 1, 2, 0.25);
  const auto doc = to_json(spec);
  CHECK(doc.at("injection_site") == 1);
  CHECK(doc.at("sink_site") == 4);
  CHECK(doc.at("edges").size() == 5);
  CHECK(doc.at("edges")[0] == nlohmann::json::array({1, 2, 1.0}));
  CHECK(from_json(doc) == spec);

  auto bad = doc;
  bad["edges"].push_back({2, 9, 1.0});
  CHECK_THROWS_AS(from_json(bad), InvalidArgument);
  bad = doc;
  bad["sink_site"] = 1;
  CHECK_THROWS_AS(from_json(bad), InvalidArgument);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"n_sites", 3}}), InvalidArgument);
}

TEST_CASE("describe labels") {
  const auto fcn6 = complete_network(6, 0, 5);
  CHECK(describe(fcn6) == "fcn6");
  CHECK(describe(delete_edge(fcn6, 0, 5)) == "fcn6-del(1,6)");
}
