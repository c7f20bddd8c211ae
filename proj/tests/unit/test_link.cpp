#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "auvlab/link.hpp"
#include "auvlab/rng.hpp"

using namespace auvlab;
using Catch::Approx;

TEST_CASE("simple link quality endpoints and midpoint") {
  LinkParams p;
  REQUIRE(link_quality(0.0, p) == 1.0);
  REQUIRE(link_quality(p.comm_radius, p) == 0.0);
  REQUIRE(link_quality(2.0 * p.comm_radius, p) == 0.0);
  REQUIRE(link_quality(p.comm_radius / 2.0, p) == Approx(0.5));
}

TEST_CASE("extended link quality factors multiply") {
  LinkParams p;
  p.attenuation = 1.0;
  p.packet_loss = 0.5;
  p.staleness_tau = 20.0;
  // Each factor is engineered to equal one half.
  const double d = std::log(2.0);
  const double age = p.staleness_tau * std::log(2.0);
  const double want =
      std::exp(-1.0 * d) * (1.0 - 0.5) * std::exp(-age / 20.0);
  REQUIRE(want == Approx(0.125));
  REQUIRE(link_quality_extended(d, age, p) == Approx(want));

  REQUIRE(link_quality_extended(0.0, 0.0, p) == Approx(0.5));
  p.packet_loss = 0.0;
  p.attenuation = 0.0;
  REQUIRE(link_quality_extended(0.3, 0.0, p) == 1.0);
}

TEST_CASE("quality is nonincreasing in distance in both modes") {
  LinkParams simple;
  LinkParams ext;
  ext.mode = LinkMode::kExtended;
  ext.attenuation = 0.7;
  ext.packet_loss = 0.2;
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    double d1 = rng.uniform(0.0, 1.2);
    double d2 = rng.uniform(0.0, 1.2);
    if (d1 > d2) std::swap(d1, d2);
    REQUIRE(link_quality(d1, simple) >= link_quality(d2, simple));
    REQUIRE(link_quality_extended(d1, 3.0, ext) >=
            link_quality_extended(d2, 3.0, ext));
    REQUIRE(link_quality(d1, simple) >= 0.0);
    REQUIRE(link_quality(d1, simple) <= 1.0);
  }
}

TEST_CASE("comm graph matches a brute-force pairwise computation") {
  LinkParams p;
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Eigen::Vector3d> pos;
    for (int i = 0; i < 4; ++i) {
      pos.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                     rng.uniform(-1.0, 1.0)});
    }
    const Eigen::MatrixXd ages = Eigen::MatrixXd::Zero(4, 4);
    const CommGraph g = build_comm_graph(pos, ages, p);

    for (int i = 0; i < 4; ++i) {
      REQUIRE(g.quality(i, i) == 0.0);
      for (int j = 0; j < 4; ++j) {
        const double want =
            i == j ? 0.0 : link_quality((pos[i] - pos[j]).norm(), p);
        REQUIRE(g.quality(i, j) == Approx(want).margin(1e-15));
        REQUIRE(g.quality(i, j) == g.quality(j, i));
      }
    }
    for (const auto& e : g.edges) {
      REQUIRE(e.i < e.j);
      REQUIRE(e.quality > 0.0);
    }
  }
}

TEST_CASE("isolated layouts produce empty edge sets") {
  LinkParams p;
  const Eigen::MatrixXd ages1 = Eigen::MatrixXd::Zero(1, 1);
  const CommGraph solo = build_comm_graph({{0, 0, 0}}, ages1, p);
  REQUIRE(solo.edges.empty());
  REQUIRE(solo.mean_quality() == 0.0);

  const Eigen::MatrixXd ages2 = Eigen::MatrixXd::Zero(2, 2);
  const CommGraph far =
      build_comm_graph({{0, 0, 0}, {0.9, 0, 0}}, ages2, p);
  REQUIRE(far.edges.empty());
  REQUIRE(far.neighbors(0).empty());
}

TEST_CASE("mean edge quality averages over present edges only") {
  LinkParams p;  // comm_radius 0.45
  // Two tight pairs far apart: qualities 0.8 and 0.2, no cross links.
  const double d_hi = p.comm_radius * (1.0 - 0.8);
  const double d_lo = p.comm_radius * (1.0 - 0.2);
  const std::vector<Eigen::Vector3d> pos = {
      {0, 0, 0}, {d_hi, 0, 0}, {5, 0, 0}, {5 + d_lo, 0, 0}};
  const CommGraph g =
      build_comm_graph(pos, Eigen::MatrixXd::Zero(4, 4), p);
  REQUIRE(g.edges.size() == 2);
  REQUIRE(g.mean_quality() == Approx(0.5));
}

TEST_CASE("message age degrades extended quality through the graph") {
  LinkParams p;
  p.mode = LinkMode::kExtended;
  p.staleness_tau = 20.0;
  Eigen::MatrixXd ages = Eigen::MatrixXd::Zero(2, 2);
  ages(0, 1) = ages(1, 0) = 20.0;
  const std::vector<Eigen::Vector3d> pos = {{0, 0, 0}, {0.1, 0, 0}};
  const CommGraph fresh =
      build_comm_graph(pos, Eigen::MatrixXd::Zero(2, 2), p);
  const CommGraph stale = build_comm_graph(pos, ages, p);
  REQUIRE(stale.quality(0, 1) ==
          Approx(fresh.quality(0, 1) * std::exp(-1.0)));
}
