#include <catch2/catch_amalgamated.hpp>

#include "rydsim/config.hpp"
#include "rydsim/liouville.hpp"
#include "rydsim/params.hpp"
#include "support/oracles.hpp"

using namespace rydsim;
using Catch::Approx;

namespace {
LaserDrive paper_drive(double omega_c = 4.0) {
  LaserDrive d;
  d.omega_p_mhz = 400.0;
  d.omega_c_mhz = omega_c;
  d.delta_p_mhz = 1250.0;
  d.delta_c_mhz = 0.0;
  return d;
}
}  // namespace

TEST_CASE("dressed frame: zero probe") {
  LaserDrive d = paper_drive();
  d.omega_p_mhz = 0.0;
  const DressedFrame f = build_dressed_frame(d, AtomSystem{});
  REQUIRE(f.delta_split_mhz == Approx(1250.0));
  REQUIRE(f.pop_g1 == 0.0);
  REQUIRE(f.omega_2_mhz == 0.0);
}

TEST_CASE("dressed frame: splitting tracks the exact two-level eigensplitting") {
  const LaserDrive d = paper_drive();
  const DressedFrame f = build_dressed_frame(d, AtomSystem{});
  REQUIRE(f.delta_split_mhz == Approx(1314.0).margin(1e-12));
  const double exact = std::sqrt(1250.0 * 1250.0 + 400.0 * 400.0);
  REQUIRE(exact == Approx(1312.44).margin(0.01));
  REQUIRE(std::abs(f.delta_split_mhz - exact) < 2.0);  // O(omega^4/delta^3)
}

TEST_CASE("dressed frame: scaled coupling and decay rates") {
  AtomSystem atom;  // gamma_re = 0.01, gamma_rg = 0.1
  const DressedFrame f = build_dressed_frame(paper_drive(4.0), atom);
  REQUIRE(f.omega_1_mhz == Approx(4.0));
  REQUIRE(f.omega_2_mhz == Approx(0.64).margin(1e-12));
  const double eps = 400.0 / (2.0 * 1250.0);
  REQUIRE(f.gamma_1_mhz == Approx(atom.gamma_re_mhz + eps * atom.gamma_rg_mhz));
  REQUIRE(f.gamma_2_mhz == Approx(atom.gamma_rg_mhz + eps * atom.gamma_re_mhz));
  REQUIRE(f.pop_g2 == 1.0);
}

TEST_CASE("dressed frame: pop_g1 against the diagonalized two-level steady state") {
  const LaserDrive d = paper_drive();
  const AtomSystem atom;
  const DressedFrame f = build_dressed_frame(d, atom);
  REQUIRE(f.pop_g1 == Approx(6.5536e-4).margin(1e-8));

  // oracle: solve the driven two-level atom exactly, then read the population
  // of the e-like dressed eigenvector
  CMatrix h = CMatrix::Zero(2, 2);
  h(1, 1) = -d.delta_p_mhz;
  h(0, 1) = h(1, 0) = -d.omega_p_mhz / 2.0;
  const auto rho = solve_steady_state(
      build_liouvillian(h, {LindbladChannel::decay(2, 1, 0, atom.gamma_eg_mhz)}));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  int upper = std::abs(es.eigenvectors()(1, 0)) > std::abs(es.eigenvectors()(0, 0)) ? 0 : 1;
  const CVector psi = es.eigenvectors().col(upper);
  const double pop = (psi.adjoint() * rho.entries() * psi)(0, 0).real();
  REQUIRE(std::abs(f.pop_g1 - pop) / pop < 0.15);
}

TEST_CASE("dressed frame: singular and monotone behavior") {
  LaserDrive d = paper_drive();
  d.delta_p_mhz = 0.0;
  REQUIRE_THROWS_AS(build_dressed_frame(d, AtomSystem{}), std::invalid_argument);

  // pop_g1 < pop_g2 and monotone in |omega_p/delta_p|
  double prev = -1.0;
  for (double op : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    LaserDrive dd = paper_drive();
    dd.omega_p_mhz = op;
    const DressedFrame f = build_dressed_frame(dd, AtomSystem{});
    REQUIRE(f.pop_g1 < f.pop_g2);
    REQUIRE(f.pop_g1 > prev);
    prev = f.pop_g1;
  }
}

TEST_CASE("velocity shifts: frozen values and additivity") {
  const LaserDrive d = paper_drive();
  REQUIRE(d.delta_k() > 0.0);

  const LaserDrive same = velocity_shifted_drive(d, 0.0);
  REQUIRE(same.delta_p_mhz == d.delta_p_mhz);
  REQUIRE(same.delta_c_mhz == d.delta_c_mhz);

  const LaserDrive s = velocity_shifted_drive(d, 100.0);
  REQUIRE(s.delta_p_mhz - d.delta_p_mhz == Approx(-128.2051282).margin(1e-6));
  REQUIRE(s.delta_c_mhz - d.delta_c_mhz == Approx(+208.3333333).margin(1e-6));

  // shift additivity
  const LaserDrive a = velocity_shifted_drive(d, 137.5);
  const LaserDrive b = velocity_shifted_drive(velocity_shifted_drive(d, 100.0), 37.5);
  REQUIRE(a.delta_p_mhz == Approx(b.delta_p_mhz).margin(1e-12));
  REQUIRE(a.delta_c_mhz == Approx(b.delta_c_mhz).margin(1e-12));
}

TEST_CASE("validation: hard errors and warnings") {
  LaserDrive d = paper_drive();
  d.lambda_c_nm = 900.0;  // not counter-propagating ladder
  REQUIRE_THROWS_AS(d.validate(), std::invalid_argument);

  LaserDrive strong = paper_drive();
  strong.omega_p_mhz = 2000.0;
  REQUIRE_FALSE(strong.validate().empty());

  AtomSystem atom;
  atom.gamma_rg_mhz = -1.0;
  REQUIRE_THROWS_AS(atom.validate(), std::invalid_argument);

  VaporParams vapor;
  REQUIRE(vapor.v_p() == Approx(most_probable_speed(400.0, vapor.mass_kg)));
  vapor.density_cm3 = 0.0;
  REQUIRE_THROWS_AS(vapor.validate(), std::invalid_argument);
}

TEST_CASE("config loader: round trip and missing-key errors") {
  SimulationParams p;
  p.laser = paper_drive(5.0);
  const json j = to_json(p);
  const SimulationParams q = params_from_json(j);
  REQUIRE(q.laser.omega_c_mhz == 5.0);
  REQUIRE(q.vapor.mass_kg == p.atom.mass_kg);

  json broken = j;
  broken["laser"].erase("omega_p_mhz");
  try {
    params_from_json(broken);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("laser.omega_p_mhz") != std::string::npos);
  }

  json nosec = j;
  nosec.erase("vapor");
  REQUIRE_THROWS_AS(params_from_json(nosec), ConfigError);
}
