#include <doctest.h>

#include <cmath>

#include "navgraph/rng.hpp"
#include "navgraph/types.hpp"

using namespace navgraph;

namespace {
DataMatrix make_data(std::initializer_list<std::initializer_list<double>> rows) {
  DataMatrix d;
  const auto r = rows.size();
  const auto c = rows.begin()->size();
  d.values = Matrix(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) d.values(i, j++) = v;
    ++i;
  }
  return d;
}
}  // namespace

TEST_CASE("centring subtracts the column mean") {
  const DataMatrix d = make_data({{1, -1, 5}, {2, 1, 5}, {3, 0, 5}});
  const DataMatrix c = center_columns(d);
  CHECK(c.values(0, 0) == doctest::Approx(-1.0));
  CHECK(c.values(1, 0) == doctest::Approx(0.0));
  CHECK(c.values(2, 0) == doctest::Approx(1.0));
  // already-centred column unchanged
  CHECK(c.values.col(1).isApprox(d.values.col(1)));
  // constant column becomes zero
  CHECK(c.values.col(2).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("centring is idempotent and leaves means at zero") {
  Rng rng(11);
  DataMatrix d;
  d.values = Matrix(37, 9);
  for (Eigen::Index i = 0; i < 37; ++i) {
    for (Eigen::Index j = 0; j < 9; ++j) {
      d.values(i, j) = rng.normal(3.0, 2.5);
    }
  }
  const DataMatrix once = center_columns(d);
  const DataMatrix twice = center_columns(once);
  CHECK(once.values.isApprox(twice.values));
  for (Eigen::Index j = 0; j < 9; ++j) {
    CHECK(std::fabs(once.values.col(j).mean()) < 1e-10);
  }
}

TEST_CASE("centring rejects non-finite input") {
  DataMatrix d = make_data({{1, 2}, {3, 4}});
  d.values(0, 1) = std::nan("");
  CHECK_THROWS(center_columns(d));
}

TEST_CASE("validation catches dimension mismatch") {
  DataMatrix d;
  d.values = Matrix::Random(10, 100);
  AuxiliaryMatrix aux;
  aux.values = Matrix::Random(99, 3);
  const auto rep = validate_inputs(d, aux, ModelConfig{});
  CHECK(!rep.ok());
  bool found = false;
  for (const auto& i : rep.issues) {
    found = found || i.message.find("does not match") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("validation catches inverted spike/slab ordering") {
  DataMatrix d;
  d.values = Matrix::Random(10, 5);
  ModelConfig cfg;
  cfg.nu0 = 0.5;
  cfg.nu1 = 0.1;
  const auto rep = validate_inputs(d, AuxiliaryMatrix{}, cfg);
  CHECK(!rep.ok());
}

TEST_CASE("Q = 0 with a hierarchical variant is a warning, not an error") {
  DataMatrix d;
  d.values = Matrix::Random(10, 5);
  ModelConfig cfg;
  cfg.variant = ModelVariant::GMSS;
  const auto rep = validate_inputs(d, AuxiliaryMatrix{}, cfg);
  CHECK(rep.ok());
  CHECK(rep.n_warnings() >= 1);
  bool found = false;
  for (const auto& i : rep.issues) {
    found = found || i.message.find("GM*") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("validation never aborts mid-scan") {
  DataMatrix d;  // empty: multiple errors at once
  AuxiliaryMatrix aux;
  aux.values = Matrix::Random(3, 2);
  ModelConfig cfg;
  cfg.nu0 = -1.0;
  cfg.t0_sq = 0.0;
  const auto rep = validate_inputs(d, aux, cfg);
  CHECK(rep.n_errors() >= 3);
}

TEST_CASE("state validation accepts a valid state and flags breakage") {
  VariationalState s;
  const int p = 4;
  s.omega = Matrix::Identity(p, p);
  s.delta1 = Matrix::Constant(p, p, 0.3);
  s.delta1.diagonal().setZero();
  s.alpha_hat = Matrix::Zero(p, p);
  s.z1 = Matrix::Zero(p, p);
  s.z2 = Matrix::Ones(p, p);
  s.beta_mean = Vector::Zero(2);
  s.beta_var = Vector::Ones(2);
  s.gamma1 = Vector::Constant(2, 0.5);
  CHECK(validate_state(s).ok());

  SUBCASE("broken z identity is caught") {
    s.z2(0, 1) = s.z2(1, 0) = 5.0;
    CHECK(!validate_state(s).ok());
  }
  SUBCASE("non-PD omega is caught") {
    s.omega(0, 1) = s.omega(1, 0) = 2.0;
    CHECK(!validate_state(s).ok());
  }
  SUBCASE("PPI outside [0,1] is caught") {
    s.delta1(0, 1) = s.delta1(1, 0) = 1.4;
    CHECK(!validate_state(s).ok());
  }
}
