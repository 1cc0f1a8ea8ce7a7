#include <chrono>

#include <gtest/gtest.h>

#include "ndscope/identifiability.hpp"
#include "ndscope/reference.hpp"
#include "properties.hpp"

using namespace ndscope;
using namespace ndscope::testing;

namespace {

RatMat column(std::initializer_list<long> v) {
  RatMat m(v.size(), 1);
  std::size_t i = 0;
  for (long x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST(ReferenceIdentifiability, NotIdentifiableAtBaseScm) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = check_identifiable_at(reference::nds(), reference::phi_0());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(rep.tag.kind, Case::A3);
  EXPECT_EQ(rep.verdict, Verdict::NotIdentifiable);
  EXPECT_FALSE(rep.row_oriented);
  ASSERT_TRUE(rep.stacked);
  EXPECT_LT(rank(rep.stacked->matrix), 4u);
  EXPECT_EQ(rep.null_basis, column({0, 0, 1, -2}));
  EXPECT_LT(secs, 10.0);
}

TEST(ReferenceIdentifiability, RegionMembership) {
  const auto nds = reference::nds();
  const auto rep = check_identifiable_at(nds, reference::phi_0());
  const auto region = undiff_region(rep, reference::phi_0());
  EXPECT_EQ(region.dimension(), 1u);
  EXPECT_TRUE(region.contains(reference::phi_0()));
  EXPECT_TRUE(region.contains(reference::phi_u()));
  EXPECT_FALSE(region.contains(reference::phi_i()));
  EXPECT_THROW(region.contains(RatMat(2, 2)), ShapeError);
  const auto check = verify_region_by_tfm(nds, reference::phi_0(), region, 5, 5, 11);
  EXPECT_TRUE(check.ok);
  EXPECT_EQ(check.outside.size(), 5u);
}

TEST(ReferenceIdentifiability, TfmOracle) {
  const auto nds = reference::nds();
  const auto h0 = nds_tfm(nds, reference::phi_0());
  EXPECT_TRUE(tfm_equal(h0, nds_tfm(nds, reference::phi_u())));
  EXPECT_FALSE(tfm_equal(h0, nds_tfm(nds, reference::phi_i())));
}

TEST(ReferenceIdentifiability, IdentifiableAtOtherScm) {
  const auto rep = check_identifiable_at(reference::nds(), reference::phi_i());
  EXPECT_EQ(rep.verdict, Verdict::Identifiable);
  EXPECT_EQ(rep.null_basis.cols(), 0u);
  EXPECT_THROW(undiff_region(rep, reference::phi_i()), RegionIsTrivial);
}

TEST(ReferenceIdentifiability, PencilCaseGuards) {
  const auto nds = reference::nds();
  EXPECT_THROW(build_xy_pencil(nds), WrongCase);
  const auto pen = build_xy_pencil_hat(nds);
  EXPECT_EQ(pen.X.rows(), 4u);
  EXPECT_EQ(pen.X.cols(), 2u);
  EXPECT_EQ(pen.Y.rows(), 2u);
  EXPECT_THROW(check_identifiable_at(nds, RatMat(2, 2)), DimensionError);
}

TEST(ReferenceIdentifiability, KnownEntries) {
  const auto nds = reference::nds();
  const auto empty = check_identifiable_known_entries(nds, reference::phi_0(), {});
  EXPECT_EQ(empty.verdict, Verdict::NotIdentifiable);
  ASSERT_EQ(empty.columns.size(), 2u);
  EXPECT_EQ(empty.columns[0].null_basis, column({0, 0, 1, -2}));

  // Knowing entry (3, 1) removes the ambiguity in column 1 only.
  KnownEntries one{{0}, {{0, {2}}}};
  const auto r1 = check_identifiable_known_entries(nds, reference::phi_0(), one);
  EXPECT_TRUE(r1.columns[0].fcr);
  EXPECT_FALSE(r1.columns[1].fcr);
  EXPECT_EQ(r1.verdict, Verdict::NotIdentifiable);

  KnownEntries both{{0, 1}, {{0, {3}}, {1, {2}}}};
  EXPECT_EQ(check_identifiable_known_entries(nds, reference::phi_0(), both).verdict, Verdict::Identifiable);

  KnownEntries all{{0, 1}, {{0, {0, 1, 2, 3}}, {1, {0, 1, 2, 3}}}};
  EXPECT_EQ(check_identifiable_known_entries(nds, reference::phi_0(), all).verdict, Verdict::Identifiable);

  KnownEntries bad{{0}, {{0, {7}}}};
  EXPECT_THROW(check_identifiable_known_entries(nds, reference::phi_0(), bad), IndexError);
}

TEST(ReferenceIdentifiability, AffineParameterization) {
  const auto nds = reference::nds();
  AffineParam along{reference::phi_0(), {reference::phi_u() - reference::phi_0()}, {Rat(0)}};
  EXPECT_EQ(check_identifiable_parameterized(nds, along, along.theta).verdict, Verdict::NotIdentifiable);
  AffineParam across{reference::phi_0(), {unit(4, 2, 0, 1)}, {Rat(0)}};
  EXPECT_EQ(check_identifiable_parameterized(nds, across, across.theta).verdict, Verdict::Identifiable);
  AffineParam none{reference::phi_0(), {}, {}};
  EXPECT_EQ(check_identifiable_parameterized(nds, none, {}).verdict, Verdict::Identifiable);
  AffineParam full{reference::phi_0(), unit_basis(4, 2), std::vector<Rat>(8, Rat(0))};
  const auto rf = check_identifiable_parameterized(nds, full, full.theta);
  EXPECT_EQ(rf.verdict, Verdict::NotIdentifiable);
  EXPECT_EQ(rf.theta_basis.cols(), 2u);
}

TEST(ReferenceIdentifiability, AugmentedPencil) {
  const auto nds = reference::nds();
  const auto rep = check_identifiable_augmented(nds, reference::phi_0(), std::nullopt, 5);
  EXPECT_EQ(rep.verdict, Verdict::NotIdentifiable);
  EXPECT_EQ(rep.null_basis, column({0, 0, 1, -2}));
  EXPECT_THROW(check_identifiable_augmented(nds, reference::phi_0(), std::vector<Rat>{Rat(1), Rat(0)}, 0),
               ZeroDiagonal);
  EXPECT_THROW(check_identifiable_augmented(nds, reference::phi_0(), std::vector<Rat>{Rat(1)}, 0), ShapeError);
  for (const auto& d : random_p_diag(50, 3)) {
    EXPECT_GE(abs(d), 1);
    EXPECT_LE(abs(d), 10);
  }
}

TEST(ReferenceIdentifiability, DualOfReferenceIsDualCase) {
  const auto dual = transpose_nds(reference::nds());
  const auto rep = check_identifiable_at(dual, reference::phi_0().transpose());
  EXPECT_EQ(rep.tag.kind, Case::DualA3);
  EXPECT_TRUE(rep.row_oriented);
  EXPECT_EQ(rep.verdict, Verdict::NotIdentifiable);
  EXPECT_EQ(rep.null_basis, column({0, 0, 1, -2}));
  const auto region = undiff_region(rep, reference::phi_0().transpose());
  EXPECT_TRUE(region.contains(reference::phi_u().transpose()));
  EXPECT_FALSE(region.contains(reference::phi_i().transpose()));
  EXPECT_TRUE(verify_region_by_tfm(dual, reference::phi_0().transpose(), region, 4, 4, 2).ok);
}

TEST(Classification, ShapesLandInExpectedCases) {
  Gen g(8001);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(classify_case(random_nds(g, 2, 2, kShapeA2)).kind, Case::A2);
    EXPECT_EQ(classify_case(random_nds(g, 2, 2, kShapeA3)).kind, Case::A3);
    EXPECT_EQ(classify_case(random_nds(g, 2, 2, kShapeDual)).kind, Case::DualA3);
    EXPECT_EQ(classify_case(random_nds(g, 2, 2, kShapeBothFull)).kind, Case::BothFull);
  }
}

TEST(Classification, BothFullShortCircuits) {
  Gen g(8002);
  for (int t = 0; t < 10; ++t) {
    const auto nds = random_nds(g, 2, 2, kShapeBothFull);
    const auto phi = random_scm(g, nds);
    const auto rep = check_identifiable_at(nds, phi);
    EXPECT_EQ(rep.verdict, Verdict::IdentifiableByBothFull);
    EXPECT_FALSE(rep.stacked);
    EXPECT_TRUE(verify_region_by_tfm(nds, phi, std::nullopt, 0, 3, t).ok);
  }
}

// Property: every member of a reported region keeps the TFM and random non-members change it.
TEST(IdentProperty, RegionSoundnessA3) {
  Gen g(8101);
  int nontrivial = 0;
  for (int t = 0; t < 50; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 3)), 2, kShapeA3);
    const auto phi = random_scm(g, nds);
    const auto rep = check_identifiable_at(nds, phi);
    ASSERT_EQ(rep.tag.kind, Case::A3);
    std::optional<UndiffRegion> region;
    if (rep.verdict == Verdict::NotIdentifiable) {
      region = undiff_region(rep, phi);
      ++nontrivial;
    }
    EXPECT_TRUE(verify_region_by_tfm(nds, phi, region, 2, 2, 100 + t).ok) << "instance " << t;
  }
  EXPECT_GT(nontrivial, 10);
}

TEST(IdentProperty, RegionSoundnessDual) {
  Gen g(8102);
  for (int t = 0; t < 50; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 3)), 2, kShapeDual);
    const auto phi = random_scm(g, nds);
    const auto rep = check_identifiable_at(nds, phi);
    ASSERT_EQ(rep.tag.kind, Case::DualA3);
    std::optional<UndiffRegion> region;
    if (rep.verdict == Verdict::NotIdentifiable) region = undiff_region(rep, phi);
    EXPECT_TRUE(verify_region_by_tfm(nds, phi, region, 2, 2, 200 + t).ok) << "instance " << t;
    // The same answer from the transposed network in the primal orientation.
    const auto primal = check_identifiable_at(transpose_nds(nds), phi.transpose());
    EXPECT_EQ(primal.tag.kind, Case::A3);
    EXPECT_EQ(primal.verdict, rep.verdict);
    EXPECT_EQ(primal.null_basis, rep.null_basis);
  }
}

// Property: rescaling the MFD and the proper split by unimodular factors leaves the answer unchanged.
TEST(IdentProperty, MfdChoiceInvariance) {
  Gen g(8103);
  for (int t = 0; t < 50; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 2)), 2, t % 5 == 0 ? kShapeA2 : kShapeA3);
    const auto phi = random_scm(g, nds);
    const auto base = check_identifiable_at(nds, phi);
    const auto pert = random_perturbation(g, nds, base.tag);
    const auto other = check_identifiable_at(nds, phi, &pert);
    EXPECT_EQ(other.verdict, base.verdict) << "instance " << t;
    EXPECT_EQ(other.null_basis, base.null_basis) << "instance " << t;
  }
}

TEST(IdentProperty, ConstrainedVariantsAgreeOnA2) {
  Gen g(8104);
  for (int t = 0; t < 20; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 3)), 2, kShapeA2);
    const auto phi = random_scm(g, nds);
    const auto base = check_identifiable_at(nds, phi);
    ASSERT_EQ(base.tag.kind, Case::A2);
    EXPECT_EQ(check_identifiable_known_entries(nds, phi, {}).verdict, base.verdict);
    AffineParam full{phi, unit_basis(nds.m_v(), nds.m_z()), std::vector<Rat>(nds.m_v() * nds.m_z(), Rat(0))};
    EXPECT_EQ(check_identifiable_parameterized(nds, full, full.theta).verdict, base.verdict);
    EXPECT_EQ(check_identifiable_augmented(nds, phi, std::nullopt, 300 + t).verdict, base.verdict);
  }
}

TEST(IdentProperty, ConstrainedVariantsAgreeOnA3) {
  Gen g(8105);
  for (int t = 0; t < 30; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 3)), 2, kShapeA3);
    const auto phi = random_scm(g, nds);
    const auto base = check_identifiable_at(nds, phi);
    const auto ke = check_identifiable_known_entries(nds, phi, {});
    EXPECT_EQ(ke.verdict, base.verdict);
    for (const auto& c : ke.columns) EXPECT_EQ(c.null_basis, base.null_basis);
    AffineParam full{phi, unit_basis(nds.m_v(), nds.m_z()), std::vector<Rat>(nds.m_v() * nds.m_z(), Rat(0))};
    const auto aff = check_identifiable_parameterized(nds, full, full.theta);
    EXPECT_EQ(aff.verdict, base.verdict);
    EXPECT_EQ(aff.theta_basis.cols(), base.null_basis.cols() * nds.m_z());
    const auto aug = check_identifiable_augmented(nds, phi, std::nullopt, 400 + t);
    EXPECT_EQ(aug.verdict, base.verdict);
    EXPECT_EQ(aug.null_basis, base.null_basis);
  }
}

// Property: a null vector of a column-deleted test moves Φ without changing the TFM.
TEST(IdentProperty, KnownEntryNullVectorsKeepTfm) {
  Gen g(8106);
  for (int t = 0; t < 30; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 3)), 2, kShapeA3);
    const auto phi = random_scm(g, nds);
    KnownEntries ke;
    for (std::size_t j = 0; j < nds.m_z(); ++j) {
      if (!g.coin()) continue;
      ke.J.push_back(j);
      ke.I[j].push_back(static_cast<std::size_t>(g.integer(0, static_cast<long>(nds.m_v()) - 1)));
    }
    const auto rep = check_identifiable_known_entries(nds, phi, ke);
    const auto h0 = nds_tfm(nds, phi);
    for (const auto& c : rep.columns) {
      if (c.fcr) continue;
      SCMatrix moved = phi;
      for (std::size_t i = 0; i < moved.rows(); ++i) moved(i, c.index) += c.null_basis(i, 0);
      if (!check_nds_regular(nds, moved)) continue;
      EXPECT_TRUE(tfm_equal(nds_tfm(nds, moved), h0)) << "instance " << t;
      for (std::size_t i : ke.I[c.index]) EXPECT_EQ(c.null_basis(i, 0), 0);
    }
  }
}

TEST(IdentProperty, AffineNullDirectionsKeepTfm) {
  Gen g(8107);
  for (int t = 0; t < 30; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 2)), 2, kShapeA3);
    const auto phi = random_scm(g, nds);
    AffineParam ap{phi, {}, {}};
    for (int k = 0; k < 3; ++k) {
      ap.directions.push_back(g.rat_mat(nds.m_v(), nds.m_z(), 0.6));
      ap.theta.push_back(Rat(0));
    }
    const auto rep = check_identifiable_parameterized(nds, ap, ap.theta);
    const auto h0 = nds_tfm(nds, phi);
    for (std::size_t c = 0; c < rep.theta_basis.cols(); ++c) {
      std::vector<Rat> th;
      for (std::size_t k = 0; k < rep.theta_basis.rows(); ++k) th.push_back(rep.theta_basis(k, c));
      const SCMatrix moved = ap.at(th);
      if (!check_nds_regular(nds, moved)) continue;
      EXPECT_TRUE(tfm_equal(nds_tfm(nds, moved), h0)) << "instance " << t;
    }
  }
}

TEST(IdentProperty, A2PerturbationsChangeTfm) {
  Gen g(8108);
  for (int t = 0; t < 20; ++t) {
    const auto nds = random_nds(g, static_cast<std::size_t>(g.integer(1, 3)), 2, kShapeA2);
    const auto phi = random_scm(g, nds);
    EXPECT_EQ(check_identifiable_at(nds, phi).verdict, Verdict::Identifiable);
    EXPECT_TRUE(verify_region_by_tfm(nds, phi, std::nullopt, 0, 3, 500 + t).ok) << "instance " << t;
  }
}
