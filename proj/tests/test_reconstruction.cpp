#include <gtest/gtest.h>

#include "ndscope/reconstruction.hpp"
#include "ndscope/reference.hpp"
#include "properties.hpp"

using namespace ndscope;
using namespace ndscope::testing;

TEST(ReferenceReconstruction, KandLRanks) {
  const auto rep = check_reconstructible(reference::nds());
  ASSERT_EQ(rep.per_subsystem.size(), 2u);
  for (const auto& r : rep.per_subsystem) {
    EXPECT_TRUE(r.K_fcr);
    EXPECT_EQ(r.K_rank, 2u);
    EXPECT_TRUE(r.L_frr);
    EXPECT_EQ(r.L_rank, 1u);
  }
  EXPECT_TRUE(rep.reconstructible);
}

TEST(ReferenceReconstruction, RankDeficientSubsystems) {
  auto s = reference::subsystem();
  s.B_xv = RatMat(2, 2);
  s.D_yv = RatMat(1, 2);
  auto rep = check_reconstructible(NdsDefinition{{reference::subsystem(), s}, TimeDomain::Continuous});
  EXPECT_TRUE(rep.per_subsystem[0].K_fcr);
  EXPECT_FALSE(rep.per_subsystem[1].K_fcr);
  EXPECT_FALSE(rep.reconstructible);

  auto t = reference::subsystem();
  t.C_zx = RatMat(1, 2);
  t.D_zu = RatMat(1, 1);
  rep = check_reconstructible(NdsDefinition{{t}, TimeDomain::Continuous});
  EXPECT_FALSE(rep.per_subsystem[0].L_frr);
  EXPECT_THROW(check_consistency(NdsDefinition{{t}, TimeDomain::Continuous}, lump(NdsDefinition{{t}, {}}, RatMat(2, 1))),
               NotReconstructible);
}

TEST(ReferenceReconstruction, LumpAtZeroIsBlockDiagonal) {
  const auto nds = reference::nds();
  const auto m = lump(nds, RatMat(4, 2));
  EXPECT_EQ(m.A, nds.block(&SubsystemRealization::A_xx));
  EXPECT_EQ(m.B, nds.block(&SubsystemRealization::B_xu));
  EXPECT_EQ(m.C, nds.block(&SubsystemRealization::C_yx));
  EXPECT_EQ(m.D, nds.block(&SubsystemRealization::D_yu));
  const auto rep = check_consistency(nds, m);
  EXPECT_TRUE(rep.consistent);
  EXPECT_TRUE(rep.H_m.is_zero());
  EXPECT_EQ(recover_scm(nds, m), RatMat(4, 2));
  EXPECT_EQ(lump_descriptor(nds, RatMat(4, 2)).A.block(4, 4, 2, 2), -RatMat::identity(2));
}

TEST(ReferenceReconstruction, LumpedModelsMatchTfm) {
  const auto nds = reference::nds();
  for (const auto& phi : {reference::phi_0(), reference::phi_u(), reference::phi_i()}) {
    const auto m = lump(nds, phi);
    EXPECT_EQ(m.E, RatMat::identity(4));
    EXPECT_EQ(lumped_tfm(m), nds_tfm(nds, phi));
    EXPECT_EQ(lumped_tfm(lump_descriptor(nds, phi)), nds_tfm(nds, phi));
  }
}

TEST(ReferenceReconstruction, RoundTripOnFixtures) {
  const auto nds = reference::nds();
  for (const auto& phi : {reference::phi_0(), reference::phi_u(), reference::phi_i()}) {
    EXPECT_EQ(recover_scm(nds, lump(nds, phi)), phi);
  }
  // Same TFM, different lumped models: the descriptor model tells Φ₀ and Φᵤ apart.
  EXPECT_NE(lump(nds, reference::phi_0()).A, lump(nds, reference::phi_u()).A);
}

TEST(ReferenceReconstruction, InvalidModels) {
  const auto nds = reference::nds();
  auto m = lump(nds, reference::phi_0());
  // A direction annihilated by L is invisible to the SCM.
  const RatMat l_perp = right_null_space(stacked_l(nds));
  RatMat bump(4, 4);
  for (std::size_t i = 0; i < 4; ++i) bump(0, i) = l_perp(i, 0);
  auto bad = m;
  bad.A = bad.A + bump;
  const auto rep = check_consistency(nds, bad);
  EXPECT_FALSE(rep.cond_right);
  EXPECT_FALSE(rep.consistent);
  EXPECT_THROW(recover_scm(nds, bad), Inconsistent);

  auto left = m;
  left.C(0, 0) += 1;  // outside the column span of K, whose output rows D_yv vanish
  EXPECT_FALSE(check_consistency(nds, left).cond_left);

  auto wrong_e = m;
  wrong_e.E(0, 0) = 2;
  EXPECT_THROW(check_consistency(nds, wrong_e), ShapeError);
  auto wrong_shape = m;
  wrong_shape.B = RatMat(4, 3);
  EXPECT_THROW(check_consistency(nds, wrong_shape), ShapeError);

  SCMatrix ill(4, 2);
  ill(1, 0) = -1;
  EXPECT_THROW(lump(nds, ill), NotWellPosed);
}

TEST(ReferenceReconstruction, SvdPathAgrees) {
  const auto nds = reference::nds();
  for (const auto& phi : {reference::phi_0(), reference::phi_u(), reference::phi_i()}) {
    const Eigen::MatrixXd got = recover_scm_svd(nds, lump(nds, phi));
    EXPECT_LT((got - to_eigen(phi)).norm(), 1e-10);
  }
}

// Property: exact round trip on random reconstructible networks.
TEST(ReconProperty, RoundTrip) {
  Gen g(9001);
  for (int t = 0; t < 100; ++t) {
    const auto nds = random_reconstructible(g, static_cast<std::size_t>(g.integer(1, 3)), 3);
    const auto phi = random_scm(g, nds);
    const auto m = lump(nds, phi);
    const auto rep = check_consistency(nds, m);
    EXPECT_TRUE(rep.consistent) << "instance " << t;
    EXPECT_TRUE(rep.residual.is_zero());
    EXPECT_EQ(recover_scm(nds, m), phi) << "instance " << t;
  }
}

TEST(ReconProperty, DescriptorEliminationReproducesLump) {
  Gen g(9002);
  for (int t = 0; t < 50; ++t) {
    const auto nds = random_reconstructible(g, static_cast<std::size_t>(g.integer(1, 3)), 2);
    const auto phi = random_scm(g, nds);
    const auto d = lump_descriptor(nds, phi);
    const auto m = lump(nds, phi);
    // Schur complement on the algebraic block z.
    const std::size_t nx = nds.m_x(), nz = nds.m_z();
    const RatMat a22_inv = inverse(d.A.block(nx, nx, nz, nz));
    const RatMat a12 = d.A.block(0, nx, nx, nz), a21 = d.A.block(nx, 0, nz, nx);
    const RatMat b2 = d.B.block(nx, 0, nz, d.B.cols()), c2 = d.C.block(0, nx, d.C.rows(), nz);
    EXPECT_EQ(d.A.block(0, 0, nx, nx) - a12 * a22_inv * a21, m.A);
    EXPECT_EQ(d.B.block(0, 0, nx, d.B.cols()) - a12 * a22_inv * b2, m.B);
    EXPECT_EQ(d.C.block(0, 0, d.C.rows(), nx) - c2 * a22_inv * a21, m.C);
    EXPECT_EQ(d.D - c2 * a22_inv * b2, m.D);
  }
}

TEST(ReconProperty, SvdPathAgreesOnRandomInstances) {
  Gen g(9003);
  for (int t = 0; t < 50; ++t) {
    const auto nds = random_reconstructible(g, static_cast<std::size_t>(g.integer(1, 3)), 3);
    const auto phi = random_scm(g, nds);
    const auto m = lump(nds, phi);
    const Eigen::MatrixXd exact = to_eigen(recover_scm(nds, m));
    EXPECT_LT((recover_scm_svd(nds, m) - exact).norm(), 1e-8 * (1 + exact.norm())) << "instance " << t;
  }
}

// Property: with D_zv = 0, Φ = H_m is affine in a consistent model perturbation K·Δ·L.
TEST(ReconProperty, RecoveryIsAffineWithoutFeedthrough) {
  Gen g(9004);
  for (int t = 0; t < 30; ++t) {
    auto nds = random_reconstructible(g, static_cast<std::size_t>(g.integer(1, 2)), 2);
    for (auto& s : nds.subsystems) s.D_zv = RatMat(s.m_z(), s.m_v());
    const auto phi = random_scm(g, nds);
    const RatMat delta = g.rat_mat(nds.m_v(), nds.m_z(), 0.3);
    auto m = lump(nds, phi);
    const RatMat step = stacked_k(nds) * delta * stacked_l(nds);
    const std::size_t nx = nds.m_x();
    m.A = m.A + step.block(0, 0, nx, nx);
    m.B = m.B + step.block(0, nx, nx, nds.m_u());
    m.C = m.C + step.block(nx, 0, nds.m_y(), nx);
    m.D = m.D + step.block(nx, nx, nds.m_y(), nds.m_u());
    EXPECT_EQ(recover_scm(nds, m), phi + delta);
  }
}

// Property: SCMs differing in a null direction of K give the same lumped model.
TEST(ReconProperty, RankDeficientKIsAmbiguous) {
  Gen g(9005);
  for (int t = 0; t < 20; ++t) {
    auto nds = random_nds(g, 2, 2, kShapeA3);
    auto& s = nds.subsystems[0];
    for (std::size_t i = 0; i < s.B_xv.rows(); ++i) s.B_xv(i, 1) = 2 * s.B_xv(i, 0);
    for (std::size_t i = 0; i < s.D_yv.rows(); ++i) s.D_yv(i, 1) = 2 * s.D_yv(i, 0);
    for (auto& sub : nds.subsystems) sub.D_zv = RatMat(sub.m_z(), sub.m_v());
    ASSERT_FALSE(check_reconstructible(nds).reconstructible);
    const RatMat n = right_null_space(stacked_k(nds));
    ASSERT_GE(n.cols(), 1u);
    const auto phi = random_scm(g, nds);
    SCMatrix other = phi;
    for (std::size_t i = 0; i < other.rows(); ++i) other(i, 0) += n(i, 0);
    EXPECT_NE(phi, other);
    const auto a = lump(nds, phi), b = lump(nds, other);
    EXPECT_EQ(system_matrix(a), system_matrix(b));
  }
}
