#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "xattn_oracle.hpp"
#include "xda/error.hpp"
#include "xda/gradcheck.hpp"
#include "xda/ops.hpp"
#include "xda/xattn.hpp"

using namespace xda;
using test_util::max_abs_diff;
using test_util::random_tensor;

namespace {

SamParams identity_sam_1ch() {
    SamParams p;
    p.w_q = Tensor::from({1, 1, 1, 1}, {1.0});
    p.w_k = Tensor::from({1, 1, 1, 1}, {1.0});
    p.w_v = Tensor::from({1, 1, 1, 1}, {1.0});
    return p;
}

void check_rows_sum_to_one(const Tensor& m, double tol) {
    for (int i = 0; i < m.dim(0); ++i) {
        double s = 0.0;
        for (int j = 0; j < m.dim(1); ++j) {
            CHECK(m.at(i, j) > 0.0);
            CHECK(m.at(i, j) <= 1.0);
            s += m.at(i, j);
        }
        CHECK(std::abs(s - 1.0) < tol);
    }
}

void check_cols_sum_to_one(const Tensor& m, double tol) {
    for (int j = 0; j < m.dim(1); ++j) {
        double s = 0.0;
        for (int i = 0; i < m.dim(0); ++i) {
            CHECK(m.at(i, j) > 0.0);
            CHECK(m.at(i, j) <= 1.0);
            s += m.at(i, j);
        }
        CHECK(std::abs(s - 1.0) < tol);
    }
}

}  // namespace

TEST_CASE("spatial_energy examples") {
    std::mt19937_64 rng(1);

    SUBCASE("zero projections give zero energy") {
        SamParams p;
        p.w_q = Tensor::zeros({2, 3, 1, 1});
        p.w_k = Tensor::zeros({2, 3, 1, 1});
        p.w_v = Tensor::zeros({3, 3, 1, 1});
        const Tensor a = random_tensor({3, 2, 2}, rng);
        const Tensor b = random_tensor({3, 2, 2}, rng);
        const auto r = spatial_energy(a, b, p);
        for (std::size_t i = 0; i < r.energy.phi.size(); ++i) CHECK(r.energy.phi[i] == 0.0);
    }

    SUBCASE("identity projections reproduce the outer product") {
        const Tensor a_s = Tensor::from({1, 1, 2}, {1, 2});
        const Tensor a_t = Tensor::from({1, 1, 2}, {3, 4});
        const auto r = spatial_energy(a_s, a_t, identity_sam_1ch());
        CHECK(r.energy.phi.shape() == Shape{2, 2});
        CHECK(r.energy.phi.at(0, 0) == doctest::Approx(3));
        CHECK(r.energy.phi.at(0, 1) == doctest::Approx(4));
        CHECK(r.energy.phi.at(1, 0) == doctest::Approx(6));
        CHECK(r.energy.phi.at(1, 1) == doctest::Approx(8));
    }

    SUBCASE("each entry is the dot product of a query and key column") {
        SamParams p = SamParams::init(4, 2, rng);
        const Tensor a_s = random_tensor({4, 2, 3}, rng);
        const Tensor a_t = random_tensor({4, 2, 3}, rng);
        const auto r = spatial_energy(a_s, a_t, p);
        const Tensor q = reshape(conv2d(a_s, p.w_q, Tensor{}, 1, 0), {2, 6});
        const Tensor k = reshape(conv2d(a_t, p.w_k, Tensor{}, 1, 0), {2, 6});
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                double dot = 0.0;
                for (int r2 = 0; r2 < 2; ++r2) dot += q.at(r2, i) * k.at(r2, j);
                CHECK(r.energy.phi.at(i, j) == doctest::Approx(dot).epsilon(1e-12));
            }
    }

    SUBCASE("shape mismatch raises") {
        SamParams p = SamParams::init(3, 1, rng);
        CHECK_THROWS_AS(spatial_energy(Tensor::zeros({3, 2, 2}), Tensor::zeros({3, 2, 3}), p),
                        DimensionError);
    }
}

TEST_CASE("spatial attention normalization directions") {
    SUBCASE("zero energy gives uniform attention") {
        const SpatialEnergy zero{Tensor::zeros({2, 2})};
        const Tensor fwd = spatial_forward_attention(zero);
        const Tensor bwd = spatial_backward_attention(zero);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(fwd[i] == doctest::Approx(0.5));
            CHECK(bwd[i] == doctest::Approx(0.5));
        }
    }

    SUBCASE("single target position gives a column of ones") {
        const SpatialEnergy e{Tensor::from({3, 1}, {0.3, -2.0, 5.0})};
        const Tensor fwd = spatial_forward_attention(e);
        for (int i = 0; i < 3; ++i) CHECK(fwd.at(i, 0) == 1.0);
    }

    SUBCASE("single source position gives a row of ones") {
        const SpatialEnergy e{Tensor::from({1, 3}, {0.3, -2.0, 5.0})};
        const Tensor bwd = spatial_backward_attention(e);
        for (int j = 0; j < 3; ++j) CHECK(bwd.at(0, j) == 1.0);
    }

    SUBCASE("direct evaluation on log-ratio rows and columns") {
        const SpatialEnergy row{Tensor::from({1, 2}, {std::log(2.0), 0.0})};
        const Tensor fwd = spatial_forward_attention(row);
        CHECK(fwd.at(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(fwd.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

        const SpatialEnergy col{Tensor::from({2, 1}, {0.0, std::log(3.0)})};
        const Tensor bwd = spatial_backward_attention(col);
        CHECK(bwd.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(bwd.at(1, 0) == doctest::Approx(0.75).epsilon(1e-12));
    }

    SUBCASE("rows of forward / columns of backward sum to one") {
        std::mt19937_64 rng(5);
        const SpatialEnergy e{random_tensor({7, 7}, rng, 3.0)};
        check_rows_sum_to_one(spatial_forward_attention(e), 1e-10);
        check_cols_sum_to_one(spatial_backward_attention(e), 1e-10);
    }

    SUBCASE("adding a constant to the energy changes nothing") {
        std::mt19937_64 rng(6);
        const Tensor phi = random_tensor({5, 5}, rng, 2.0);
        const SpatialEnergy e{phi};
        const SpatialEnergy shifted{add(phi, Tensor::full(phi.shape(), 17.25))};
        CHECK(max_abs_diff(spatial_forward_attention(e), spatial_forward_attention(shifted)) < 1e-10);
        CHECK(max_abs_diff(spatial_backward_attention(e), spatial_backward_attention(shifted)) < 1e-10);
    }
}

TEST_CASE("cd_sam examples") {
    std::mt19937_64 rng(9);

    SUBCASE("zero coefficients are the exact identity") {
        SamParams p = SamParams::init(3, 1, rng);
        p.lambda_s = 0.0;
        p.lambda_t = 0.0;
        const SpatialPair pair{random_tensor({3, 2, 2}, rng), random_tensor({3, 2, 2}, rng)};
        const SpatialPair out = cd_sam(pair, p);
        CHECK(test_util::bit_identical(out.a_s, pair.a_s));
        CHECK(test_util::bit_identical(out.a_t, pair.a_t));
    }

    SUBCASE("single position reduces to a value residual") {
        SamParams p = identity_sam_1ch();
        p.lambda_s = 0.7;
        const SpatialPair pair{Tensor::from({1, 1, 1}, {2.0}), Tensor::from({1, 1, 1}, {5.0})};
        const SpatialPair out = cd_sam(pair, p);
        CHECK(out.a_s.item() == doctest::Approx(2.0 + 0.7 * 5.0));
    }

    SUBCASE("matches the scalar-loop oracle") {
        for (int trial = 0; trial < 10; ++trial) {
            SamParams p = SamParams::init(2, 2, rng);
            p.lambda_s = 0.8;
            p.lambda_t = 1.3;
            const SpatialPair pair{random_tensor({2, 2, 2}, rng), random_tensor({2, 2, 2}, rng)};
            const SpatialPair out = cd_sam(pair, p);
            const auto oracle = xattn_oracle::cd_sam_oracle(pair, p);
            CHECK(max_abs_diff(out.a_s, oracle.a_s) < 1e-10);
            CHECK(max_abs_diff(out.a_t, oracle.a_t) < 1e-10);
        }
    }

    SUBCASE("residual is bounded by the value features") {
        SamParams p = SamParams::init(4, 2, rng);
        p.lambda_s = 2.5;
        const SpatialPair pair{random_tensor({4, 3, 3}, rng), random_tensor({4, 3, 3}, rng)};
        const auto e = spatial_energy(pair.a_s, pair.a_t, p);
        double v_inf = 0.0;
        for (std::size_t i = 0; i < e.v_t.size(); ++i) v_inf = std::max(v_inf, std::abs(e.v_t[i]));
        const SpatialPair out = cd_sam(pair, p);
        const Tensor residual = sub(out.a_s, pair.a_s);
        for (std::size_t i = 0; i < residual.size(); ++i) {
            CHECK(std::abs(residual[i]) <= p.lambda_s * v_inf + 1e-12);
        }
    }

    SUBCASE("output shapes equal input shapes") {
        SamParams p = SamParams::init(5, 2, rng);
        const SpatialPair pair{random_tensor({5, 3, 2}, rng), random_tensor({5, 3, 2}, rng)};
        const SpatialPair out = cd_sam(pair, p);
        CHECK(out.a_s.shape() == pair.a_s.shape());
        CHECK(out.a_t.shape() == pair.a_t.shape());
    }
}

TEST_CASE("channel_energy examples") {
    std::mt19937_64 rng(15);

    SUBCASE("zero source features give zero energy") {
        const ChannelEnergy e = channel_energy(Tensor::zeros({3, 2, 2}), random_tensor({3, 2, 2}, rng));
        for (std::size_t i = 0; i < e.theta.size(); ++i) CHECK(e.theta[i] == 0.0);
    }

    SUBCASE("orthonormal channel rows give the identity") {
        // two channels over four positions, orthonormal as rows
        const Tensor b = Tensor::from({2, 2, 2}, {1, 0, 0, 0, 0, 1, 0, 0});
        const ChannelEnergy e = channel_energy(b, b);
        CHECK(e.theta.at(0, 0) == doctest::Approx(1.0));
        CHECK(e.theta.at(1, 1) == doctest::Approx(1.0));
        CHECK(e.theta.at(0, 1) == doctest::Approx(0.0));
        CHECK(e.theta.at(1, 0) == doctest::Approx(0.0));
    }

    SUBCASE("entries are per-channel dot products") {
        const Tensor b_s = random_tensor({2, 1, 2}, rng);
        const Tensor b_t = random_tensor({2, 1, 2}, rng);
        const ChannelEnergy e = channel_energy(b_s, b_t);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double dot = 0.0;
                for (int n = 0; n < 2; ++n) dot += b_s[static_cast<std::size_t>(i) * 2 + n] *
                                                   b_t[static_cast<std::size_t>(j) * 2 + n];
                CHECK(e.theta.at(i, j) == doctest::Approx(dot).epsilon(1e-12));
            }
    }
}

TEST_CASE("channel attention normalization directions") {
    SUBCASE("zero energy gives uniform attention") {
        const ChannelEnergy zero{Tensor::zeros({4, 4})};
        const Tensor fwd = channel_forward_attention(zero);
        const Tensor bwd = channel_backward_attention(zero);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(fwd[i] == doctest::Approx(0.25));
            CHECK(bwd[i] == doctest::Approx(0.25));
        }
    }

    SUBCASE("single channel is trivially one") {
        const ChannelEnergy e{Tensor::from({1, 1}, {3.7})};
        CHECK(channel_forward_attention(e).item() == 1.0);
        CHECK(channel_backward_attention(e).item() == 1.0);
    }

    SUBCASE("direct evaluation") {
        const ChannelEnergy row{Tensor::from({1, 3}, {0.0, std::log(4.0), 0.0})};
        const Tensor fwd = channel_forward_attention(row);
        CHECK(fwd.at(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(fwd.at(0, 1) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
        CHECK(fwd.at(0, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

        const ChannelEnergy col{Tensor::from({2, 1}, {std::log(2.0), std::log(2.0)})};
        const Tensor bwd = channel_backward_attention(col);
        CHECK(bwd.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(bwd.at(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("stochasticity on random energies") {
        std::mt19937_64 rng(21);
        const ChannelEnergy e{random_tensor({6, 6}, rng, 2.0)};
        check_rows_sum_to_one(channel_forward_attention(e), 1e-10);
        check_cols_sum_to_one(channel_backward_attention(e), 1e-10);
    }
}

TEST_CASE("cd_cam examples") {
    std::mt19937_64 rng(27);

    SUBCASE("zero coefficients are the exact identity") {
        const CamParams p{0.0, 0.0};
        const ChannelPair pair{random_tensor({3, 2, 2}, rng), random_tensor({3, 2, 2}, rng)};
        const ChannelPair out = cd_cam(pair, p);
        CHECK(test_util::bit_identical(out.b_s, pair.b_s));
        CHECK(test_util::bit_identical(out.b_t, pair.b_t));
    }

    SUBCASE("single channel adds the opposite feature") {
        CamParams p;
        p.xi_s = 0.4;
        p.xi_t = 0.0;
        const ChannelPair pair{Tensor::from({1, 1, 2}, {1.0, 2.0}), Tensor::from({1, 1, 2}, {3.0, 5.0})};
        const ChannelPair out = cd_cam(pair, p);
        CHECK(out.b_s.at(0, 0, 0) == doctest::Approx(1.0 + 0.4 * 3.0));
        CHECK(out.b_s.at(0, 0, 1) == doctest::Approx(2.0 + 0.4 * 5.0));
    }

    SUBCASE("matches the scalar-loop oracle") {
        for (int trial = 0; trial < 10; ++trial) {
            CamParams p;
            p.xi_s = 0.9;
            p.xi_t = 1.1;
            const ChannelPair pair{random_tensor({3, 2, 2}, rng), random_tensor({3, 2, 2}, rng)};
            const ChannelPair out = cd_cam(pair, p);
            const auto oracle = xattn_oracle::cd_cam_oracle(pair, p);
            CHECK(max_abs_diff(out.b_s, oracle.b_s) < 1e-10);
            CHECK(max_abs_diff(out.b_t, oracle.b_t) < 1e-10);
        }
    }
}

TEST_CASE("cross-attention is differentiable end to end") {
    std::mt19937_64 rng(33);
    SamParams p = SamParams::init(2, 1, rng);
    p.lambda_s = 0.9;
    p.lambda_t = 1.2;
    const Tensor a_s = random_tensor({2, 2, 2}, rng, 0.5);
    const Tensor a_t = random_tensor({2, 2, 2}, rng, 0.5);

    const double sam_err = finite_diff_check(
        [&p](const std::vector<Tensor>& in) {
            SamParams q = p;
            q.w_q = in[0];
            q.w_k = in[1];
            q.w_v = in[2];
            const SpatialPair out = cd_sam({in[3], in[4]}, q);
            return sum(add(out.a_s, out.a_t));
        },
        {p.w_q, p.w_k, p.w_v, a_s, a_t}, 1e-5);
    CHECK(sam_err <= 1e-4);

    const double cam_err = finite_diff_check(
        [](const std::vector<Tensor>& in) {
            const ChannelPair out = cd_cam({in[0], in[1]}, CamParams{0.8, 1.1});
            return sum(add(out.b_s, out.b_t));
        },
        {random_tensor({2, 2, 2}, rng, 0.5), random_tensor({2, 2, 2}, rng, 0.5)}, 1e-5);
    CHECK(cam_err <= 1e-4);
}

TEST_CASE("small-shape oracle sweep") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        for (int c = 1; c <= 3; ++c)
            for (int h = 1; h <= 3; ++h)
                for (int w = 1; w <= 3; ++w) {
                    SamParams p = SamParams::init(c, 1 + static_cast<int>(seed % c), rng);
                    const SpatialPair sp{random_tensor({c, h, w}, rng), random_tensor({c, h, w}, rng)};
                    const auto sam = cd_sam(sp, p);
                    const auto sam_oracle = xattn_oracle::cd_sam_oracle(sp, p);
                    CHECK(max_abs_diff(sam.a_s, sam_oracle.a_s) < 1e-10);
                    CHECK(max_abs_diff(sam.a_t, sam_oracle.a_t) < 1e-10);

                    const ChannelPair cp{random_tensor({c, h, w}, rng), random_tensor({c, h, w}, rng)};
                    const auto cam = cd_cam(cp, CamParams{1.0, 1.0});
                    const auto cam_oracle = xattn_oracle::cd_cam_oracle(cp, CamParams{1.0, 1.0});
                    CHECK(max_abs_diff(cam.b_s, cam_oracle.b_s) < 1e-10);
                    CHECK(max_abs_diff(cam.b_t, cam_oracle.b_t) < 1e-10);
                }
    }
}
