#include "xda/xattn.hpp"

#include <cmath>

#include "xda/error.hpp"
#include "xda/init.hpp"
#include "xda/ops.hpp"

namespace xda {

namespace {

void check_pair(const char* op, const Tensor& s, const Tensor& t) {
    if (s.rank() != 3 || t.rank() != 3) {
        throw DimensionError(std::string(op) + ": features must be CxHxW, got " +
                             shape_str(s.shape()) + " and " + shape_str(t.shape()));
    }
    if (!s.same_shape(t)) {
        throw DimensionError(std::string(op) + ": source/target shape mismatch " +
                             shape_str(s.shape()) + " vs " + shape_str(t.shape()));
    }
}

}  // namespace

Tensor kaiming_uniform(Shape shape, int fan_in, double gain, std::mt19937_64& rng) {
    const double bound = gain * std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

SamParams SamParams::init(int c, int c_r, std::mt19937_64& rng, bool share_qk) {
    if (c_r < 1 || c_r > c) {
        throw ContractError("SamParams: reduced channels " + std::to_string(c_r) +
                            " must be in [1, " + std::to_string(c) + "]");
    }
    SamParams p;
    p.w_q = kaiming_uniform({c_r, c, 1, 1}, c, 1.0, rng);
    p.w_k = kaiming_uniform({c_r, c, 1, 1}, c, 1.0, rng);
    p.w_v = kaiming_uniform({c, c, 1, 1}, c, 1.0, rng);
    p.share_qk = share_qk;
    return p;
}

std::vector<Tensor*> SamParams::params() {
    if (share_qk) return {&w_q, &w_v};
    return {&w_q, &w_k, &w_v};
}

SpatialEnergyResult spatial_energy(const Tensor& a_s, const Tensor& a_t, const SamParams& p) {
    check_pair("spatial_energy", a_s, a_t);
    const int c = a_s.dim(0);
    const int n = a_s.dim(1) * a_s.dim(2);
    const int c_r = p.w_q.dim(0);

    const Tensor q = reshape(conv2d(a_s, p.w_q, Tensor{}, 1, 0), {c_r, n});
    const Tensor k = reshape(conv2d(a_t, p.share_qk ? p.w_q : p.w_k, Tensor{}, 1, 0), {c_r, n});

    SpatialEnergyResult r;
    r.energy.phi = matmul(transpose(q), k);
    r.v_s = reshape(conv2d(a_s, p.w_v, Tensor{}, 1, 0), {c, n});
    r.v_t = reshape(conv2d(a_t, p.w_v, Tensor{}, 1, 0), {c, n});
    return r;
}

Tensor spatial_forward_attention(const SpatialEnergy& energy) {
    return softmax(energy.phi, 1);
}

Tensor spatial_backward_attention(const SpatialEnergy& energy) {
    return softmax(energy.phi, 0);
}

SpatialPair cd_sam(const SpatialPair& pair, const SamParams& p) {
    check_pair("cd_sam", pair.a_s, pair.a_t);
    if (p.lambda_s == 0.0 && p.lambda_t == 0.0) return pair;

    const Shape feat = pair.a_s.shape();
    const SpatialEnergyResult e = spatial_energy(pair.a_s, pair.a_t, p);

    SpatialPair out = pair;
    if (p.lambda_s != 0.0) {
        const Tensor gamma_st = spatial_forward_attention(e.energy);
        const Tensor ctx = matmul(e.v_t, transpose(gamma_st));  // C x N
        out.a_s = add(pair.a_s, scale(reshape(ctx, feat), p.lambda_s));
    }
    if (p.lambda_t != 0.0) {
        const Tensor gamma_ts = spatial_backward_attention(e.energy);
        const Tensor ctx = matmul(e.v_s, gamma_ts);  // C x N
        out.a_t = add(pair.a_t, scale(reshape(ctx, feat), p.lambda_t));
    }
    return out;
}

ChannelEnergy channel_energy(const Tensor& b_s, const Tensor& b_t) {
    check_pair("channel_energy", b_s, b_t);
    const int c = b_s.dim(0);
    const int n = b_s.dim(1) * b_s.dim(2);
    ChannelEnergy e;
    // theta[i,j] = <channel i of b_s, channel j of b_t>
    e.theta = matmul(reshape(b_s, {c, n}), transpose(reshape(b_t, {c, n})));
    return e;
}

Tensor channel_forward_attention(const ChannelEnergy& energy) {
    return softmax(energy.theta, 1);
}

Tensor channel_backward_attention(const ChannelEnergy& energy) {
    return softmax(energy.theta, 0);
}

ChannelPair cd_cam(const ChannelPair& pair, const CamParams& p) {
    check_pair("cd_cam", pair.b_s, pair.b_t);
    if (p.xi_s == 0.0 && p.xi_t == 0.0) return pair;

    const Shape feat = pair.b_s.shape();
    const int c = feat[0];
    const int n = feat[1] * feat[2];
    const Tensor bs_flat = reshape(pair.b_s, {c, n});
    const Tensor bt_flat = reshape(pair.b_t, {c, n});
    const ChannelEnergy e = channel_energy(pair.b_s, pair.b_t);

    ChannelPair out = pair;
    if (p.xi_s != 0.0) {
        const Tensor psi_st = channel_forward_attention(e);
        const Tensor ctx = matmul(psi_st, bt_flat);  // C x N
        out.b_s = add(pair.b_s, scale(reshape(ctx, feat), p.xi_s));
    }
    if (p.xi_t != 0.0) {
        const Tensor psi_ts = channel_backward_attention(e);
        const Tensor ctx = matmul(transpose(psi_ts), bs_flat);  // C x N
        out.b_t = add(pair.b_t, scale(reshape(ctx, feat), p.xi_t));
    }
    return out;
}

}  // namespace xda
