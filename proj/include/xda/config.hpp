#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace xda {

/// Flat key=value run configuration. Unknown keys are rejected, toggles must
/// be literal true/false, and every numeric key is range-checked on load.
struct RunConfig {
    std::uint64_t seed = 42;
    int image_size = 64;     // square, divisible by 8
    int channels = 16;       // C
    int attn_channels = 0;   // C_r; 0 = channels / 4
    int num_classes = 5;     // L

    double lambda_s = 1.0, lambda_t = 1.0;
    double xi_s = 1.0, xi_t = 1.0;
    double lambda_adv = 0.001;

    double lr_seg = 2.5e-4;
    double lr_disc = 1e-4;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double poly_power = 0.9;
    int iterations = 2000;

    double pseudo_threshold = 0.9;
    int pseudo_rounds = 1;

    bool enable_cdsam = true;
    bool enable_cdcam = true;
    bool enable_selftrain = true;
    bool share_qk = false;

    double disc_width_mult = 1.0;

    int n_source = 200;
    int n_target = 200;
    int n_eval = 50;

    std::string data_dir;
    std::string out_dir;

    int resolved_attn_channels() const {
        return attn_channels > 0 ? attn_channels : std::max(1, channels / 4);
    }

    static RunConfig from_text(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);
    std::string to_text() const;
    void save(const std::filesystem::path& path) const;

    bool operator==(const RunConfig&) const = default;
};

}  // namespace xda
