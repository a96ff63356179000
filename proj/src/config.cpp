#include "xda/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "xda/error.hpp"

namespace xda {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an unsigned integer: '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;

    const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
        setters = {
            {"seed", [&](const std::string& k, const std::string& v) { cfg.seed = parse_u64(k, v); }},
            {"image_size",
             [&](const std::string& k, const std::string& v) {
                 cfg.image_size = static_cast<int>(parse_int(k, v));
                 check(cfg.image_size >= 8 && cfg.image_size % 8 == 0,
                       "image_size must be a multiple of 8 and at least 8");
             }},
            {"channels",
             [&](const std::string& k, const std::string& v) {
                 cfg.channels = static_cast<int>(parse_int(k, v));
                 check(cfg.channels >= 1, "channels must be positive");
             }},
            {"attn_channels",
             [&](const std::string& k, const std::string& v) {
                 cfg.attn_channels = static_cast<int>(parse_int(k, v));
                 check(cfg.attn_channels >= 0, "attn_channels must be non-negative (0 = auto)");
             }},
            {"num_classes",
             [&](const std::string& k, const std::string& v) {
                 cfg.num_classes = static_cast<int>(parse_int(k, v));
                 check(cfg.num_classes >= 2 && cfg.num_classes < 255,
                       "num_classes must lie in [2, 254]");
             }},
            {"lambda_s",
             [&](const std::string& k, const std::string& v) {
                 cfg.lambda_s = parse_double(k, v);
                 check(cfg.lambda_s >= 0.0, "lambda_s must be non-negative");
             }},
            {"lambda_t",
             [&](const std::string& k, const std::string& v) {
                 cfg.lambda_t = parse_double(k, v);
                 check(cfg.lambda_t >= 0.0, "lambda_t must be non-negative");
             }},
            {"xi_s",
             [&](const std::string& k, const std::string& v) {
                 cfg.xi_s = parse_double(k, v);
                 check(cfg.xi_s >= 0.0, "xi_s must be non-negative");
             }},
            {"xi_t",
             [&](const std::string& k, const std::string& v) {
                 cfg.xi_t = parse_double(k, v);
                 check(cfg.xi_t >= 0.0, "xi_t must be non-negative");
             }},
            {"lambda_adv",
             [&](const std::string& k, const std::string& v) {
                 cfg.lambda_adv = parse_double(k, v);
                 check(cfg.lambda_adv >= 0.0, "lambda_adv must be non-negative");
             }},
            {"lr_seg",
             [&](const std::string& k, const std::string& v) {
                 cfg.lr_seg = parse_double(k, v);
                 check(cfg.lr_seg >= 0.0, "lr_seg must be non-negative");
             }},
            {"lr_disc",
             [&](const std::string& k, const std::string& v) {
                 cfg.lr_disc = parse_double(k, v);
                 check(cfg.lr_disc >= 0.0, "lr_disc must be non-negative");
             }},
            {"momentum",
             [&](const std::string& k, const std::string& v) {
                 cfg.momentum = parse_double(k, v);
                 check(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "momentum must lie in [0, 1)");
             }},
            {"adam_beta1",
             [&](const std::string& k, const std::string& v) {
                 cfg.adam_beta1 = parse_double(k, v);
                 check(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0,
                       "adam_beta1 must lie in [0, 1)");
             }},
            {"adam_beta2",
             [&](const std::string& k, const std::string& v) {
                 cfg.adam_beta2 = parse_double(k, v);
                 check(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0,
                       "adam_beta2 must lie in [0, 1)");
             }},
            {"poly_power",
             [&](const std::string& k, const std::string& v) {
                 cfg.poly_power = parse_double(k, v);
                 check(cfg.poly_power >= 0.0, "poly_power must be non-negative");
             }},
            {"iterations",
             [&](const std::string& k, const std::string& v) {
                 cfg.iterations = static_cast<int>(parse_int(k, v));
                 check(cfg.iterations >= 0, "iterations must be non-negative");
             }},
            {"pseudo_threshold",
             [&](const std::string& k, const std::string& v) {
                 cfg.pseudo_threshold = parse_double(k, v);
                 check(cfg.pseudo_threshold > 0.0 && cfg.pseudo_threshold <= 1.0,
                       "pseudo_threshold must lie in (0, 1]");
             }},
            {"pseudo_rounds",
             [&](const std::string& k, const std::string& v) {
                 cfg.pseudo_rounds = static_cast<int>(parse_int(k, v));
                 check(cfg.pseudo_rounds >= 1, "pseudo_rounds must be at least 1");
             }},
            {"enable_cdsam", [&](const std::string& k, const std::string& v) { cfg.enable_cdsam = parse_bool(k, v); }},
            {"enable_cdcam", [&](const std::string& k, const std::string& v) { cfg.enable_cdcam = parse_bool(k, v); }},
            {"enable_selftrain",
             [&](const std::string& k, const std::string& v) { cfg.enable_selftrain = parse_bool(k, v); }},
            {"share_qk", [&](const std::string& k, const std::string& v) { cfg.share_qk = parse_bool(k, v); }},
            {"disc_width_mult",
             [&](const std::string& k, const std::string& v) {
                 cfg.disc_width_mult = parse_double(k, v);
                 check(cfg.disc_width_mult > 0.0, "disc_width_mult must be positive");
             }},
            {"n_source",
             [&](const std::string& k, const std::string& v) {
                 cfg.n_source = static_cast<int>(parse_int(k, v));
                 check(cfg.n_source >= 0, "n_source must be non-negative");
             }},
            {"n_target",
             [&](const std::string& k, const std::string& v) {
                 cfg.n_target = static_cast<int>(parse_int(k, v));
                 check(cfg.n_target >= 0, "n_target must be non-negative");
             }},
            {"n_eval",
             [&](const std::string& k, const std::string& v) {
                 cfg.n_eval = static_cast<int>(parse_int(k, v));
                 check(cfg.n_eval >= 0, "n_eval must be non-negative");
             }},
            {"data_dir", [&](const std::string&, const std::string& v) { cfg.data_dir = v; }},
            {"out_dir", [&](const std::string&, const std::string& v) { cfg.out_dir = v; }},
        };

    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value, got '" +
                              stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(key, value);
    }

    check(cfg.attn_channels <= cfg.channels, "attn_channels must not exceed channels");
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path.string());
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return from_text(buffer.str());
}

std::string RunConfig::to_text() const {
    std::ostringstream os;
    os << "seed = " << seed << "\n";
    os << "image_size = " << image_size << "\n";
    os << "channels = " << channels << "\n";
    os << "attn_channels = " << attn_channels << "\n";
    os << "num_classes = " << num_classes << "\n";
    os << "lambda_s = " << fmt_double(lambda_s) << "\n";
    os << "lambda_t = " << fmt_double(lambda_t) << "\n";
    os << "xi_s = " << fmt_double(xi_s) << "\n";
    os << "xi_t = " << fmt_double(xi_t) << "\n";
    os << "lambda_adv = " << fmt_double(lambda_adv) << "\n";
    os << "lr_seg = " << fmt_double(lr_seg) << "\n";
    os << "lr_disc = " << fmt_double(lr_disc) << "\n";
    os << "momentum = " << fmt_double(momentum) << "\n";
    os << "adam_beta1 = " << fmt_double(adam_beta1) << "\n";
    os << "adam_beta2 = " << fmt_double(adam_beta2) << "\n";
    os << "poly_power = " << fmt_double(poly_power) << "\n";
    os << "iterations = " << iterations << "\n";
    os << "pseudo_threshold = " << fmt_double(pseudo_threshold) << "\n";
    os << "pseudo_rounds = " << pseudo_rounds << "\n";
    os << "enable_cdsam = " << (enable_cdsam ? "true" : "false") << "\n";
    os << "enable_cdcam = " << (enable_cdcam ? "true" : "false") << "\n";
    os << "enable_selftrain = " << (enable_selftrain ? "true" : "false") << "\n";
    os << "share_qk = " << (share_qk ? "true" : "false") << "\n";
    os << "disc_width_mult = " << fmt_double(disc_width_mult) << "\n";
    os << "n_source = " << n_source << "\n";
    os << "n_target = " << n_target << "\n";
    os << "n_eval = " << n_eval << "\n";
    os << "data_dir = " << data_dir << "\n";
    os << "out_dir = " << out_dir << "\n";
    return os.str();
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write config: " + path.string());
    os << to_text();
    if (!os) throw IoError("config write failed: " + path.string());
}

}  // namespace xda
