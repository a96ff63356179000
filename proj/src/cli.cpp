#include "xda/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "xda/error.hpp"
#include "xda/serialize.hpp"

namespace xda::cli {

namespace {

namespace fs = std::filesystem;

std::string index_name(const char* stem, int index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04d.%s", stem, index, ext);
    return buf;
}

GrayImage label_to_gray(const LabelMap& label) {
    GrayImage img;
    img.width = label.width;
    img.height = label.height;
    img.pixels = label.values;
    return img;
}

LabelMap gray_to_label(const GrayImage& img) {
    LabelMap m;
    m.width = img.width;
    m.height = img.height;
    m.values = img.pixels;
    return m;
}

std::string class_name(int c, int num_classes) {
    static const char* kSceneNames[5] = {"background", "road", "sky", "building", "vehicle"};
    if (num_classes == 5 && c < 5) return kSceneNames[c];
    return "class" + std::to_string(c);
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void export_heatmap(const fs::path& path, const Tensor& map2d) {
    write_pgm(path, heatmap_to_gray(map2d));
}

Tensor reshape_row(const Tensor& matrix, int row, int h, int w) {
    Tensor out = Tensor::zeros({h, w});
    for (int i = 0; i < h * w; ++i) out[static_cast<std::size_t>(i)] = matrix.at(row, i);
    return out;
}

Tensor reshape_col(const Tensor& matrix, int col, int h, int w) {
    Tensor out = Tensor::zeros({h, w});
    for (int i = 0; i < h * w; ++i) out[static_cast<std::size_t>(i)] = matrix.at(i, col);
    return out;
}

std::pair<int, int> parse_position(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw ConfigError("position must be row,col — got '" + text + "'");
    }
    try {
        return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ConfigError("position must be row,col — got '" + text + "'");
    }
}

}  // namespace

void cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir / "source");
    fs::create_directories(out_dir / "target");
    fs::create_directories(out_dir / "eval");

    const Dataset ds = synth_dataset(cfg);
    std::ostringstream manifest;

    for (int i = 0; i < cfg.n_source; ++i) {
        const std::string img = "source/" + index_name("img", i, "ppm");
        const std::string lbl = "source/" + index_name("lbl", i, "pgm");
        write_ppm(out_dir / img, tensor_to_rgb(ds.source_images[static_cast<std::size_t>(i)]));
        write_pgm(out_dir / lbl, label_to_gray(ds.source_labels[static_cast<std::size_t>(i)]));
        manifest << "source " << i << " " << img << " " << lbl << "\n";
    }
    for (int i = 0; i < cfg.n_target; ++i) {
        const std::string img = "target/" + index_name("img", i, "ppm");
        write_ppm(out_dir / img, tensor_to_rgb(ds.target_images[static_cast<std::size_t>(i)]));
        manifest << "target " << i << " " << img << " -\n";
    }
    for (int i = 0; i < cfg.n_eval; ++i) {
        const std::string img = "eval/" + index_name("img", i, "ppm");
        const std::string lbl = "eval/" + index_name("lbl", i, "pgm");
        write_ppm(out_dir / img, tensor_to_rgb(ds.eval_images[static_cast<std::size_t>(i)]));
        write_pgm(out_dir / lbl, label_to_gray(ds.eval_labels[static_cast<std::size_t>(i)]));
        manifest << "eval " << i << " " << img << " " << lbl << "\n";
    }

    std::ofstream mf(out_dir / "manifest.txt");
    if (!mf) throw IoError("cannot write dataset manifest in " + out_dir.string());
    mf << manifest.str();
    if (!mf) throw IoError("dataset manifest write failed in " + out_dir.string());
}

Dataset load_dataset(const fs::path& data_dir) {
    std::ifstream mf(data_dir / "manifest.txt");
    if (!mf) throw IoError("missing dataset manifest: " + (data_dir / "manifest.txt").string());

    Dataset ds;
    std::string split, img, lbl;
    int index = 0;
    while (mf >> split >> index >> img >> lbl) {
        if (split == "source") {
            ds.source_images.push_back(rgb_to_tensor(read_ppm(data_dir / img)));
            ds.source_labels.push_back(gray_to_label(read_pgm(data_dir / lbl)));
        } else if (split == "target") {
            ds.target_images.push_back(rgb_to_tensor(read_ppm(data_dir / img)));
        } else if (split == "eval") {
            ds.eval_images.push_back(rgb_to_tensor(read_ppm(data_dir / img)));
            ds.eval_labels.push_back(gray_to_label(read_pgm(data_dir / lbl)));
        } else {
            throw DataError("dataset manifest names unknown split '" + split + "'");
        }
    }
    return ds;
}

void cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Dataset ds = load_dataset(cfg.data_dir);

    RunConfig effective = cfg;
    effective.out_dir = out_dir.string();
    effective.save(out_dir / "config.used");

    std::ofstream csv(out_dir / "train_log.csv");
    if (!csv) throw IoError("cannot write training log in " + out_dir.string());

    TrainSinks sinks;
    sinks.csv = &csv;
    sinks.on_pseudo_labels = [&](int round, const std::vector<LabelMap>& labels) {
        const fs::path dir = out_dir / "pseudo" / ("round_" + std::to_string(round));
        fs::create_directories(dir);
        std::ofstream pm(dir / "manifest.txt");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const std::string file = index_name("lbl", static_cast<int>(i), "pgm");
            write_pgm(dir / file, label_to_gray(labels[i]));
            pm << "target " << i << " " << file << "\n";
        }
    };

    ModelBundle model = train_model(cfg, ds, sinks);
    csv.flush();
    if (!csv) throw IoError("training log write failed in " + out_dir.string());
    save_checkpoint(out_dir / "checkpoint", model);
}

IoUReport cmd_eval(const RunConfig& cfg, const fs::path& checkpoint_dir, const fs::path& out_dir) {
    const Dataset ds = load_dataset(cfg.data_dir);
    ModelBundle model = ModelBundle::init(model_config_from(cfg), cfg.seed);
    load_checkpoint(checkpoint_dir, model);

    const IoUReport report = evaluate_model(model, ds);

    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "eval.csv");
    if (!csv) throw IoError("cannot write eval.csv in " + out_dir.string());
    csv << "class_index,class_name,iou\n";
    for (int c = 0; c < cfg.num_classes; ++c) {
        const double iou = report.per_class[static_cast<std::size_t>(c)];
        csv << c << "," << class_name(c, cfg.num_classes) << ","
            << (std::isnan(iou) ? "undefined" : csv_double(iou)) << "\n";
    }
    csv << "mean,miou," << csv_double(report.miou) << "\n";
    if (!csv) throw IoError("eval.csv write failed in " + out_dir.string());
    return report;
}

void cmd_attn(const RunConfig& cfg, const AttnRequest& req) {
    ModelBundle model = ModelBundle::init(model_config_from(cfg), cfg.seed);
    load_checkpoint(req.checkpoint_dir, model);

    const Tensor src = rgb_to_tensor(read_ppm(req.src_image));
    const Tensor tgt = rgb_to_tensor(read_ppm(req.tgt_image));
    const AttentionMaps maps = compute_attention(model, src, tgt);

    for (const auto& [y, x] : req.src_positions) {
        if (y < 0 || y >= maps.feat_h || x < 0 || x >= maps.feat_w) {
            throw ConfigError("source position " + std::to_string(y) + "," + std::to_string(x) +
                              " outside the " + std::to_string(maps.feat_h) + "x" +
                              std::to_string(maps.feat_w) + " feature grid");
        }
    }
    for (const auto& [y, x] : req.tgt_positions) {
        if (y < 0 || y >= maps.feat_h || x < 0 || x >= maps.feat_w) {
            throw ConfigError("target position " + std::to_string(y) + "," + std::to_string(x) +
                              " outside the " + std::to_string(maps.feat_h) + "x" +
                              std::to_string(maps.feat_w) + " feature grid");
        }
    }

    fs::create_directories(req.out_dir);
    save_tensor(req.out_dir / "phi.xten", maps.phi);
    save_tensor(req.out_dir / "gamma_st.xten", maps.gamma_st);
    save_tensor(req.out_dir / "gamma_ts.xten", maps.gamma_ts);
    save_tensor(req.out_dir / "theta.xten", maps.theta);
    save_tensor(req.out_dir / "psi_st.xten", maps.psi_st);
    save_tensor(req.out_dir / "psi_ts.xten", maps.psi_ts);
    export_heatmap(req.out_dir / "psi_st.pgm", maps.psi_st);
    export_heatmap(req.out_dir / "psi_ts.pgm", maps.psi_ts);

    for (const auto& [y, x] : req.src_positions) {
        const int row = y * maps.feat_w + x;
        const Tensor map = reshape_row(maps.gamma_st, row, maps.feat_h, maps.feat_w);
        const std::string name = "attn_src_" + std::to_string(y) + "_" + std::to_string(x) + ".pgm";
        export_heatmap(req.out_dir / name, map);
    }
    for (const auto& [y, x] : req.tgt_positions) {
        const int col = y * maps.feat_w + x;
        const Tensor map = reshape_col(maps.gamma_ts, col, maps.feat_h, maps.feat_w);
        const std::string name = "attn_tgt_" + std::to_string(y) + "_" + std::to_string(x) + ".pgm";
        export_heatmap(req.out_dir / name, map);
    }
}

bool cmd_gradcheck(const RunConfig& cfg, std::ostream& os) {
    const std::vector<GradCheckEntry> entries = run_gradient_suite(cfg.seed);
    bool all_pass = true;
    for (const GradCheckEntry& e : entries) {
        os << (e.pass ? "PASS" : "FAIL") << " " << e.name << " max_rel_err=" << csv_double(e.error)
           << "\n";
        all_pass = all_pass && e.pass;
    }
    return all_pass;
}

int run(int argc, char** argv) {
    CLI::App app{"cross-domain attention segmentation workbench"};
    app.require_subcommand(1);

    std::string config_path, out_override, checkpoint, src_image, tgt_image;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    std::vector<std::string> pos_args, tpos_args;

    const auto add_common = [&](CLI::App* sub, bool config_required) {
        sub->add_option("--config", config_path, "run configuration file")
            ->required(config_required);
        sub->add_option("--out", out_override, "output directory (overrides out_dir)");
        sub->add_option("--seed", seed_override, "seed override")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* synth = app.add_subcommand("synth", "generate the synthetic two-domain dataset");
    add_common(synth, true);
    CLI::App* train = app.add_subcommand("train", "pseudo-label and adversarially train");
    add_common(train, true);
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the target split");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
    CLI::App* attn = app.add_subcommand("attn", "export cross-attention heatmaps");
    add_common(attn, true);
    attn->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
    attn->add_option("--src", src_image, "source-domain image (PPM)")->required();
    attn->add_option("--tgt", tgt_image, "target-domain image (PPM)")->required();
    attn->add_option("--pos", pos_args, "source position row,col in the feature grid");
    attn->add_option("--tpos", tpos_args, "target position row,col in the feature grid");
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    add_common(gradcheck, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = RunConfig::load(config_path);
        if (seed_given) cfg.seed = seed_override;
        const std::string out = !out_override.empty() ? out_override : cfg.out_dir;
        const auto need_out = [&]() -> fs::path {
            if (out.empty()) throw ConfigError("no output directory: set out_dir or pass --out");
            return out;
        };

        if (synth->parsed()) {
            cmd_synth(cfg, need_out());
        } else if (train->parsed()) {
            cmd_train(cfg, need_out());
        } else if (eval_cmd->parsed()) {
            const IoUReport r = cmd_eval(cfg, checkpoint, need_out());
            std::cout << "miou " << csv_double(r.miou) << "\n";
        } else if (attn->parsed()) {
            AttnRequest req;
            req.checkpoint_dir = checkpoint;
            req.src_image = src_image;
            req.tgt_image = tgt_image;
            req.out_dir = need_out();
            for (const std::string& p : pos_args) req.src_positions.push_back(parse_position(p));
            for (const std::string& p : tpos_args) req.tgt_positions.push_back(parse_position(p));
            cmd_attn(cfg, req);
        } else if (gradcheck->parsed()) {
            if (!cmd_gradcheck(cfg, std::cout)) {
                std::cerr << "gradient checks failed\n";
                return 4;
            }
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace xda::cli
