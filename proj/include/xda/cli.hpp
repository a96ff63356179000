#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "xda/config.hpp"
#include "xda/experiment.hpp"

namespace xda::cli {

/// Writes a deterministic dataset (PPM images, PGM labels, manifest) under
/// `out_dir`. Target training labels are withheld; only the eval split
/// carries label files.
void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Loads a dataset written by cmd_synth.
Dataset load_dataset(const std::filesystem::path& data_dir);

/// Pseudo-label rounds plus alternating min-max training; writes the
/// effective config, the CSV step log, the pseudo-label maps, and the final
/// checkpoint under `out_dir`.
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Target-split evaluation of a checkpoint; writes eval.csv and returns the
/// report.
IoUReport cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint_dir,
                   const std::filesystem::path& out_dir);

struct AttnRequest {
    std::filesystem::path checkpoint_dir;
    std::filesystem::path src_image;
    std::filesystem::path tgt_image;
    std::filesystem::path out_dir;
    std::vector<std::pair<int, int>> src_positions;  // (row, col) in the feature grid
    std::vector<std::pair<int, int>> tgt_positions;
};

/// Exports attention heatmaps (PGM) and raw matrices (tensor files) for the
/// requested positions.
void cmd_attn(const RunConfig& cfg, const AttnRequest& req);

/// Runs the finite-difference suite; returns true when every check passes.
bool cmd_gradcheck(const RunConfig& cfg, std::ostream& os);

/// Full argv entry point used by the xdaseg binary; maps errors to exit
/// codes 2 (config/argument), 3 (data/io), 4 (numeric).
int run(int argc, char** argv);

}  // namespace xda::cli
