// harness.hpp
// Experiment orchestration: seeded scene batches over room sets, named
// processing pipelines, score tables and feature export for external mask
// estimators.

#pragma once

#include "aecbench/adaptive.hpp"
#include "aecbench/mixer.hpp"
#include "aecbench/roomsim.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aecbench {

struct RoomEntry {
    std::string label;
    double width = 0, length = 0, height = 0;
};

// 3x4x3, 5x6x3 and 11x14x3 m.
std::vector<RoomEntry> test_rooms();
// a in {4, 6, 8, 10}, b in {5, 7, 9, 11, 13}, c = 3.
std::vector<RoomEntry> training_rooms();

struct ExperimentConfig {
    Setup setup = Setup::kMmaec;
    std::vector<RoomEntry> rooms = test_rooms();
    std::vector<double> t60s = {0.35};
    std::vector<double> ser_dbs = {3.5};
    std::vector<double> snr_dbs = {10.0};
    std::vector<double> eta2s = {std::numeric_limits<double>::infinity()};
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> pipelines = {"unprocessed", "oracle_smm"};
    NoiseKind noise = NoiseKind::kDiffuse;
    double duration_s = 4.0;
    int sample_rate = 16000;
    std::size_t rir_length = 512;
    double single_talk_fraction = 0.4;
    // Half-wave decorrelation on the two loudspeaker feeds (mcaec only).
    double decorrelation_alpha = 0.5;
    std::size_t positions_per_room = 20;
    NlmsConfig nlms;
    std::filesystem::path mask_dir;
    std::filesystem::path output_dir;
    bool keep_wavs = false;
};

// Throws std::invalid_argument on empty sets or duplicate seeds.
void validate(const ExperimentConfig &cfg);

ExperimentConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const ExperimentConfig &cfg);
ExperimentConfig load_config(const std::filesystem::path &path);

// Scene identifier "<room>_eta<value>_s<seed>".
std::string scene_id(const RoomEntry &room, double eta2, std::uint64_t seed);

// Deterministic scene for one (room, eta2, seed) cell. Signals, geometry and
// levels depend only on (room, seed), so changing eta2 changes nothing but the
// loudspeaker nonlinearity.
Scene build_scene(const ExperimentConfig &cfg, std::size_t room_index, double eta2, std::uint64_t seed);

// Output of one pipeline on one scene: per-channel time signals. Mask-based
// and adaptive stages give one channel per mic, beamformers give one channel.
struct PipelineOutput {
    Waveform signal;
    bool beamformed = false;
};

// Pipelines: unprocessed, nlms, stereo_nlms, oracle_smm, oracle_complex,
// file_mask, optionally followed by "+on_mic", "+post_filter" or "+ideal_bf".
PipelineOutput run_pipeline(const std::string &pipeline, const Scene &scene, const ExperimentConfig &cfg,
                            const std::string &id);

struct SceneScore {
    std::string room;
    double eta2 = 0;
    std::uint64_t seed = 0;
    std::string pipeline;
    std::size_t mic = 1;  // 1-based microphone the score refers to
    std::optional<double> erle_db;
    std::optional<double> si_sdr_db;
    std::string error;
};

struct SummaryRow {
    std::string room;
    double eta2 = 0;
    std::string pipeline;
    std::size_t mic = 1;
    std::string metric;  // "erle_db" or "si_sdr_db"
    std::optional<double> mean;
    std::size_t count = 0;
    std::size_t failures = 0;
};

struct ExperimentResult {
    std::vector<SceneScore> scores;
    std::vector<SummaryRow> summary;
};

ExperimentResult run_experiment(const ExperimentConfig &cfg);

// Human-readable aligned table and delimited values of the summary.
std::string render_table(const ExperimentResult &r);
// Columns: room,eta2,pipeline,mic,metric,mean,count,failures
std::string render_csv(const ExperimentResult &r);
// Columns: room,eta2,seed,pipeline,mic,erle_db,si_sdr_db,error
std::string render_scores_csv(const ExperimentResult &r);

enum class MicSelection { kRandom, kAll };

struct FeatureEntry {
    std::filesystem::path features;
    std::filesystem::path target;
    std::string scene;
    Setup setup = Setup::kMmaec;
    std::size_t mic = 1;  // 1-based
};

// For each scene and selected microphone j: a complex MSK1 file holding
// [Y_j, X_1, ..., X_L] and a magnitude-mask MSK1 file holding the oracle SMM
// of mic j, plus manifest.json listing every pair.
std::vector<FeatureEntry> export_features(const ExperimentConfig &cfg, const std::filesystem::path &out_dir,
                                          MicSelection selection = MicSelection::kAll);

}  // namespace aecbench
