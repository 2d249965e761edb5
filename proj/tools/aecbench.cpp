// aecbench.cpp
// Command-line front end: build scenes, run one pipeline on a saved scene,
// score an estimate, aggregate tables and export features for external mask
// estimators. Every experiment is reproducible from a config file and a seed.

#include "aecbench/beamform.hpp"
#include "aecbench/harness.hpp"
#include "aecbench/masking.hpp"
#include "aecbench/metrics.hpp"
#include "aecbench/wav.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

using namespace aecbench;
namespace fs = std::filesystem;

namespace {

// Flags shared by the subcommands that build an ExperimentConfig.
struct ConfigFlags {
    std::string config;
    std::vector<std::uint64_t> seeds;
    std::string setup;
    std::vector<std::string> rooms;
    std::vector<std::string> eta2;
    std::vector<std::string> pipelines;
    double duration = 0;
    std::string mask_dir;
    std::string out;

    void attach(CLI::App *app) {
        app->add_option("-c,--config", config, "Experiment config JSON")->check(CLI::ExistingFile);
        app->add_option("-s,--seed", seeds, "Scene seed(s); replaces the config's seed list");
        app->add_option("--setup", setup, "mcaec, mmaec or single");
        app->add_option("--rooms", rooms, "Room labels, or 'test' / 'training'");
        app->add_option("--eta2", eta2, "Loudspeaker nonlinearity settings ('inf' is linear)");
        app->add_option("--pipelines", pipelines, "Pipelines to run");
        app->add_option("--duration", duration, "Scene length in seconds");
        app->add_option("--mask-dir", mask_dir, "Directory of MSK1 mask files for file_mask");
        app->add_option("-o,--out", out, "Output directory")->required();
    }

    ExperimentConfig build() const {
        nlohmann::json j = nlohmann::json::object();
        if (!config.empty()) {
            std::ifstream in(config);
            j = nlohmann::json::parse(in);
        }
        if (!seeds.empty()) j["seeds"] = seeds;
        if (!setup.empty()) j["setup"] = setup;
        if (!rooms.empty()) j["rooms"] = rooms;
        if (!pipelines.empty()) j["pipelines"] = pipelines;
        if (duration > 0) j["duration_s"] = duration;
        if (!mask_dir.empty()) j["mask_dir"] = mask_dir;
        if (!eta2.empty()) {
            auto arr = nlohmann::json::array();
            for (const auto &e : eta2) {
                if (e == "inf") arr.push_back(e);
                else arr.push_back(std::stod(e));
            }
            j["eta2"] = arr;
        }
        auto cfg = config_from_json(j);
        cfg.output_dir = out;
        validate(cfg);
        return cfg;
    }
};

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// A saved scene plus the config and id the harness pipelines expect.
struct SavedScene {
    Scene scene;
    ExperimentConfig cfg;
    std::string id;
};

SavedScene open_scene(const std::string &dir, const std::string &mask) {
    SavedScene s{load_scene(dir), {}, fs::path(dir).filename().string()};
    s.cfg.setup = s.scene.options.setup;
    if (!mask.empty()) {
        s.cfg.mask_dir = fs::path(mask).parent_path();
        s.id = fs::path(mask).stem().string();
    }
    return s;
}

std::string mask_pipeline(const std::string &mask, const std::string &oracle) {
    if (!mask.empty()) return "file_mask";
    if (oracle == "smm") return "oracle_smm";
    if (oracle == "complex") return "oracle_complex";
    throw std::invalid_argument("unknown oracle mask '" + oracle + "' (smm or complex)");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Mask-based echo cancellation benchmark"};
    app.require_subcommand(1);

    // simulate
    ConfigFlags sim_flags;
    auto *sim = app.add_subcommand("simulate", "Build seeded scenes and save them as WAV directories");
    sim_flags.attach(sim);

    // enhance
    std::string enh_scene, enh_mask, enh_oracle = "smm", enh_out;
    auto *enh = app.add_subcommand("enhance", "Apply a mask to every mic of a saved scene");
    enh->add_option("--scene", enh_scene, "Scene directory")->required()->check(CLI::ExistingDirectory);
    enh->add_option("--mask", enh_mask, "MSK1 mask file (default: oracle mask)")->check(CLI::ExistingFile);
    enh->add_option("--oracle", enh_oracle, "Oracle mask kind when no file is given: smm or complex");
    enh->add_option("-o,--out", enh_out, "Output WAV")->required();

    // beamform
    std::string bf_scene, bf_mask, bf_oracle = "smm", bf_mode = "post_filter", bf_out, bf_weights;
    auto *bf = app.add_subcommand("beamform", "Mask-driven MVDR on a saved scene");
    bf->add_option("--scene", bf_scene, "Scene directory")->required()->check(CLI::ExistingDirectory);
    bf->add_option("--mask", bf_mask, "MSK1 mask file (default: oracle mask)")->check(CLI::ExistingFile);
    bf->add_option("--oracle", bf_oracle, "Oracle mask kind when no file is given: smm or complex");
    bf->add_option("--mode", bf_mode, "on_mic or post_filter")
        ->check(CLI::IsMember({"on_mic", "post_filter", "ideal_bf"}));
    bf->add_option("-o,--out", bf_out, "Output WAV")->required();
    bf->add_option("--weights", bf_weights, "Also save the weights as a complex MSK1 file");

    // baseline
    std::string bl_scene, bl_kind = "nlms", bl_out;
    NlmsConfig bl_nlms;
    double bl_alpha = 0.5;
    auto *bl = app.add_subcommand("baseline", "Linear adaptive echo canceller on a saved scene");
    bl->add_option("--scene", bl_scene, "Scene directory")->required()->check(CLI::ExistingDirectory);
    bl->add_option("--kind", bl_kind, "nlms or stereo-nlms")->check(CLI::IsMember({"nlms", "stereo-nlms"}));
    bl->add_option("--taps", bl_nlms.taps, "Filter length");
    bl->add_option("--mu", bl_nlms.mu, "Step size in (0, 2)");
    bl->add_option("--epsilon", bl_nlms.epsilon, "Regularization");
    bl->add_option("--alpha", bl_alpha, "Half-wave decorrelation for stereo-nlms");
    bl->add_option("-o,--out", bl_out, "Output WAV")->required();

    // evaluate
    std::string ev_scene, ev_estimate;
    std::size_t ev_mic = 1;
    auto *ev = app.add_subcommand("evaluate", "ERLE and SI-SDR of an estimate against a saved scene");
    ev->add_option("--scene", ev_scene, "Scene directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--estimate", ev_estimate, "Estimate WAV")->required()->check(CLI::ExistingFile);
    ev->add_option("--mic", ev_mic, "1-based microphone the estimate refers to");

    // table
    ConfigFlags tab_flags;
    auto *tab = app.add_subcommand("table", "Run pipelines over scene batches and write score tables");
    tab_flags.attach(tab);
    bool tab_wavs = false;
    tab->add_flag("--keep-wavs", tab_wavs, "Also write scenes and pipeline outputs");

    // export-features
    ConfigFlags ex_flags;
    bool ex_random = false;
    auto *ex = app.add_subcommand("export-features", "Write MSK1 features, oracle targets and a manifest");
    ex_flags.attach(ex);
    ex->add_flag("--random-mic", ex_random, "One random mic per scene instead of every mic");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const auto cfg = sim_flags.build();
            for (std::size_t r = 0; r < cfg.rooms.size(); ++r)
                for (double eta2 : cfg.eta2s)
                    for (auto seed : cfg.seeds) {
                        const auto id = scene_id(cfg.rooms[r], eta2, seed);
                        save_scene(build_scene(cfg, r, eta2, seed), cfg.output_dir / id);
                        std::printf("%s\n", (cfg.output_dir / id).c_str());
                    }
            write_text(cfg.output_dir / "config.json", config_to_json(cfg).dump(2) + "\n");
        } else if (*enh) {
            const auto s = open_scene(enh_scene, enh_mask);
            write_wav(enh_out, run_pipeline(mask_pipeline(enh_mask, enh_oracle), s.scene, s.cfg, s.id).signal);
        } else if (*bf) {
            const auto s = open_scene(bf_scene, bf_mask);
            const auto base = mask_pipeline(bf_mask, bf_oracle);
            write_wav(bf_out, run_pipeline(base + "+" + bf_mode, s.scene, s.cfg, s.id).signal);
            if (!bf_weights.empty()) {
                const auto Y = stft(s.scene.mic);
                const Spectrogram target = stft(s.scene.nearend);
                MaskSet masks = base == "oracle_smm"       ? oracle_smm(target, Y)
                                : base == "oracle_complex" ? oracle_complex(target)
                                                           : load_masks(bf_mask);
                const auto S_hat = apply_mask(Y, masks);
                save_masks(weights_to_maskset(mask_driven_mvdr(bf_mode == "ideal_bf" ? target : S_hat, Y)),
                           bf_weights);
            }
        } else if (*bl) {
            auto s = open_scene(bl_scene, "");
            s.cfg.nlms = bl_nlms;
            s.cfg.decorrelation_alpha = bl_alpha;
            write_wav(bl_out, run_pipeline(bl_kind == "nlms" ? "nlms" : "stereo_nlms", s.scene, s.cfg, s.id).signal);
        } else if (*ev) {
            const auto scene = load_scene(ev_scene);
            if (ev_mic < 1 || ev_mic > scene.num_mics())
                throw std::invalid_argument("--mic must be in 1.." + std::to_string(scene.num_mics()));
            const auto est = read_wav(ev_estimate);
            if (est.channels() != 1 && est.channels() != scene.num_mics())
                throw std::invalid_argument("estimate must have 1 or " + std::to_string(scene.num_mics()) +
                                            " channels");
            const auto m = ev_mic - 1;
            const auto one = est.select(est.channels() == 1 ? 0 : m);
            nlohmann::json j;
            const auto e = erle(scene.mic.select(m), one, scene.timeline);
            const auto d = si_sdr(scene.nearend.select(m), one, scene.timeline);
            j["mic"] = ev_mic;
            j["erle_db"] = e ? nlohmann::json(*e) : nlohmann::json(nullptr);
            j["si_sdr_db"] = d ? nlohmann::json(*d) : nlohmann::json(nullptr);
            std::cout << j.dump(2) << '\n';
        } else if (*tab) {
            auto cfg = tab_flags.build();
            cfg.keep_wavs = tab_wavs;
            const auto r = run_experiment(cfg);
            write_text(cfg.output_dir / "summary.csv", render_csv(r));
            write_text(cfg.output_dir / "scores.csv", render_scores_csv(r));
            write_text(cfg.output_dir / "table.txt", render_table(r));
            write_text(cfg.output_dir / "config.json", config_to_json(cfg).dump(2) + "\n");
            std::cout << render_table(r);
        } else if (*ex) {
            const auto cfg = ex_flags.build();
            const auto entries =
                export_features(cfg, cfg.output_dir, ex_random ? MicSelection::kRandom : MicSelection::kAll);
            std::printf("%zu feature/target pairs in %s\n", entries.size(), cfg.output_dir.c_str());
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "aecbench: %s\n", e.what());
        return 1;
    }
    return 0;
}
