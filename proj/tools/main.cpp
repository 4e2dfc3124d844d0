#include <CLI11.hpp>

#include "cdic/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cdic: 2-D digital image correlation with displacement-based crack detection"};
    app.require_subcommand(1);

    cdic::pipeline::MigOptions mig;
    auto* cmd_mig = app.add_subcommand("mig", "Speckle quality: mean intensity gradient");
    cmd_mig->add_option("image", mig.image, "PNG or TIFF image")->required();
    cmd_mig->add_option("--floor", mig.floor, "quality floor (warn+exit 1 below it)")
        ->capture_default_str();

    cdic::pipeline::SynthOptions synth;
    std::string modes_csv;
    auto* cmd_synth = app.add_subcommand(
        "synth", "Generate a speckle rotation benchmark and run the DIC modes on it");
    cmd_synth->add_option("-o,--out", synth.out_dir, "output directory")->required();
    cmd_synth->add_option("--frames", synth.frames, "number of deformed frames")
        ->capture_default_str();
    cmd_synth->add_option("--alpha-max", synth.alpha_max_deg, "final rotation angle, degrees")
        ->capture_default_str();
    cmd_synth->add_option("--modes", modes_csv,
                          "comma list of one-seed,multi-seed,incremental-multi-seed");
    cmd_synth->add_option("--size", synth.size, "speckle image side, pixels")
        ->capture_default_str();
    cmd_synth->add_option("--speckles", synth.speckles, "speckle count")->capture_default_str();
    cmd_synth->add_option("--radius", synth.radius, "mean speckle radius, pixels")
        ->capture_default_str();
    cmd_synth->add_option("--rng-seed", synth.rng_seed, "speckle RNG seed")
        ->capture_default_str();
    cmd_synth->add_option("--subset", synth.subset_half, "subset half-width M")
        ->capture_default_str();
    cmd_synth->add_option("--step", synth.step, "grid step, pixels")->capture_default_str();
    cmd_synth->add_option("--update-interval", synth.update_interval,
                          "incremental reference update period, frames")
        ->capture_default_str();
    cmd_synth->add_option("--threads", synth.threads, "worker threads (0 = all cores)")
        ->capture_default_str();
    cmd_synth->add_flag("--svg", synth.svg, "also write an SVG MAE plot");
    cmd_synth->add_flag("!--no-frames", synth.write_frames, "skip writing frame PNGs");

    cdic::pipeline::RunOptions analyze;
    auto* cmd_analyze =
        app.add_subcommand("analyze", "Full-field displacement analysis of an image sequence");
    cmd_analyze->add_option("-c,--config", analyze.config_path, "run configuration file")
        ->required();
    cmd_analyze->add_option("--set", analyze.overrides,
                            "override a config value: section.key=value (repeatable)");
    cmd_analyze->add_option("--threads", analyze.threads, "worker threads (0 = all cores)");

    cdic::pipeline::RunOptions crack;
    auto* cmd_crack = app.add_subcommand(
        "crack", "Crack detection on analyzed fields: delta_c, edges, tip track, speed");
    cmd_crack->add_option("-c,--config", crack.config_path, "run configuration file")
        ->required();
    cmd_crack->add_option("--set", crack.overrides,
                          "override a config value: section.key=value (repeatable)");
    cmd_crack->add_option("--threads", crack.threads, "worker threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    if (cmd_mig->parsed()) return cdic::pipeline::cmd_mig(mig);
    if (cmd_synth->parsed()) {
        if (!modes_csv.empty()) {
            std::stringstream ss(modes_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) synth.modes.push_back(tok);
        }
        return cdic::pipeline::cmd_synth(synth);
    }
    if (cmd_analyze->parsed()) return cdic::pipeline::cmd_analyze(analyze);
    if (cmd_crack->parsed()) return cdic::pipeline::cmd_crack(crack);
    return 0;
}
