// octa: batch CLI over the OCTA analysis library. Subcommands mirror the
// processing workflow: process, features, volume, classify, evaluate, and
// a synthetic phantom suite generator for running everything without
// clinical data.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "octa/runner.hpp"

namespace {

octa::seg::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j;
    in >> j;
    return octa::seg::config_from_json(j);
}

void print_run_summary(const octa::run::RunReport& report) {
    std::size_t failed = 0;
    for (const auto& e : report.entries) {
        if (!e.ok) {
            ++failed;
            std::cerr << "  FAILED " << e.image_id << ": " << e.message << "\n";
        } else if (!e.message.empty()) {
            std::cerr << "  warning " << e.image_id << ": " << e.message << "\n";
        }
    }
    std::printf("processed %zu entries, %zu failed (config %016llx)\n", report.entries.size(),
                failed, static_cast<unsigned long long>(report.config_hash));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OCTA vessel segmentation, biomarkers, 3D volumetry and white-box classification"};
    app.require_subcommand(1);

    std::string manifest_path, config_path, out_path, group;
    int jobs = 1;
    bool dump_stages = false;
    bool from_masks = false;
    std::uint64_t seed = 1;

    auto* process = app.add_subcommand("process", "segment every manifest entry to a mask PGM");
    process->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    process->add_option("--config", config_path, "pipeline config JSON");
    process->add_option("--out", out_path, "output directory")->required();
    process->add_option("--jobs", jobs, "parallel entries");
    process->add_flag("--dump-stages", dump_stages, "write per-stage PGMs for each entry");

    auto* features = app.add_subcommand("features", "extract the biomarker CSV");
    features->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    features->add_option("--config", config_path, "pipeline config JSON");
    features->add_option("--out", out_path, "output CSV path")->required();
    features->add_option("--jobs", jobs, "parallel entries");

    auto* volume = app.add_subcommand("volume", "stack a group's sections into a 3D volume + STL");
    volume->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    volume->add_option("--config", config_path, "pipeline config JSON");
    volume->add_option("--group", group, "stack group name")->required();
    volume->add_option("--out", out_path, "output directory")->required();
    volume->add_flag("--from-masks", from_masks, "entries are already binary masks");

    std::string features_csv, rules_dir, report_csv;
    double ratio = 0.8;
    int max_depth = 3;
    auto* classify = app.add_subcommand("classify", "train/evaluate the white-box rule systems");
    classify->add_option("--features", features_csv, "labeled feature CSV")->required();
    classify->add_option("--rules-dir", rules_dir, "directory for rule-set JSON files")->required();
    classify->add_option("--out", report_csv, "per-image report CSV")->required();
    classify->add_option("--ratio", ratio, "train fraction (default 0.8)");
    classify->add_option("--seed", seed, "split seed");
    classify->add_option("--max-depth", max_depth, "decision tree depth limit");

    auto* evaluate = app.add_subcommand("evaluate", "Jaccard/Dice of pipeline output vs annotations");
    evaluate->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
    evaluate->add_option("--config", config_path, "pipeline config JSON");
    evaluate->add_option("--out", out_path, "aggregate report JSON")->required();
    evaluate->add_option("--jobs", jobs, "parallel entries");

    int sick = 20, healthy = 5, sections = 0;
    auto* phantom = app.add_subcommand("phantom", "generate a synthetic phantom suite + manifest");
    phantom->add_option("--out", out_path, "suite directory")->required();
    phantom->add_option("--sick", sick, "number of vessel phantoms");
    phantom->add_option("--healthy", healthy, "number of healthy phantoms");
    phantom->add_option("--sections", sections, "sections per visit (adds visit1/visit2 stacks)");
    phantom->add_option("--seed", seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (process->parsed()) {
            const auto manifest = octa::run::load_manifest(manifest_path);
            const auto cfg = load_config(config_path);
            octa::run::RunOptions opt;
            opt.out_dir = out_path;
            opt.jobs = jobs;
            opt.dump_stages = dump_stages;
            const auto report = octa::run::cmd_process(manifest, cfg, opt);
            print_run_summary(report);
            return report.all_ok() ? 0 : 1;
        }

        if (features->parsed()) {
            const auto manifest = octa::run::load_manifest(manifest_path);
            const auto cfg = load_config(config_path);
            const auto report = octa::run::cmd_features(manifest, cfg, out_path, jobs);
            print_run_summary(report);
            return report.all_ok() ? 0 : 1;
        }

        if (volume->parsed()) {
            const auto manifest = octa::run::load_manifest(manifest_path);
            const auto cfg = load_config(config_path);
            const auto rep = octa::run::cmd_volume(manifest, cfg, group, out_path, from_masks);
            std::printf("%-10s %8s %13s %10s %14s\n", "group", "sections", "distance_um", "pixels",
                        "volume_um3");
            std::printf("%-10s %8zu %13.1f %10zu %14.1f\n", rep.group.c_str(), rep.sections,
                        rep.slice_distance_um, rep.pixels, rep.volume_um3);
            if (!rep.warning.empty()) std::cerr << "warning: " << rep.warning << "\n";
            return 0;
        }

        if (classify->parsed()) {
            const auto rep = octa::run::cmd_classify(features_csv, rules_dir, report_csv, ratio,
                                                     seed, max_depth);
            for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << "\n";
            std::printf("train %zu, test %zu, skipped %zu\n", rep.train_count, rep.test_count,
                        rep.skipped_rows);
            std::printf("decision tree (trained): train %.4f, test %.4f\n", rep.tree_train_accuracy,
                        rep.tree_test_accuracy);
            std::printf("dt rules:       %.4f\n", rep.dt_table_accuracy);
            std::printf("svm rules:      %.4f  (%zu abstained)\n", rep.svm_accuracy, rep.svm_abstains);
            std::printf("dl rules:       %.4f  (%zu abstained)\n", rep.dl_accuracy, rep.dl_abstains);
            std::printf("ensemble:       %.4f\n", rep.ensemble_accuracy);
            return 0;
        }

        if (evaluate->parsed()) {
            const auto manifest = octa::run::load_manifest(manifest_path);
            const auto cfg = load_config(config_path);
            const auto rep = octa::run::cmd_evaluate(manifest, cfg, out_path, jobs);
            for (const auto& row : rep.rows)
                std::printf("  %-16s jaccard %.4f  dice %.4f%s\n", row.image_id.c_str(),
                            row.overlap.jaccard_index, row.overlap.dice,
                            row.overlap.both_empty ? "  (both empty)" : "");
            std::printf("mean:   jaccard %.4f  dice %.4f\n", rep.mean_jaccard, rep.mean_dice);
            std::printf("pooled: jaccard %.4f  dice %.4f\n", rep.pooled_jaccard, rep.pooled_dice);
            if (rep.skipped > 0) std::printf("skipped %zu entries without annotations\n", rep.skipped);
            return rep.run.all_ok() ? 0 : 1;
        }

        if (phantom->parsed()) {
            octa::run::PhantomSuiteOptions opt;
            opt.out_dir = out_path;
            opt.sick = sick;
            opt.healthy = healthy;
            opt.sections = sections;
            opt.seed = seed;
            const auto manifest_file = octa::run::cmd_phantom(opt);
            std::printf("wrote %s\n", manifest_file.string().c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
