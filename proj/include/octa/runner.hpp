#pragma once
// Batch front-end logic behind the CLI subcommands. Everything here is
// deterministic given (manifest, config, seed); entries may be processed
// concurrently but outputs and report ordering follow the manifest.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "octa/biomarkers.hpp"
#include "octa/manifest.hpp"
#include "octa/metrics.hpp"
#include "octa/phantom.hpp"
#include "octa/segmentation.hpp"
#include "octa/whitebox.hpp"

namespace octa::run {

struct RunOptions {
    std::filesystem::path out_dir;
    int jobs = 1;
    bool dump_stages = false;
};

struct EntryStatus {
    std::string image_id;
    bool ok = true;
    std::string message;  // failure reason or warning, empty when clean
};

struct RunReport {
    std::vector<EntryStatus> entries;
    std::uint64_t config_hash = 0;

    bool all_ok() const;
};

// Index-parallel helper; fn must confine failures to its own slot.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// One final-mask PGM per entry under out_dir/masks, optional per-stage
// dumps under out_dir/stages/<id>, and a run_report.json. Entry failures
// are recorded and the run continues.
RunReport cmd_process(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                      const RunOptions& opt);

// Feature CSV: image_id, object_pixels, filled_pixels, mcnv_area_mm2,
// total_area_mm2, vessel_density, config_hash, label (blank if absent).
RunReport cmd_features(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                       const std::filesystem::path& csv_path, int jobs);

struct VolumeReport {
    std::string group;
    std::size_t sections = 0;
    double slice_distance_um = 0.0;
    std::size_t pixels = 0;
    double volume_um3 = 0.0;
    std::filesystem::path stl_path;  // empty when nothing was written
    std::string warning;
};

// Builds the section stack for one group (pipeline per section, or direct
// mask loads), reports the measurement row and writes <group>.stl.
VolumeReport cmd_volume(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                        const std::string& group, const std::filesystem::path& out_dir,
                        bool from_masks = false);

struct ClassifyReport {
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::size_t skipped_rows = 0;
    double dt_table_accuracy = 0.0;
    double svm_accuracy = 0.0;  // abstentions count as misses
    double dl_accuracy = 0.0;
    double ensemble_accuracy = 0.0;
    double tree_train_accuracy = 0.0;
    double tree_test_accuracy = 0.0;
    std::size_t svm_abstains = 0;
    std::size_t dl_abstains = 0;
    wb::Cuts cuts;
    std::vector<std::string> warnings;
};

// Reads a labeled feature CSV, splits 80/20 stratified by seed, learns the
// discretization and a depth-limited tree on the train side, evaluates the
// three rule systems plus the ensemble on the test side, and writes the
// rule-set JSON files and the per-image report CSV.
ClassifyReport cmd_classify(const std::filesystem::path& features_csv,
                            const std::filesystem::path& rules_dir,
                            const std::filesystem::path& report_csv, double ratio,
                            std::uint64_t seed, int max_depth = 3);

struct EvaluateReport {
    struct PerImage {
        std::string image_id;
        metrics::OverlapReport overlap;
    };
    std::vector<PerImage> rows;
    double mean_jaccard = 0.0;
    double mean_dice = 0.0;
    double pooled_jaccard = 0.0;
    double pooled_dice = 0.0;
    std::size_t skipped = 0;  // entries without annotation
    RunReport run;
};

// Pipeline output vs annotation for every annotated entry; aggregates are
// reported both as per-image means and as pooled pixel counts.
EvaluateReport cmd_evaluate(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                            const std::filesystem::path& out_json, int jobs);

struct PhantomSuiteOptions {
    std::filesystem::path out_dir;
    int sick = 20;
    int healthy = 5;
    std::uint64_t seed = 1;
    int sections = 0;  // per visit; > 0 adds visit1/visit2 stack groups
    int width = 320;
    int height = 320;
    int margin = 16;
    double scan_size_um = 500.0;  // full-frame field of view
    double slice_distance_um = 25.0;
};

// Writes images/, truth/ and manifest.json; returns the manifest path.
std::filesystem::path cmd_phantom(const PhantomSuiteOptions& opt);

// Feature CSV row as consumed by cmd_classify.
struct FeatureRow {
    bio::BiomarkerRecord record;
    std::uint64_t config_hash = 0;
    std::optional<wb::Label> label;
};

void write_feature_csv(const std::vector<FeatureRow>& rows, const std::filesystem::path& path);
std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path);

}  // namespace octa::run
