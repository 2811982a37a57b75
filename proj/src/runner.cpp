#include "octa/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "octa/image_io.hpp"
#include "octa/volume.hpp"

namespace octa::run {

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

bool RunReport::all_ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const EntryStatus& e) { return e.ok; });
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (std::thread& th : pool) th.join();
}

RunReport cmd_process(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                      const RunOptions& opt) {
    cfg.validate();
    std::filesystem::create_directories(opt.out_dir / "masks");
    if (opt.dump_stages) std::filesystem::create_directories(opt.out_dir / "stages");

    RunReport report;
    report.config_hash = seg::config_hash(cfg);
    report.entries.resize(manifest.entries.size());

    parallel_for(manifest.entries.size(), opt.jobs, [&](std::size_t i) {
        const ManifestEntry& entry = manifest.entries[i];
        EntryStatus& status = report.entries[i];
        status.image_id = entry.image_id;
        try {
            const GrayImage img = load_gray(entry.path, manifest.scan_size_um);
            seg::PipelineTrace trace;
            const BinaryMask mask = seg::run_pipeline(img, cfg, manifest.crop_for(entry, img),
                                                      opt.dump_stages ? &trace : nullptr);
            save_mask(mask, opt.out_dir / "masks" / (entry.image_id + ".pgm"));
            if (opt.dump_stages) {
                const auto dir = opt.out_dir / "stages" / entry.image_id;
                std::filesystem::create_directories(dir);
                for (const auto& [name, stage] : trace.stages)
                    save_gray(stage, dir / (name + ".pgm"));
            }
            if (mask.count_true() == 0) status.message = "empty mask";
        } catch (const std::exception& e) {
            status.ok = false;
            status.message = e.what();
        }
    });

    nlohmann::json entries = nlohmann::json::array();
    for (const EntryStatus& s : report.entries)
        entries.push_back({{"image_id", s.image_id}, {"ok", s.ok}, {"message", s.message}});
    std::ofstream out(opt.out_dir / "run_report.json", std::ios::trunc);
    out << nlohmann::json{{"config_hash", hash_hex(report.config_hash)}, {"entries", entries}}.dump(2)
        << "\n";
    return report;
}

void write_feature_csv(const std::vector<FeatureRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "image_id,object_pixels,filled_pixels,mcnv_area_mm2,total_area_mm2,"
           "vessel_density,config_hash,label\n";
    for (const FeatureRow& row : rows) {
        const bio::BiomarkerRecord& r = row.record;
        out << csv_escape(r.image_id) << ',' << r.object_pixels << ',' << r.filled_pixels << ','
            << fmt_double(r.mcnv_area_mm2) << ',' << fmt_double(r.total_area_mm2) << ','
            << fmt_double(r.vessel_density) << ',' << hash_hex(row.config_hash) << ','
            << (row.label ? wb::to_string(*row.label) : "") << '\n';
    }
}

std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty feature CSV: " + path.string());

    std::vector<FeatureRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < 8) throw std::runtime_error("feature CSV row with too few columns");
        FeatureRow row;
        row.record.image_id = f[0];
        row.record.object_pixels = std::stoull(f[1]);
        row.record.filled_pixels = std::stoull(f[2]);
        row.record.mcnv_area_mm2 = std::stod(f[3]);
        row.record.total_area_mm2 = std::stod(f[4]);
        row.record.vessel_density = std::stod(f[5]);
        row.record.empty_mask = row.record.object_pixels == 0;
        row.config_hash = std::stoull(f[6], nullptr, 16);
        row.label = wb::parse_label(f[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

RunReport cmd_features(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                       const std::filesystem::path& csv_path, int jobs) {
    cfg.validate();
    const PixelGeometry geom = manifest.geometry();

    RunReport report;
    report.config_hash = seg::config_hash(cfg);
    report.entries.resize(manifest.entries.size());
    std::vector<std::optional<FeatureRow>> rows(manifest.entries.size());

    parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& entry = manifest.entries[i];
        EntryStatus& status = report.entries[i];
        status.image_id = entry.image_id;
        try {
            const GrayImage img = load_gray(entry.path, manifest.scan_size_um);
            FeatureRow row;
            row.record = bio::extract_record(entry.image_id, img, cfg,
                                             manifest.crop_for(entry, img), geom);
            row.config_hash = report.config_hash;
            row.label = entry.label;
            if (row.record.empty_mask) status.message = "empty mask";
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            status.ok = false;
            status.message = e.what();
        }
    });

    std::vector<FeatureRow> ok_rows;
    for (auto& row : rows)
        if (row) ok_rows.push_back(std::move(*row));
    if (!csv_path.parent_path().empty()) std::filesystem::create_directories(csv_path.parent_path());
    write_feature_csv(ok_rows, csv_path);
    return report;
}

VolumeReport cmd_volume(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                        const std::string& group, const std::filesystem::path& out_dir,
                        bool from_masks) {
    cfg.validate();
    std::vector<const ManifestEntry*> sections;
    for (const ManifestEntry& e : manifest.entries)
        if (e.stack_group == group) sections.push_back(&e);
    if (sections.empty()) throw std::invalid_argument("volume: no sections in group " + group);
    std::sort(sections.begin(), sections.end(),
              [](const ManifestEntry* a, const ManifestEntry* b) {
                  return a->section_index < b->section_index;
              });

    vol::SectionStack stack;
    stack.slice_distance_um = manifest.slice_distance_um;
    for (const ManifestEntry* e : sections) {
        if (from_masks) {
            stack.sections.push_back(load_mask(e->path, manifest.scan_size_um));
        } else {
            const GrayImage img = load_gray(e->path, manifest.scan_size_um);
            stack.sections.push_back(seg::run_pipeline(img, cfg, manifest.crop_for(*e, img)));
        }
    }

    const PixelGeometry geom = manifest.geometry();
    VolumeReport report;
    report.group = group;
    report.sections = stack.sections.size();
    report.slice_distance_um = stack.slice_distance_um;
    for (const BinaryMask& m : stack.sections) report.pixels += m.count_true();
    report.volume_um3 = vol::stack_volume_um3(stack, geom);

    std::filesystem::create_directories(out_dir);
    if (report.pixels == 0) {
        report.warning = "all sections empty, no STL written";
    } else {
        const vol::TriangleMesh mesh = vol::voxel_surface(stack, geom);
        report.stl_path = out_dir / (group + ".stl");
        vol::export_stl(mesh, report.stl_path);
    }

    std::ofstream out(out_dir / (group + "_volume.json"), std::ios::trunc);
    out << nlohmann::json{{"group", report.group},
                          {"sections", report.sections},
                          {"distance_um", report.slice_distance_um},
                          {"pixels", report.pixels},
                          {"volume_um3", report.volume_um3},
                          {"stl", report.stl_path.filename().generic_string()},
                          {"warning", report.warning}}
               .dump(2)
        << "\n";
    return report;
}

namespace {

struct LabeledRow {
    const FeatureRow* row;
    wb::Label truth;
};

double safe_accuracy(const std::vector<wb::Label>& pred, const std::vector<wb::Label>& truth) {
    return pred.empty() ? 0.0 : wb::accuracy(pred, truth);
}

}  // namespace

ClassifyReport cmd_classify(const std::filesystem::path& features_csv,
                            const std::filesystem::path& rules_dir,
                            const std::filesystem::path& report_csv, double ratio,
                            std::uint64_t seed, int max_depth) {
    const std::vector<FeatureRow> all_rows = read_feature_csv(features_csv);

    ClassifyReport rep;
    std::vector<LabeledRow> rows;
    for (const FeatureRow& r : all_rows) {
        if (!r.label) {
            ++rep.skipped_rows;
            rep.warnings.push_back("skipping unlabeled row " + r.record.image_id);
            continue;
        }
        rows.push_back({&r, *r.label});
    }
    if (rows.size() < 3) throw std::runtime_error("classify: fewer than 3 labeled rows");

    std::vector<std::string> ids;
    std::vector<wb::Label> labels;
    for (const LabeledRow& r : rows) {
        ids.push_back(r.row->record.image_id);
        labels.push_back(r.truth);
    }
    const auto [train_ids, test_ids] = wb::train_test_split(ids, labels, ratio, seed);
    rep.train_count = train_ids.size();
    rep.test_count = test_ids.size();
    if (test_ids.empty()) rep.warnings.push_back("test split is empty");

    std::map<std::string, const LabeledRow*> by_id;
    for (const LabeledRow& r : rows) by_id[r.row->record.image_id] = &r;

    std::vector<bio::BiomarkerRecord> train_records;
    std::vector<wb::Label> train_labels;
    for (const std::string& id : train_ids) {
        train_records.push_back(by_id.at(id)->row->record);
        train_labels.push_back(by_id.at(id)->truth);
    }
    const bool train_has_both =
        std::find(train_labels.begin(), train_labels.end(), wb::Label::Sick) != train_labels.end() &&
        std::find(train_labels.begin(), train_labels.end(), wb::Label::NotSick) != train_labels.end();
    if (!train_has_both) throw std::runtime_error("classify: train split lacks a class");

    rep.cuts = wb::discretize_supervised(train_records, train_labels);
    if (rep.cuts.m_fallback) rep.warnings.push_back("mCNV discretization fell back to range tertiles");
    if (rep.cuts.v_fallback) rep.warnings.push_back("vessel discretization fell back to range tertiles");

    const wb::DecisionTree tree = wb::train_decision_tree(train_records, train_labels, max_depth);
    {
        std::vector<wb::Label> pred;
        for (const bio::BiomarkerRecord& r : train_records) pred.push_back(tree.classify(r));
        rep.tree_train_accuracy = safe_accuracy(pred, train_labels);
    }

    std::filesystem::create_directories(rules_dir);
    auto dump_rules = [&](const char* name, const std::vector<wb::Rule>& rules) {
        std::ofstream out(rules_dir / name, std::ios::trunc);
        out << nlohmann::json{{"rules", wb::rules_to_json(rules)}}.dump(2) << "\n";
    };
    dump_rules("dt_table.json", wb::dt_table_rules());
    dump_rules("svm_table.json", wb::svm_table_rules());
    dump_rules("dl_table.json", wb::dl_table_rules());
    dump_rules("dt_trained.json", wb::extract_dt_rules(tree));
    {
        std::ofstream out(rules_dir / "cuts.json", std::ios::trunc);
        out << nlohmann::json{{"m_cut1", rep.cuts.m_cut1},
                              {"m_cut2", rep.cuts.m_cut2},
                              {"v_cut1", rep.cuts.v_cut1},
                              {"v_cut2", rep.cuts.v_cut2},
                              {"m_fallback", rep.cuts.m_fallback},
                              {"v_fallback", rep.cuts.v_fallback}}
                   .dump(2)
            << "\n";
    }

    if (!report_csv.parent_path().empty())
        std::filesystem::create_directories(report_csv.parent_path());
    std::ofstream out(report_csv, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + report_csv.string());
    out << "image_id,dt,svm,dl,ensemble,truth\n";

    std::vector<wb::Label> truth, dt_pred, ensemble_pred, tree_pred;
    std::size_t svm_hits = 0, dl_hits = 0;
    for (const std::string& id : test_ids) {
        const LabeledRow& r = *by_id.at(id);
        const wb::DiscretizedFeatures f = wb::apply_cuts(r.row->record, rep.cuts);
        const wb::Label dt = wb::dt_rules_classify(r.row->record);
        const wb::Vote svm = wb::svm_rules_classify(f);
        const wb::Vote dl = wb::dl_rules_classify(f);
        const wb::Label ens = wb::ensemble_classify(r.row->record, f);

        truth.push_back(r.truth);
        dt_pred.push_back(dt);
        ensemble_pred.push_back(ens);
        tree_pred.push_back(tree.classify(r.row->record));
        if (svm == wb::Vote::Abstain) ++rep.svm_abstains;
        else if (svm == wb::to_vote(r.truth)) ++svm_hits;
        if (dl == wb::Vote::Abstain) ++rep.dl_abstains;
        else if (dl == wb::to_vote(r.truth)) ++dl_hits;

        out << csv_escape(id) << ',' << wb::to_string(dt) << ',' << wb::to_string(svm) << ','
            << wb::to_string(dl) << ',' << wb::to_string(ens) << ',' << wb::to_string(r.truth)
            << '\n';
    }

    rep.dt_table_accuracy = safe_accuracy(dt_pred, truth);
    rep.ensemble_accuracy = safe_accuracy(ensemble_pred, truth);
    rep.tree_test_accuracy = safe_accuracy(tree_pred, truth);
    const double n_test = static_cast<double>(test_ids.size());
    rep.svm_accuracy = test_ids.empty() ? 0.0 : static_cast<double>(svm_hits) / n_test;
    rep.dl_accuracy = test_ids.empty() ? 0.0 : static_cast<double>(dl_hits) / n_test;
    return rep;
}

EvaluateReport cmd_evaluate(const DatasetManifest& manifest, const seg::PipelineConfig& cfg,
                            const std::filesystem::path& out_json, int jobs) {
    cfg.validate();
    EvaluateReport rep;
    rep.run.config_hash = seg::config_hash(cfg);
    rep.run.entries.resize(manifest.entries.size());
    std::vector<std::optional<EvaluateReport::PerImage>> rows(manifest.entries.size());

    parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& entry = manifest.entries[i];
        EntryStatus& status = rep.run.entries[i];
        status.image_id = entry.image_id;
        if (!entry.annotation) {
            status.message = "no annotation, skipped";
            return;
        }
        try {
            const GrayImage img = load_gray(entry.path, manifest.scan_size_um);
            const BinaryMask mask = seg::run_pipeline(img, cfg, manifest.crop_for(entry, img));
            const BinaryMask truth = load_mask(*entry.annotation, manifest.scan_size_um);
            rows[i] = EvaluateReport::PerImage{entry.image_id, metrics::overlap(mask, truth)};
        } catch (const std::exception& e) {
            status.ok = false;
            status.message = e.what();
        }
    });

    std::size_t pooled_i = 0, pooled_u = 0, pooled_a = 0, pooled_b = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!manifest.entries[i].annotation) ++rep.skipped;
        if (!rows[i]) continue;
        rep.mean_jaccard += rows[i]->overlap.jaccard_index;
        rep.mean_dice += rows[i]->overlap.dice;
        pooled_i += rows[i]->overlap.intersection_px;
        pooled_u += rows[i]->overlap.union_px;
        pooled_a += rows[i]->overlap.a_px;
        pooled_b += rows[i]->overlap.b_px;
        rep.rows.push_back(std::move(*rows[i]));
    }
    if (!rep.rows.empty()) {
        rep.mean_jaccard /= static_cast<double>(rep.rows.size());
        rep.mean_dice /= static_cast<double>(rep.rows.size());
    }
    if (pooled_u > 0) {
        rep.pooled_jaccard = static_cast<double>(pooled_i) / static_cast<double>(pooled_u);
        rep.pooled_dice = 2.0 * static_cast<double>(pooled_i) / static_cast<double>(pooled_a + pooled_b);
    } else if (!rep.rows.empty()) {
        rep.pooled_jaccard = 1.0;
        rep.pooled_dice = 1.0;
    }

    nlohmann::json per_image = nlohmann::json::array();
    for (const auto& row : rep.rows)
        per_image.push_back({{"image_id", row.image_id},
                             {"jaccard_index", row.overlap.jaccard_index},
                             {"jaccard_distance", row.overlap.jaccard_distance},
                             {"dice", row.overlap.dice},
                             {"both_empty", row.overlap.both_empty}});
    if (!out_json.parent_path().empty()) std::filesystem::create_directories(out_json.parent_path());
    std::ofstream out(out_json, std::ios::trunc);
    out << nlohmann::json{{"config_hash", hash_hex(rep.run.config_hash)},
                          {"mean_jaccard", rep.mean_jaccard},
                          {"mean_dice", rep.mean_dice},
                          {"pooled_jaccard", rep.pooled_jaccard},
                          {"pooled_dice", rep.pooled_dice},
                          {"images", per_image}}
               .dump(2)
        << "\n";
    return rep;
}

std::filesystem::path cmd_phantom(const PhantomSuiteOptions& opt) {
    if (opt.sick < 0 || opt.healthy < 0 || opt.sections < 0)
        throw std::invalid_argument("phantom: negative counts");
    std::filesystem::create_directories(opt.out_dir / "images");
    std::filesystem::create_directories(opt.out_dir / "truth");

    DatasetManifest manifest;
    manifest.scan_size_um = opt.scan_size_um;
    manifest.pixels_per_side = opt.width + 2 * opt.margin;
    manifest.slice_distance_um = opt.slice_distance_um;

    std::uint64_t next_seed = opt.seed;
    auto add_phantom = [&](const std::string& id, bool sick, double radius_scale,
                           const std::string& group, int section) {
        phantom::PhantomSpec spec;
        spec.width = opt.width;
        spec.height = opt.height;
        spec.margin = opt.margin;
        spec.seed = next_seed++;
        spec.sick = sick;
        spec.radius_scale = radius_scale;
        const phantom::Phantom ph = phantom::make_phantom(spec);

        save_gray(ph.image, opt.out_dir / "images" / (id + ".pgm"));
        save_mask(ph.truth, opt.out_dir / "truth" / (id + ".pgm"));

        ManifestEntry e;
        e.image_id = id;
        e.path = std::filesystem::path("images") / (id + ".pgm");
        e.crop = ph.crop;
        e.label = sick ? wb::Label::Sick : wb::Label::NotSick;
        e.annotation = std::filesystem::path("truth") / (id + ".pgm");
        e.stack_group = group;
        e.section_index = section;
        manifest.entries.push_back(std::move(e));
    };

    char name[64];
    for (int i = 0; i < opt.sick; ++i) {
        std::snprintf(name, sizeof(name), "sick_%02d", i);
        add_phantom(name, true, 1.0, "", -1);
    }
    for (int i = 0; i < opt.healthy; ++i) {
        std::snprintf(name, sizeof(name), "healthy_%02d", i);
        add_phantom(name, false, 1.0, "", -1);
    }
    for (int visit = 1; visit <= (opt.sections > 0 ? 2 : 0); ++visit) {
        // Visit 2 repeats visit 1's shapes at reduced radius (treatment
        // response), so its volume comes out smaller.
        next_seed = opt.seed + 100000;
        const double scale = visit == 1 ? 1.0 : 0.8;
        for (int s = 0; s < opt.sections; ++s) {
            std::snprintf(name, sizeof(name), "visit%d_s%02d", visit, s);
            add_phantom(name, true, scale, "visit" + std::to_string(visit), s);
        }
    }

    const std::filesystem::path manifest_path = opt.out_dir / "manifest.json";
    save_manifest(manifest, manifest_path);
    return manifest_path;
}

}  // namespace octa::run
