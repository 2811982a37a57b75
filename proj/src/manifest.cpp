#include "octa/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace octa::run {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

}  // namespace

void validate_manifest(const DatasetManifest& m, bool check_files) {
    if (m.scan_size_um <= 0.0 || m.pixels_per_side <= 0 || m.slice_distance_um <= 0.0)
        throw std::invalid_argument("manifest: geometry values must be positive");

    std::set<std::string> ids;
    std::map<std::string, std::set<int>> groups;
    for (const ManifestEntry& e : m.entries) {
        if (e.image_id.empty()) throw std::invalid_argument("manifest: entry with empty image_id");
        if (!ids.insert(e.image_id).second)
            throw std::invalid_argument("manifest: duplicate image_id " + e.image_id);
        if (check_files) {
            if (!std::filesystem::exists(e.path))
                throw std::invalid_argument("manifest: missing file " + e.path.string());
            if (e.annotation && !std::filesystem::exists(*e.annotation))
                throw std::invalid_argument("manifest: missing annotation " + e.annotation->string());
        }
        if (!e.stack_group.empty()) {
            if (e.section_index < 0)
                throw std::invalid_argument("manifest: stack entry without section_index: " + e.image_id);
            if (!groups[e.stack_group].insert(e.section_index).second)
                throw std::invalid_argument("manifest: duplicate section index in group " + e.stack_group);
        }
    }
    for (const auto& [group, sections] : groups) {
        if (*sections.begin() != 0 || *sections.rbegin() != static_cast<int>(sections.size()) - 1)
            throw std::invalid_argument("manifest: group " + group +
                                        " section indices are not contiguous from 0");
    }
}

DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    DatasetManifest m;
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        if (g.contains("scan_size_um")) g.at("scan_size_um").get_to(m.scan_size_um);
        if (g.contains("pixels_per_side")) g.at("pixels_per_side").get_to(m.pixels_per_side);
    }
    if (j.contains("slice_distance_um")) j.at("slice_distance_um").get_to(m.slice_distance_um);

    for (const auto& ej : j.value("entries", nlohmann::json::array())) {
        ManifestEntry e;
        e.image_id = ej.at("image_id").get<std::string>();
        e.path = resolve(base_dir, ej.at("path").get<std::string>());
        if (ej.contains("crop")) {
            const auto& c = ej.at("crop");
            e.crop = CropRect{c.at("x").get<int>(), c.at("y").get<int>(), c.at("w").get<int>(),
                              c.at("h").get<int>()};
        }
        if (ej.contains("label")) {
            const auto label = wb::parse_label(ej.at("label").get<std::string>());
            if (!label)
                throw std::invalid_argument("manifest: label must be Sick or NotSick for " + e.image_id);
            e.label = label;
        }
        if (ej.contains("annotation")) e.annotation = resolve(base_dir, ej.at("annotation").get<std::string>());
        if (ej.contains("stack_group")) e.stack_group = ej.at("stack_group").get<std::string>();
        if (ej.contains("section_index")) e.section_index = ej.at("section_index").get<int>();
        m.entries.push_back(std::move(e));
    }
    return m;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (const ManifestEntry& e : m.entries) {
        nlohmann::json ej{{"image_id", e.image_id}, {"path", e.path.generic_string()}};
        if (e.crop)
            ej["crop"] = {{"x", e.crop->x}, {"y", e.crop->y}, {"w", e.crop->w}, {"h", e.crop->h}};
        if (e.label) ej["label"] = wb::to_string(*e.label);
        if (e.annotation) ej["annotation"] = e.annotation->generic_string();
        if (!e.stack_group.empty()) {
            ej["stack_group"] = e.stack_group;
            ej["section_index"] = e.section_index;
        }
        entries.push_back(std::move(ej));
    }
    return nlohmann::json{
        {"geometry", {{"scan_size_um", m.scan_size_um}, {"pixels_per_side", m.pixels_per_side}}},
        {"slice_distance_um", m.slice_distance_um},
        {"entries", entries}};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    nlohmann::json j;
    in >> j;
    DatasetManifest m = manifest_from_json(j, path.parent_path());
    validate_manifest(m, true);
    return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    // Entry paths are stored as written; callers emitting portable suites
    // should fill them in relative to the manifest location.
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << manifest_to_json(m).dump(2) << "\n";
}

}  // namespace octa::run
