#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dermseg/image.hpp"

namespace dermseg {

namespace fs = std::filesystem;

inline const std::string kMaskSuffix = "_segmentation.png";
inline const std::string kPredSuffix = "_pred.png";
inline const std::string kOverlaySuffix = "_overlay.png";

struct DatasetEntry {
    std::string image_id;
    fs::path image_path;
    std::optional<fs::path> mask_path;
    std::string class_name;  // empty when unlabeled
};

struct DatasetIndex {
    std::vector<DatasetEntry> entries;  // sorted by image_id

    [[nodiscard]] std::size_t masked_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.mask_path.has_value(); }));
    }
};

namespace detail {

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline bool truthy(const std::string& v)
{
    try {
        return std::stod(v) >= 0.5;
    } catch (...) {
        return false;
    }
}

// Either `image_id,class` or the challenge layout `image_id,melanoma,seborrheic_keratosis`
// (both zero means nevus).
inline std::map<std::string, std::string> read_labels(const fs::path& csv)
{
    std::ifstream in(csv);
    if (!in) throw Error("cannot read " + csv.string());
    std::string line;
    if (!std::getline(in, line)) return {};
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(header[i]) == name) return static_cast<int>(i);
        }
        return -1;
    };
    const int id_col = column("image_id");
    const int class_col = column("class");
    const int mel_col = column("melanoma");
    const int sk_col = column("seborrheic_keratosis");
    if (id_col < 0 || (class_col < 0 && (mel_col < 0 || sk_col < 0))) {
        throw Error(csv.string() + ": expected columns image_id,class or image_id,melanoma,seborrheic_keratosis");
    }
    std::map<std::string, std::string> labels;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        auto cell = [&](int col) { return col < static_cast<int>(cells.size()) ? cells[static_cast<std::size_t>(col)] : std::string(); };
        std::string cls;
        if (class_col >= 0) {
            cls = cell(class_col);
        } else if (truthy(cell(mel_col))) {
            cls = "melanoma";
        } else if (truthy(cell(sk_col))) {
            cls = "seborrheic_keratosis";
        } else {
            cls = "nevus";
        }
        labels[cell(id_col)] = cls;
    }
    return labels;
}

inline std::vector<fs::path> sorted_listing(const fs::path& dir)
{
    std::vector<fs::path> out;
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) throw Error("cannot read directory " + dir.string() + ": " + ec.message());
    for (const auto& e : it) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// Mask search order: alongside the images, a masks/ subdirectory, then sibling
// directories whose name mentions masks or ground truth.
inline std::vector<fs::path> mask_dirs(const fs::path& root)
{
    std::vector<fs::path> dirs{root};
    if (fs::is_directory(root / "masks")) dirs.push_back(root / "masks");
    const fs::path canon = fs::weakly_canonical(root);
    const fs::path parent = canon.parent_path();
    if (!parent.empty() && parent != canon && fs::is_directory(parent)) {
        for (const auto& p : sorted_listing(parent)) {
            if (!fs::is_directory(p) || p == canon) continue;
            const std::string name = lower(p.filename().string());
            if (name.find("mask") != std::string::npos || name.find("groundtruth") != std::string::npos ||
                name.find("ground_truth") != std::string::npos) {
                dirs.push_back(p);
            }
        }
    }
    return dirs;
}

}  // namespace detail

/// Images are `*.jpg`/`*.jpeg`; the mask of `X.jpg` is `X_segmentation.png`.
/// Optional `labels.csv` in the root assigns classes. Entries are sorted by id.
inline DatasetIndex index_dataset(const fs::path& root)
{
    if (!fs::is_directory(root)) throw Error("dataset directory not found: " + root.string());
    std::map<std::string, fs::path> images;
    for (const auto& p : detail::sorted_listing(root)) {
        if (!fs::is_regular_file(p)) continue;
        const std::string ext = detail::lower(p.extension().string());
        if (ext != ".jpg" && ext != ".jpeg") continue;
        const std::string id = p.stem().string();
        if (!images.emplace(id, p).second) throw Error("duplicate image id '" + id + "' in " + root.string());
    }
    std::map<std::string, std::string> labels;
    if (fs::is_regular_file(root / "labels.csv")) labels = detail::read_labels(root / "labels.csv");

    const auto dirs = images.empty() ? std::vector<fs::path>{} : detail::mask_dirs(root);
    DatasetIndex index;
    for (const auto& [id, path] : images) {
        DatasetEntry e{id, path, std::nullopt, {}};
        for (const auto& d : dirs) {
            const fs::path candidate = d / (id + kMaskSuffix);
            if (fs::is_regular_file(candidate)) {
                e.mask_path = candidate;
                break;
            }
        }
        if (auto it = labels.find(id); it != labels.end()) e.class_name = it->second;
        index.entries.push_back(std::move(e));
    }
    return index;
}

}  // namespace dermseg
