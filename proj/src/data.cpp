#include "clut/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "clut/errors.hpp"
#include "clut/encoder.hpp"
#include "clut/png_io.hpp"
#include "clut/rng.hpp"

namespace clut {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t checksum_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [in, tgt] : pairs) {
        h = fnv1a(h, in);
        h = fnv1a(h, "\t");
        h = fnv1a(h, tgt);
        h = fnv1a(h, "\n");
    }
    return h;
}

std::map<std::string, std::string> stems_in(const std::filesystem::path& dir) {
    std::map<std::string, std::string> stems;  // stem -> relative filename
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string stem = entry.path().stem().string();
        auto [it, inserted] = stems.emplace(stem, entry.path().filename().string());
        if (!inserted)
            throw DataError("duplicate stem '" + stem + "' in " + dir.string() + ": " +
                            it->second + " and " + entry.path().filename().string());
    }
    return stems;
}

PairedDataset scan_dirs(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        throw DataError("dataset root does not exist: " + root.string());
    const auto input_dir = root / "input";
    const auto target_dir = root / "target";
    if (!std::filesystem::is_directory(input_dir))
        throw DataError("missing input/ directory under " + root.string());
    if (!std::filesystem::is_directory(target_dir))
        throw DataError("missing target/ directory under " + root.string());

    const auto inputs = stems_in(input_dir);
    const auto targets = stems_in(target_dir);

    PairedDataset ds;
    ds.base = root;
    for (const auto& [stem, fname] : inputs) {
        auto it = targets.find(stem);
        if (it == targets.end()) {
            ds.warnings.push_back("input without target: input/" + fname);
            continue;
        }
        ds.pairs.emplace_back("input/" + fname, "target/" + it->second);
        ds.ids.push_back(stem);
    }
    for (const auto& [stem, fname] : targets)
        if (!inputs.contains(stem))
            ds.warnings.push_back("target without input: target/" + fname);

    if (ds.pairs.empty())
        throw DataError("no matched input/target pairs under " + root.string());
    ds.manifest_checksum = checksum_pairs(ds.pairs);
    return ds;
}

PairedDataset scan_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw DataError("cannot open manifest " + manifest.string());

    PairedDataset ds;
    ds.base = manifest.parent_path();
    std::set<std::string> seen;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::size_t tab = line.find('\t', first);
        if (tab == std::string::npos)
            throw ParseError(manifest.string(), line_no,
                             "expected input_relpath<TAB>target_relpath");
        std::string input = line.substr(first, tab - first);
        std::string target = line.substr(tab + 1);
        if (input.empty() || target.empty())
            throw ParseError(manifest.string(), line_no, "empty path in manifest");
        if (!seen.insert(input).second)
            throw ParseError(manifest.string(), line_no,
                             "duplicate input path '" + input + "'");
        ds.pairs.emplace_back(std::move(input), std::move(target));
    }
    if (ds.pairs.empty())
        throw DataError("manifest lists no pairs: " + manifest.string());

    std::sort(ds.pairs.begin(), ds.pairs.end());
    ds.ids.reserve(ds.pairs.size());
    for (const auto& [input, target] : ds.pairs)
        ds.ids.push_back(std::filesystem::path(input).stem().string());
    ds.manifest_checksum = checksum_pairs(ds.pairs);
    return ds;
}

} // namespace

PairedDataset scan_dataset(const std::filesystem::path& root, const std::string& layout) {
    if (layout == "dirs") return scan_dirs(root);
    if (layout == "manifest") return scan_manifest(root);
    throw ConfigError("unknown dataset layout '" + layout + "' (use dirs or manifest)");
}

namespace {

Image resize_bilinear(const Image& img, int out_h, int out_w) {
    Image out(out_h, out_w);
    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;
#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < out_h; ++oy) {
        const double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = y0 + 1;
        y0 = std::clamp(y0, 0, img.height - 1);
        y1 = std::clamp(y1, 0, img.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = x0 + 1;
            x0 = std::clamp(x0, 0, img.width - 1);
            x1 = std::clamp(x1, 0, img.width - 1);
            for (int c = 0; c < 3; ++c) {
                const double top =
                    (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
                const double bot =
                    (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
                out.at(oy, ox, c) = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

} // namespace

Image preprocess(const Image& img, int size, bool area) {
    if (img.height < 1 || img.width < 1) throw InvalidArgument("preprocess: empty image");
    if (img.height == size && img.width == size) return img;
    return area ? resize_area(img, size, size) : resize_bilinear(img, size, size);
}

std::vector<std::vector<std::size_t>> plan_batches(std::size_t count, int batch_size,
                                                   std::uint64_t seed, int epoch) {
    if (batch_size < 1) throw InvalidArgument("plan_batches: batch_size must be >= 1");
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    Rng rng(Rng::mix(Rng::mix(seed, 0x62617463686573ULL), static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t end = std::min(count, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

std::pair<Image, Image> load_pair(const PairedDataset& ds, std::size_t index, int size,
                                  bool area) {
    const auto& [input_rel, target_rel] = ds.pairs.at(index);
    Image input, target;
    try {
        input = read_png(ds.base / input_rel);
    } catch (const IoError& e) {
        throw DataError(std::string("failed to load ") + input_rel + ": " + e.what());
    }
    try {
        target = read_png(ds.base / target_rel);
    } catch (const IoError& e) {
        throw DataError(std::string("failed to load ") + target_rel + ": " + e.what());
    }
    return {preprocess(input, size, area), preprocess(target, size, area)};
}

Batch load_batch(const PairedDataset& ds, const std::vector<std::size_t>& indices,
                 int size, bool area) {
    Batch batch;
    batch.inputs.reserve(indices.size());
    batch.targets.reserve(indices.size());
    for (std::size_t i : indices) {
        auto [input, target] = load_pair(ds, i, size, area);
        batch.inputs.push_back(std::move(input));
        batch.targets.push_back(std::move(target));
        batch.ids.push_back(ds.ids.at(i));
    }
    return batch;
}

} // namespace clut
