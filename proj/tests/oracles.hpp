#pragma once

// Deliberately naive reimplementations used as references in tests. They
// share no code with the library beyond the plain data types.

#include "lesann/extraction.hpp"
#include "lesann/metrics.hpp"
#include "lesann/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using lesann::Dims;

inline bool adjacent(const Dims& d, std::int64_t a, std::int64_t b, int connectivity) {
    const auto ca = d.coords(a), cb = d.coords(b);
    const auto dx = std::llabs(ca[0] - cb[0]), dy = std::llabs(ca[1] - cb[1]), dz = std::llabs(ca[2] - cb[2]);
    if (dx > 1 || dy > 1 || dz > 1 || (dx + dy + dz) == 0) return false;
    const auto moved = dx + dy + dz;
    if (connectivity == 6) return moved == 1;
    if (connectivity == 18) return moved <= 2;
    return true;
}

// Neighbours by scanning the 3x3x3 block and filtering with adjacent().
inline std::vector<std::int64_t> neighbours(const Dims& d, std::int64_t i, int connectivity) {
    std::vector<std::int64_t> out;
    const auto c = d.coords(i);
    for (std::int64_t z = c[2] - 1; z <= c[2] + 1; ++z)
        for (std::int64_t y = c[1] - 1; y <= c[1] + 1; ++y)
            for (std::int64_t x = c[0] - 1; x <= c[0] + 1; ++x)
                if (d.contains(x, y, z) && adjacent(d, i, d.index(x, y, z), connectivity)) out.push_back(d.index(x, y, z));
    return out;
}

struct UnionFind {
    std::vector<std::int64_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::int64_t find(std::int64_t x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    }
    void unite(std::int64_t a, std::int64_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

// Components by iterated minimum-label propagation until nothing changes,
// relabelled by size (desc) then smallest member.
inline std::vector<std::vector<std::int64_t>> components(const std::vector<std::uint8_t>& mask, const Dims& d, int connectivity) {
    const auto n = static_cast<std::int64_t>(mask.size());
    std::vector<std::int64_t> label(mask.size(), -1);
    for (std::int64_t i = 0; i < n; ++i)
        if (mask[static_cast<std::size_t>(i)]) label[static_cast<std::size_t>(i)] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::int64_t i = 0; i < n; ++i) {
            if (label[static_cast<std::size_t>(i)] < 0) continue;
            for (auto j : neighbours(d, i, connectivity)) {
                const auto lj = label[static_cast<std::size_t>(j)];
                if (lj >= 0 && lj < label[static_cast<std::size_t>(i)]) {
                    label[static_cast<std::size_t>(i)] = lj;
                    changed = true;
                }
            }
        }
    }
    std::map<std::int64_t, std::vector<std::int64_t>> groups;
    for (std::int64_t i = 0; i < n; ++i)
        if (label[static_cast<std::size_t>(i)] >= 0) groups[label[static_cast<std::size_t>(i)]].push_back(i);
    std::vector<std::vector<std::int64_t>> out;
    for (auto& [_, g] : groups) out.push_back(g);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    return out;
}

// Region-growing reference for the dynamic method: each round the peak is
// found by a full scan, the region is the union-find component of
// {v >= rel * peak} containing the peak, and the region is zeroed.
inline std::vector<std::vector<std::int64_t>> dynamic_regions(const lesann::Volume& conf, double rel, int max_lesions,
                                                              int min_voxels, double min_peak, int connectivity) {
    std::vector<float> work = conf.data;
    const Dims& d = conf.dims;
    std::vector<std::vector<std::int64_t>> out;
    while (static_cast<int>(out.size()) < max_lesions) {
        std::int64_t peak = -1;
        float best = -1.0f;
        for (std::size_t i = 0; i < work.size(); ++i)
            if (work[i] > best) {
                best = work[i];
                peak = static_cast<std::int64_t>(i);
            }
        if (!(best > 0.0f) || best < min_peak) break;
        const double thr = rel * best;
        UnionFind uf(work.size());
        for (std::size_t i = 0; i < work.size(); ++i) {
            if (!(work[i] >= thr)) continue;
            for (auto j : neighbours(d, static_cast<std::int64_t>(i), connectivity))
                if (work[static_cast<std::size_t>(j)] >= thr) uf.unite(static_cast<std::int64_t>(i), j);
        }
        std::vector<std::int64_t> region;
        const auto root = uf.find(peak);
        for (std::size_t i = 0; i < work.size(); ++i)
            if (work[i] >= thr && uf.find(static_cast<std::int64_t>(i)) == root) region.push_back(static_cast<std::int64_t>(i));
        for (auto i : region) work[static_cast<std::size_t>(i)] = 0.0f;
        if (static_cast<int>(region.size()) > min_voxels) out.push_back(region);
    }
    return out;
}

// Otsu by recomputing both class statistics from the raw voxels at every split.
inline double otsu(const lesann::Volume& conf) {
    auto bin = [](float v) { return std::min(255, static_cast<int>(std::floor(static_cast<double>(v) * 256.0))); };
    double best = 0.0;
    int best_k = -1;
    for (int k = 1; k < 256; ++k) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (float v : conf.data) {
            const int b = bin(v);
            const double centre = (b + 0.5) / 256.0;
            if (b < k) {
                n0 += 1;
                s0 += centre;
            } else {
                n1 += 1;
                s1 += centre;
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        const double n = n0 + n1;
        const double between = (n0 / n) * (n1 / n) * std::pow(s0 / n0 - s1 / n1, 2);
        if (between > best * (1 + 1e-12)) {
            best = between;
            best_k = k;
        }
    }
    return best_k / 256.0;
}

// Mann-Whitney U / (n_pos * n_neg) by explicit pairs, ties count one half.
inline double auroc(const std::vector<double>& s, const std::vector<int>& y) {
    double u = 0;
    double np = 0, nn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] == 1) ++np;
        else ++nn;
    }
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) u += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    return u / (np * nn);
}

inline double dice(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    std::set<std::size_t> sa, sb, both;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i]) sa.insert(i);
        if (b[i]) sb.insert(i);
        if (a[i] && b[i]) both.insert(i);
    }
    if (sa.empty() && sb.empty()) return 1.0;
    return 2.0 * static_cast<double>(both.size()) / static_cast<double>(sa.size() + sb.size());
}

inline double iou(const std::vector<std::int64_t>& cand, const std::set<std::int64_t>& gt) {
    std::set<std::int64_t> c(cand.begin(), cand.end());
    std::size_t inter = 0;
    for (auto v : c) inter += gt.count(v);
    const std::size_t uni = c.size() + gt.size() - inter;
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

struct Counts {
    int hits = 0;
    int fps = 0;
};

// Greedy matching of candidates (already in rank order) with explicit sets.
inline Counts match(const std::vector<lesann::LesionCandidate>& cands, const lesann::LabelVolume& gt, double hit) {
    std::map<int, std::set<std::int64_t>> lesions;
    for (std::size_t i = 0; i < gt.data.size(); ++i)
        if (gt.data[i] > 0) lesions[gt.data[i]].insert(static_cast<std::int64_t>(i));
    std::set<int> claimed;
    Counts c;
    for (const auto& cand : cands) {
        int best_l = 0;
        double best = 0;
        for (const auto& [l, vox] : lesions) {
            if (claimed.count(l)) continue;
            const double o = iou(cand.voxels, vox);
            if (o > best) {
                best = o;
                best_l = l;
            }
        }
        if (best_l && best >= hit) {
            claimed.insert(best_l);
            ++c.hits;
        } else {
            ++c.fps;
        }
    }
    return c;
}

struct RecountPoint {
    double threshold;
    double fp_per_case;
    double sensitivity;
};

// FROC by re-running matching from scratch at every distinct peak confidence.
inline std::vector<RecountPoint> froc(const std::vector<lesann::EvalCase>& cases, double hit) {
    std::set<double, std::greater<>> thresholds;
    int total_gt = 0;
    for (const auto& c : cases) {
        for (const auto& k : c.candidates) thresholds.insert(k.peak_confidence);
        total_gt += c.gt.num_labels();
    }
    std::vector<RecountPoint> out;
    for (double t : thresholds) {
        int hits = 0, fps = 0;
        for (const auto& c : cases) {
            std::vector<lesann::LesionCandidate> kept;
            for (const auto& k : c.candidates)
                if (k.peak_confidence >= t) kept.push_back(k);
            std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.peak_confidence > b.peak_confidence; });
            const auto m = match(kept, c.gt, hit);
            hits += m.hits;
            fps += m.fps;
        }
        out.push_back({t, static_cast<double>(fps) / static_cast<double>(cases.size()), static_cast<double>(hits) / total_gt});
    }
    return out;
}

// Area under a right-continuous step through (x_i, y_i) over [lo, hi]: each
// point's value is held until the next point, zero before the first.
inline double step_area(std::vector<std::pair<double, double>> pts, double lo, double hi) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double area = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double start = std::max(lo, pts[i].first);
        const double end = std::min(hi, i + 1 < pts.size() ? pts[i + 1].first : std::numeric_limits<double>::infinity());
        if (end > start) area += pts[i].second * (end - start);
    }
    return area;
}

} // namespace oracle
