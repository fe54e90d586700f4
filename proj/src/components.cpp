#include "lesann/volume.hpp"

#include "lesann/error.hpp"

#include <algorithm>
#include <cstdlib>

namespace lesann {

namespace {

template <int N>
constexpr auto make_offsets(int max_nonzero) {
    std::array<std::array<int, 3>, N> out{};
    std::size_t k = 0;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nz = (dx != 0) + (dy != 0) + (dz != 0);
                if (nz == 0 || nz > max_nonzero) continue;
                out[k++] = {dx, dy, dz};
            }
    return out;
}

constexpr auto kOffsets6 = make_offsets<6>(1);
constexpr auto kOffsets18 = make_offsets<18>(2);
constexpr auto kOffsets26 = make_offsets<26>(3);

} // namespace

std::span<const std::array<int, 3>> neighbour_offsets(Connectivity connectivity) {
    switch (connectivity) {
    case Connectivity::six: return kOffsets6;
    case Connectivity::eighteen: return kOffsets18;
    case Connectivity::twentysix: return kOffsets26;
    }
    throw ValidationError("unknown connectivity");
}

std::vector<std::vector<std::int64_t>> component_voxels(std::span<const std::uint8_t> mask, const Dims& dims,
                                                        Connectivity connectivity) {
    if (static_cast<std::int64_t>(mask.size()) != dims.size()) throw ValidationError("mask size does not match dims");
    const auto offsets = neighbour_offsets(connectivity);

    std::vector<std::uint8_t> visited(mask.size(), 0);
    std::vector<std::vector<std::int64_t>> components;
    std::vector<std::int64_t> stack;

    for (std::int64_t seed = 0; seed < dims.size(); ++seed) {
        if (!mask[static_cast<std::size_t>(seed)] || visited[static_cast<std::size_t>(seed)]) continue;
        std::vector<std::int64_t> voxels;
        visited[static_cast<std::size_t>(seed)] = 1;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::int64_t i = stack.back();
            stack.pop_back();
            voxels.push_back(i);
            const auto [x, y, z] = dims.coords(i);
            for (const auto& o : offsets) {
                const std::int64_t nx = x + o[0], ny = y + o[1], nz = z + o[2];
                if (!dims.contains(nx, ny, nz)) continue;
                const std::int64_t j = dims.index(nx, ny, nz);
                if (mask[static_cast<std::size_t>(j)] && !visited[static_cast<std::size_t>(j)]) {
                    visited[static_cast<std::size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
        std::sort(voxels.begin(), voxels.end());
        components.push_back(std::move(voxels));
    }

    // Seeds are visited in linear order, so front() is each component's smallest index.
    std::stable_sort(components.begin(), components.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    return components;
}

LabelVolume connected_components(const Volume& mask, Connectivity connectivity) {
    mask.validate();
    std::vector<std::uint8_t> binary(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        const float v = mask.data[i];
        if (v != 0.0f && v != 1.0f) throw ValidationError("connected_components requires a binary (0/1) mask");
        binary[i] = v == 1.0f;
    }
    LabelVolume out = LabelVolume::empty(mask.dims, mask.spacing);
    const auto comps = component_voxels(binary, mask.dims, connectivity);
    for (std::size_t k = 0; k < comps.size(); ++k)
        for (auto i : comps[k]) out.data[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(k + 1);
    return out;
}

} // namespace lesann
