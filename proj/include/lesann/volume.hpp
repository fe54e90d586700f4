#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lesann {

struct Dims {
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t nz = 0;

    std::int64_t size() const { return nx * ny * nz; }
    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const { return x + nx * (y + ny * z); }
    std::array<std::int64_t, 3> coords(std::int64_t i) const { return {i % nx, (i / nx) % ny, i / (nx * ny)}; }
    bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
    }

    friend bool operator==(const Dims&, const Dims&) = default;
};

// Millimetres per voxel along x, y, z.
struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    friend bool operator==(const Spacing&, const Spacing&) = default;
};

enum class VolumeKind { confidence, label };

enum class Connectivity : int { six = 6, eighteen = 18, twentysix = 26 };

Connectivity connectivity_from_int(int n);

// Dense scalar field stored x-fastest.
struct Volume {
    Dims dims;
    Spacing spacing;
    std::vector<float> data;

    static Volume filled(Dims dims, Spacing spacing, float value = 0.0f);

    float& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    float operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }
    float at(std::int64_t x, std::int64_t y, std::int64_t z) const { return (*this)[dims.index(x, y, z)]; }
    float& at(std::int64_t x, std::int64_t y, std::int64_t z) { return (*this)[dims.index(x, y, z)]; }

    // Throws ValidationError on bad dims/spacing or payload length.
    void validate() const;
    // validate() plus 0 <= v <= 1 for every voxel.
    void validate_confidence() const;

    friend bool operator==(const Volume&, const Volume&) = default;
};

// Integer labels, 0 = background, components 1..K.
struct LabelVolume {
    Dims dims;
    Spacing spacing;
    std::vector<std::int32_t> data;

    static LabelVolume empty(Dims dims, Spacing spacing);

    std::int32_t operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }
    std::int32_t num_labels() const;
    // Linear indices per label; element k holds label k+1.
    std::vector<std::vector<std::int64_t>> label_voxels() const;

    void validate() const;

    friend bool operator==(const LabelVolume&, const LabelVolume&) = default;
};

void validate_geometry(const Dims& dims, const Spacing& spacing);

double voxel_volume_cm3(const Spacing& spacing);

// `path` may name the header (`x.json`), the payload (`x.raw`) or the stem (`x`).
Volume read_volume(const std::filesystem::path& path);
LabelVolume read_label_volume(const std::filesystem::path& path);
void write_volume(const Volume& v, const std::filesystem::path& path, VolumeKind kind = VolumeKind::confidence);
void write_label_volume(const LabelVolume& v, const std::filesystem::path& path);

// Header and payload paths for a volume stem.
std::filesystem::path header_path(const std::filesystem::path& path);
std::filesystem::path raw_path(const std::filesystem::path& path);

// Maximal connected foreground regions of a 0/1 mask, labelled 1..K by
// descending size, ties broken by smallest linear index.
LabelVolume connected_components(const Volume& mask, Connectivity connectivity = Connectivity::twentysix);

// Same ordering as connected_components, returned as sorted voxel lists.
std::vector<std::vector<std::int64_t>> component_voxels(std::span<const std::uint8_t> mask, const Dims& dims,
                                                        Connectivity connectivity);

// Neighbour offsets (dx, dy, dz) for the given connectivity.
std::span<const std::array<int, 3>> neighbour_offsets(Connectivity connectivity);

} // namespace lesann
