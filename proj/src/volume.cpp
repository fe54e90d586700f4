#include "lesann/volume.hpp"

#include "lesann/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lesann {

namespace fs = std::filesystem;
using nlohmann::json;

Connectivity connectivity_from_int(int n) {
    switch (n) {
    case 6: return Connectivity::six;
    case 18: return Connectivity::eighteen;
    case 26: return Connectivity::twentysix;
    default: throw ValidationError("connectivity must be 6, 18 or 26, got " + std::to_string(n));
    }
}

void validate_geometry(const Dims& dims, const Spacing& spacing) {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
        throw ValidationError("volume dims must be positive");
    for (double s : {spacing.sx, spacing.sy, spacing.sz})
        if (!std::isfinite(s) || s <= 0.0) throw ValidationError("voxel spacing must be positive and finite");
}

Volume Volume::filled(Dims dims, Spacing spacing, float value) {
    validate_geometry(dims, spacing);
    return Volume{dims, spacing, std::vector<float>(static_cast<std::size_t>(dims.size()), value)};
}

void Volume::validate() const {
    validate_geometry(dims, spacing);
    if (static_cast<std::int64_t>(data.size()) != dims.size())
        throw ValidationError("volume payload has " + std::to_string(data.size()) + " values, dims require " +
                              std::to_string(dims.size()));
}

void Volume::validate_confidence() const {
    validate();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float v = data[i];
        if (!(v >= 0.0f && v <= 1.0f))
            throw ValidationError("confidence value out of [0, 1] at voxel " + std::to_string(i));
    }
}

LabelVolume LabelVolume::empty(Dims dims, Spacing spacing) {
    validate_geometry(dims, spacing);
    return LabelVolume{dims, spacing, std::vector<std::int32_t>(static_cast<std::size_t>(dims.size()), 0)};
}

std::int32_t LabelVolume::num_labels() const {
    std::int32_t k = 0;
    for (auto l : data) k = std::max(k, l);
    return k;
}

std::vector<std::vector<std::int64_t>> LabelVolume::label_voxels() const {
    std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(num_labels()));
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data[i] > 0) out[static_cast<std::size_t>(data[i] - 1)].push_back(static_cast<std::int64_t>(i));
    return out;
}

void LabelVolume::validate() const {
    validate_geometry(dims, spacing);
    if (static_cast<std::int64_t>(data.size()) != dims.size())
        throw ValidationError("label payload length does not match dims");
    std::vector<bool> seen;
    for (auto l : data) {
        if (l < 0) throw ValidationError("negative label");
        if (l > 0) {
            if (static_cast<std::size_t>(l) > seen.size()) seen.resize(static_cast<std::size_t>(l), false);
            seen[static_cast<std::size_t>(l - 1)] = true;
        }
    }
    for (std::size_t k = 0; k < seen.size(); ++k)
        if (!seen[k]) throw ValidationError("labels are not contiguous: label " + std::to_string(k + 1) + " is missing");
}

double voxel_volume_cm3(const Spacing& spacing) { return spacing.sx * spacing.sy * spacing.sz / 1000.0; }

fs::path header_path(const fs::path& path) {
    fs::path p = path;
    if (p.extension() == ".json" || p.extension() == ".raw") p.replace_extension();
    return p += ".json";
}

fs::path raw_path(const fs::path& path) {
    fs::path p = path;
    if (p.extension() == ".json" || p.extension() == ".raw") p.replace_extension();
    return p += ".raw";
}

namespace {

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

struct Header {
    Dims dims;
    Spacing spacing;
    VolumeKind kind = VolumeKind::confidence;
};

Header read_header(const fs::path& path) {
    std::ifstream in(header_path(path));
    if (!in) throw IoError("cannot open volume header " + header_path(path).string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed volume header " + header_path(path).string() + ": " + e.what());
    }
    Header h;
    try {
        const auto& d = j.at("dims");
        const auto& s = j.at("spacing_mm");
        if (d.size() != 3 || s.size() != 3) throw ValidationError("dims and spacing_mm must have 3 entries");
        h.dims = {d[0].get<std::int64_t>(), d[1].get<std::int64_t>(), d[2].get<std::int64_t>()};
        h.spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
        if (j.value("dtype", "f32le") != "f32le") throw ValidationError("unsupported dtype " + j.value("dtype", ""));
        if (j.value("order", "x-fastest") != "x-fastest") throw ValidationError("unsupported order " + j.value("order", ""));
        const std::string kind = j.value("kind", "confidence");
        if (kind == "confidence") h.kind = VolumeKind::confidence;
        else if (kind == "label") h.kind = VolumeKind::label;
        else throw ValidationError("unknown volume kind " + kind);
    } catch (const json::exception& e) {
        throw ValidationError("invalid volume header " + header_path(path).string() + ": " + e.what());
    }
    validate_geometry(h.dims, h.spacing);
    return h;
}

std::vector<float> read_payload(const fs::path& path, std::int64_t expected) {
    const fs::path raw = raw_path(path);
    std::ifstream in(raw, std::ios::binary);
    if (!in) throw IoError("cannot open volume payload " + raw.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = std::move(buf).str();
    if (bytes.size() != static_cast<std::size_t>(expected) * 4)
        throw ValidationError("payload " + raw.string() + " holds " + std::to_string(bytes.size() / 4) +
                              " values, header requires " + std::to_string(expected));
    std::vector<float> data(static_cast<std::size_t>(expected));
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, bytes.data() + 4 * i, 4);
        data[i] = std::bit_cast<float>(to_little(u));
    }
    return data;
}

void write_files(const fs::path& path, const Dims& dims, const Spacing& spacing, VolumeKind kind,
                 std::span<const float> data) {
    json j;
    j["dims"] = {dims.nx, dims.ny, dims.nz};
    j["spacing_mm"] = {spacing.sx, spacing.sy, spacing.sz};
    j["dtype"] = "f32le";
    j["order"] = "x-fastest";
    j["kind"] = kind == VolumeKind::confidence ? "confidence" : "label";

    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    {
        std::ofstream out(header_path(path));
        if (!out) throw IoError("cannot write " + header_path(path).string());
        out << j.dump(2) << '\n';
    }
    std::string bytes(data.size() * 4, '\0');
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::uint32_t u = to_little(std::bit_cast<std::uint32_t>(data[i]));
        std::memcpy(bytes.data() + 4 * i, &u, 4);
    }
    std::ofstream out(raw_path(path), std::ios::binary);
    if (!out) throw IoError("cannot write " + raw_path(path).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + raw_path(path).string());
}

} // namespace

Volume read_volume(const fs::path& path) {
    const Header h = read_header(path);
    Volume v{h.dims, h.spacing, read_payload(path, h.dims.size())};
    if (h.kind == VolumeKind::confidence) v.validate_confidence();
    return v;
}

LabelVolume read_label_volume(const fs::path& path) {
    const Header h = read_header(path);
    if (h.kind != VolumeKind::label) throw ValidationError(header_path(path).string() + " is not a label volume");
    const auto raw = read_payload(path, h.dims.size());
    LabelVolume v{h.dims, h.spacing, std::vector<std::int32_t>(raw.size())};
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const float f = raw[i];
        if (!(f >= 0.0f) || f != std::floor(f) || f > 16777216.0f)
            throw ValidationError("label payload holds a non-integer or negative value");
        v.data[i] = static_cast<std::int32_t>(f);
    }
    v.validate();
    return v;
}

void write_volume(const Volume& v, const fs::path& path, VolumeKind kind) {
    v.validate();
    if (kind == VolumeKind::confidence) v.validate_confidence();
    write_files(path, v.dims, v.spacing, kind, v.data);
}

void write_label_volume(const LabelVolume& v, const fs::path& path) {
    v.validate();
    std::vector<float> data(v.data.begin(), v.data.end());
    write_files(path, v.dims, v.spacing, VolumeKind::label, data);
}

} // namespace lesann
