#pragma once

#include "lesann/random.hpp"
#include "lesann/volume.hpp"

#include <filesystem>
#include <string>

namespace testing {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() / ("lesann_test_" + name);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

private:
    std::filesystem::path path_;
};

inline lesann::Volume random_volume(lesann::Dims d, std::uint64_t seed, double density = 1.0) {
    lesann::StreamRng rng(seed, 0);
    auto v = lesann::Volume::filled(d, {1, 1, 1});
    for (auto& x : v.data) x = rng.uniform() < density ? static_cast<float>(rng.uniform()) : 0.0f;
    return v;
}

} // namespace testing
