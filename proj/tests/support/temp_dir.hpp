#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

namespace bargrain::testing {

// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        const char* base = std::getenv("BARGRAIN_TEST_TMP");
        path_ = std::filesystem::path(base ? base : std::filesystem::temp_directory_path().string()) /
                ("bargrain_" + name);
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
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

}  // namespace bargrain::testing
