#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace buzzcast::test_support {

inline std::filesystem::path data_dir() { return BUZZCAST_TEST_DATA_DIR; }
inline std::filesystem::path sample_dir() { return data_dir() / "sample"; }
inline std::filesystem::path lexicon_dir() { return data_dir() / "lexicons"; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("buzzcast-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
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
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace buzzcast::test_support
