#pragma once

#include <filesystem>
#include <string>

namespace linkmine::testing {

// RAII temp directory under the system temp root; removed recursively on
// destruction.
class ScopedTempDir {
public:
    explicit ScopedTempDir(const std::string& tag);
    ~ScopedTempDir();

    ScopedTempDir(const ScopedTempDir&) = delete;
    ScopedTempDir& operator=(const ScopedTempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

}  // namespace linkmine::testing
