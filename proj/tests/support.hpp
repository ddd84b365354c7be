#pragma once

#include <filesystem>
#include <sstream>
#include <string>

#include "empcq/io.hpp"

namespace empcq::test {

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(EMPCQ_FIXTURE_DIR) / name;
}

inline PwaPartition load_fixture(const std::string& name) {
    return load_partition(fixture_path(name));
}

inline PwaPartition partition_from_string(const std::string& text,
                                          const LoadOptions& opts = {}) {
    std::istringstream in(text);
    return load_partition(in, opts);
}

}  // namespace empcq::test
