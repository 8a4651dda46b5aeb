#pragma once

// Shared helpers for the test suites: data paths, a scratch directory and a
// small seeded generator for property tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(FDPLAN_DATA_DIR) + "/" + name; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("fdplan_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Independent of the library's Rng so property inputs do not share its code.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : e_(seed) {}
    double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(e_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin(double p = 0.5) { return unit() < p; }
    // Multiples of 1/4 keep sums exact in binary floating point.
    double dyadic(int max_quarters) { return integer(0, max_quarters) * 0.25; }
    std::vector<double> reals(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = real(lo, hi);
        return v;
    }

private:
    double unit() { return static_cast<double>(e_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 e_;
};

} // namespace testing_support
