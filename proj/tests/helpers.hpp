#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "melostyle/melostyle.hpp"

namespace testutil {

namespace fs = std::filesystem;

/// Directory removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path = fs::temp_directory_path() / ("melostyle_" + tag + "_" + std::to_string(rng()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline melostyle::CentsTrack cents_track(const std::vector<double>& values, double tonic = 220.0) {
    melostyle::CentsTrack t;
    t.tonic_hz = tonic;
    for (double v : values) t.cents.emplace_back(v);
    return t;
}

inline std::vector<double> sine(std::size_t n, double amp, double hz, double rate = melostyle::kFrameRate,
                                double phase = 0.0) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase);
    return out;
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

#ifdef MELOSTYLE_CLI
/// Runs the CLI binary with `args`, capturing stdout and stderr into files under `dir`.
inline CliResult run_cli(const std::string& args, const TempDir& dir) {
    static int counter = 0;
    const auto tag = std::to_string(counter++);
    const auto out = dir / ("stdout_" + tag), err = dir / ("stderr_" + tag);
    const std::string cmd = std::string("\"") + MELOSTYLE_CLI + "\" " + args + " >\"" + out + "\" 2>\"" + err + "\"";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}
#endif

}  // namespace testutil
