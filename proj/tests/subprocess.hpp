#pragma once

// Minimal subprocess + temp-dir helpers for driving the CLI from tests.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace testutil {

namespace fs = std::filesystem;

inline fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("mlcmeta_" + tag + "_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs a command line, returns the exit code; stdout/stderr land in files
// under `dir` for inspection.
inline int run_command(const std::string& command, const fs::path& dir) {
    const std::string full = command + " >" + (dir / "stdout.txt").string() + " 2>" +
                             (dir / "stderr.txt").string();
    const int status = std::system(full.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -2;
}

inline std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// byte-compare every regular file of two directories (same names expected)
inline bool same_tree_bytes(const fs::path& a, const fs::path& b, std::string* mismatch) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(a))
        if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    for (const auto& name : names) {
        if (name == "stdout.txt" || name == "stderr.txt") continue;
        if (!fs::exists(b / name)) {
            if (mismatch) *mismatch = name + " missing";
            return false;
        }
        if (slurp(a / name) != slurp(b / name)) {
            if (mismatch) *mismatch = name + " differs";
            return false;
        }
    }
    return true;
}

} // namespace testutil
