#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <rns/corpus.hpp>
#include <rns/model.hpp>

namespace testutil {

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("rns_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline rns::Interaction row(const std::string& user, const std::string& item,
                            std::int64_t ts, const std::string& review) {
    return rns::Interaction{user, item, ts, review};
}

// one user, `count` interactions over distinct items, increasing timestamps
inline std::vector<rns::Interaction> one_user_rows(const std::string& user, int count,
                                                   const std::string& word) {
    std::vector<rns::Interaction> rows;
    for (int i = 0; i < count; ++i)
        rows.push_back(row(user, "item" + std::to_string(i), i, word + " review"));
    return rows;
}

inline void zero_all_parameters(rns::ModelParams& params) {
    params.for_each_parameter([](const std::string&, rns::Tensor& t) {
        for (double& v : t.data()) v = 0.0;
    });
}

inline std::vector<double> snapshot(const rns::ModelParams& params) {
    std::vector<double> flat;
    params.for_each_parameter([&flat](const std::string&, const rns::Tensor& t) {
        flat.insert(flat.end(), t.data().begin(), t.data().end());
    });
    return flat;
}

}  // namespace testutil
