#pragma once

// Dataset and run-directory builders shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "benchforge/core.hpp"
#include "benchforge/dataset.hpp"

namespace fixtures {

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Short English sentence built from a fixed word list.
std::string sentence(std::mt19937_64& rng, std::size_t min_words = 4, std::size_t max_words = 10);

/// Random dataset of the given task with about `records` records in split
/// "test" (classification also gets a "train" split).
benchforge::TaskDataset random_dataset(benchforge::TaskType task, std::size_t records, std::uint64_t seed,
                                       const std::string& dataset_id = {});

/// Six datasets of ten records each, one per task, written under `dir`.
/// Some sources are non-English and the mock settings fail single units at
/// the language, similarity and judge checks, so every gate has work to do.
struct MixedFixture {
  std::vector<std::filesystem::path> manifests;
  benchforge::PipelineConfig config;  // mock backends; run_dir set per run by the caller
};
MixedFixture write_mixed_fixture(const std::filesystem::path& dir);

/// Every regular file under `dir`, relative path -> content.
std::vector<std::pair<std::string, std::string>> read_tree(const std::filesystem::path& dir);
std::string read_file(const std::filesystem::path& path);

}  // namespace fixtures
