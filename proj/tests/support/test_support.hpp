#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "textcoder/prompt.hpp"
#include "textcoder/task_schema.hpp"

namespace tctest {

std::filesystem::path source_path(const std::string& relative);
std::filesystem::path data_path(const std::string& relative);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "textcoder-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

const textcoder::TaskSuite& fatherhood_suite();
std::vector<textcoder::FewShotExample> example_pool();

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, const std::string& content);

// Synthetic validation set over the three-task suite: instances, three human
// coders' gold labels, canned model answers and a run config pointing at them.
struct FixtureOptions {
  std::size_t n_instances = 350;
  std::uint64_t seed = 11;
  bool mock_file = true;         // in-process canned answers
  std::string base_url;          // used when mock_file is false
  std::string output_dir = "out";
  std::string cache_dir = "cache";
  std::size_t n_examples = 15;
  std::string description_level = "long";
  std::string tasks = "joint";
};

struct Fixture {
  std::filesystem::path dir;
  std::filesystem::path config;
  std::filesystem::path instances;
  std::filesystem::path gold;
  std::filesystem::path mock;
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  std::vector<std::string> responses;  // canned answer per instance
};

Fixture write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

// Rewrites the fixture's run config with different options.
void write_fixture_config(const Fixture& fixture, const FixtureOptions& options);

}  // namespace tctest
