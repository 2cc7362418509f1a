#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "wsckit/cli.h"
#include "wsckit/io.h"

namespace testutil {

inline const std::string kData = WSCKIT_TEST_DATA;
inline const std::string kCli = WSCKIT_CLI_PATH;
inline const std::string kVocab = std::string(WSCKIT_DATA_DIR) + "/vocab.txt";
inline const std::string kGoldenCorpus = kData + "/golden_corpus.pretagged";
inline const std::string kGoldenDataset = kData + "/golden_dataset.jsonl";

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("wsckit_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Runs the CLI in-process.
inline int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wsckit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return wsckit::run(static_cast<int>(argv.size()), argv.data());
}

inline std::string serve_command(const std::string& extra = {}) {
  return "exec:" + kCli + " serve-baseline --vocab " + kVocab + " --baseline-corpus " +
         kGoldenCorpus + extra;
}

}  // namespace testutil
