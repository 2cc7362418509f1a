#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

namespace wsckit {

// Writes `path` by filling a sibling temp file and renaming it over the
// target, so readers never observe a partial output.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream();
  void commit();

 private:
  struct Impl;
  std::string path_;
  std::string tmp_path_;
  std::unique_ptr<Impl> impl_;
  bool committed_ = false;
};

void write_file_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

// Calls `fn(line, line_number)` for every line, 1-based.
void for_each_line(const std::string& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

}  // namespace wsckit
