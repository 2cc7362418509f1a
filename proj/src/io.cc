#include "wsckit/io.h"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wsckit/error.h"

namespace wsckit {

struct AtomicFile::Impl {
  std::ofstream out;
};

AtomicFile::AtomicFile(std::string path)
    : path_(std::move(path)),
      tmp_path_(path_ + ".tmp." + std::to_string(::getpid())),
      impl_(std::make_unique<Impl>()) {
  impl_->out.open(tmp_path_, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw DataError("cannot write " + tmp_path_);
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    impl_->out.close();
    std::remove(tmp_path_.c_str());
  }
}

std::ostream& AtomicFile::stream() { return impl_->out; }

void AtomicFile::commit() {
  impl_->out.flush();
  if (!impl_->out) throw DataError("write failed for " + path_);
  impl_->out.close();
  if (std::rename(tmp_path_.c_str(), path_.c_str()) != 0) {
    std::remove(tmp_path_.c_str());
    throw DataError("cannot rename output into place: " + path_);
  }
  committed_ = true;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  AtomicFile f(path);
  f.stream() << contents;
  f.commit();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void for_each_line(const std::string& path,
                   const std::function<void(std::string_view, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(line, n);
  }
}

}  // namespace wsckit
