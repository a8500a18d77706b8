#include "newsrace/store.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "newsrace/types.hpp"

namespace newsrace {

namespace fs = std::filesystem;

void atomic_write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_checksum_hex(const fs::path& path) {
  return fnv1a64_hex(read_file(path));
}

RunStore::RunStore(fs::path runs_root, std::string run_id)
    : root_(runs_root / run_id), run_id_(std::move(run_id)) {
  fs::create_directories(root_);
}

std::vector<std::string> RunStore::read_jsonl_raw(const fs::path& path) const {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string RunStore::rel(const fs::path& path) const {
  return fs::relative(path, root_).generic_string();
}

}  // namespace newsrace
