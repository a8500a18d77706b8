#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace newsrace {

// Writes `content` to `path` atomically: the bytes land in a sibling .tmp
// file which is then renamed over the target, so readers never observe a
// half-written file.  Parent directories are created as needed.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64 over the file's raw bytes, rendered as 16 hex digits.  Used to
// content-address stage outputs so a resumed run can detect staleness.
std::string file_checksum_hex(const std::filesystem::path& path);

// Filesystem layout for one run: line-delimited record stores, the oEmbed
// cache, probe reports, and rendered tables, all under runs/<run_id>/.
class RunStore {
 public:
  RunStore(std::filesystem::path runs_root, std::string run_id);

  const std::string& run_id() const { return run_id_; }
  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }
  std::filesystem::path events_path() const { return root_ / "events.jsonl"; }
  std::filesystem::path features_path() const {
    return root_ / "features.jsonl";
  }
  std::filesystem::path queries_path() const { return root_ / "queries.jsonl"; }
  std::filesystem::path earliest_path() const { return root_ / "earliest.jsonl"; }
  std::filesystem::path adjudications_path() const {
    return root_ / "adjudications.jsonl";
  }
  std::filesystem::path mentions_dir() const { return root_ / "mentions"; }
  std::filesystem::path mentions_path(const std::string& event_id) const {
    return mentions_dir() / (event_id + ".jsonl");
  }
  std::filesystem::path oembed_dir() const { return root_ / "oembed"; }
  std::filesystem::path oembed_path(const std::string& guid) const {
    return oembed_dir() / (guid + ".json");
  }
  std::filesystem::path probe_dir() const { return root_ / "probe"; }
  std::filesystem::path probe_path(const std::string& event_id) const {
    return probe_dir() / (event_id + ".json");
  }
  std::filesystem::path tables_dir() const { return root_ / "tables"; }
  std::filesystem::path table_path(const std::string& name,
                                   const std::string& ext) const {
    return tables_dir() / (name + "." + ext);
  }

  bool exists(const std::filesystem::path& path) const {
    return std::filesystem::exists(path);
  }

  // One compact JSON object per line, trailing newline, atomic replace.
  template <typename T>
  void write_jsonl(const std::filesystem::path& path,
                   const std::vector<T>& records) const {
    std::string out;
    for (const auto& r : records) {
      out += nlohmann::json(r).dump();
      out += '\n';
    }
    atomic_write_file(path, out);
  }

  template <typename T>
  std::vector<T> read_jsonl(const std::filesystem::path& path) const {
    std::vector<T> records;
    for (const auto& line : read_jsonl_raw(path)) {
      records.push_back(nlohmann::json::parse(line).get<T>());
    }
    return records;
  }

  std::vector<std::string> read_jsonl_raw(
      const std::filesystem::path& path) const;

  // Relative path of `path` with respect to the run root, in generic (/)
  // form — the key used for checksums in the manifest.
  std::string rel(const std::filesystem::path& path) const;

  std::string checksum(const std::filesystem::path& path) const {
    return file_checksum_hex(path);
  }

 private:
  std::filesystem::path root_;
  std::string run_id_;
};

}  // namespace newsrace
