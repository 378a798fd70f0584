#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"

namespace faceverify {

enum class Split { train, eval, test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::eval: return "eval";
    case Split::test: return "test";
  }
  return "?";
}

struct ManifestEntry {
  std::string path;
  int subject = 0;
  Split split = Split::train;
};

// Labeled train/eval/test split of a face dataset. Relative paths are
// resolved against the manifest file's directory at load time.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> in_split(Split s) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
      if (e.split == s) out.push_back(e);
    return out;
  }

  std::set<int> subjects() const {
    std::set<int> out;
    for (const auto& e : entries) out.insert(e.subject);
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

// Parse manifest CSV text. `base_dir` is prepended to relative paths.
inline DatasetManifest parse_manifest(const std::string& text,
                                      const std::string& base_dir = "") {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  std::set<std::string> seen_paths;
  std::set<int> train_subjects;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "path" || fields[1] != "subject" ||
          fields[2] != "split")
        throw input_error("manifest: line " + std::to_string(line_no) +
                          ": expected header 'path,subject,split'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw input_error("manifest: line " + std::to_string(line_no) +
                        ": expected 3 fields, got " +
                        std::to_string(fields.size()));

    ManifestEntry e;
    e.path = fields[0];
    if (e.path.empty())
      throw input_error("manifest: line " + std::to_string(line_no) +
                        ": empty path");
    try {
      std::size_t used = 0;
      e.subject = std::stoi(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw input_error("manifest: line " + std::to_string(line_no) +
                        ": subject '" + fields[1] + "' is not an integer");
    }
    if (e.subject < 0)
      throw input_error("manifest: line " + std::to_string(line_no) +
                        ": subject must be >= 0");

    if (fields[2] == "train")
      e.split = Split::train;
    else if (fields[2] == "eval")
      e.split = Split::eval;
    else if (fields[2] == "test")
      e.split = Split::test;
    else
      throw input_error("manifest: line " + std::to_string(line_no) +
                        ": unknown split tag '" + fields[2] + "'");

    if (!base_dir.empty() &&
        !std::filesystem::path(e.path).is_absolute())
      e.path = (std::filesystem::path(base_dir) / e.path).string();

    if (!seen_paths.insert(e.path).second)
      throw input_error("manifest: line " + std::to_string(line_no) +
                        ": path '" + e.path + "' appears in more than one row");
    if (e.split == Split::train) train_subjects.insert(e.subject);
    m.entries.push_back(e);
  }
  if (!header_seen) throw input_error("manifest: empty file");

  for (const auto& e : m.entries)
    if (e.split != Split::train && !train_subjects.count(e.subject))
      throw input_error("manifest: subject " + std::to_string(e.subject) +
                        " appears in " + split_name(e.split) +
                        " but not in train");
  return m;
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("manifest: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string base =
      std::filesystem::path(path).parent_path().string();
  return parse_manifest(buf.str(), base);
}

inline std::string encode_manifest(const DatasetManifest& m) {
  std::string out = "path,subject,split\n";
  for (const auto& e : m.entries)
    out += e.path + "," + std::to_string(e.subject) + "," +
           split_name(e.split) + "\n";
  return out;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("manifest: cannot write '" + path + "'");
  out << encode_manifest(m);
  if (!out) throw input_error("manifest: write failed for '" + path + "'");
}

}  // namespace faceverify
