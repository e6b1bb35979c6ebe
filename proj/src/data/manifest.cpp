#include "seqemo/data/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "seqemo/common.hpp"

namespace seqemo {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

int64_t Manifest::label_index(const std::string& label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end())
    throw DataError(cat("label \"", label, "\" is not in the manifest class list"));
  return it - classes.begin();
}

std::string Manifest::resolved_path(const ManifestEntry& entry) const {
  fs::path p(entry.path);
  if (p.is_absolute() || root.empty()) return p.string();
  return (fs::path(root) / p).string();
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(cat("cannot open manifest ", path));

  Manifest m;
  m.root = fs::path(path).parent_path().string();

  std::string line;
  int line_no = 0;

  // Class declaration comes first.
  if (!std::getline(in, line))
    throw DataError(cat("manifest ", path, " is empty"));
  ++line_no;
  const std::string kClassPrefix = "# classes:";
  std::string head = trim(line);
  if (head.compare(0, kClassPrefix.size(), kClassPrefix) != 0)
    throw DataError(cat("manifest ", path, " line 1: expected \"", kClassPrefix,
                        " ...\", got \"", head, "\""));
  for (const auto& c : split_csv(head.substr(kClassPrefix.size()))) {
    if (c.empty())
      throw DataError(cat("manifest ", path, " line 1: empty class name"));
    if (std::find(m.classes.begin(), m.classes.end(), c) != m.classes.end())
      throw DataError(cat("manifest ", path, " line 1: duplicate class \"", c, "\""));
    m.classes.push_back(c);
  }
  if (m.classes.empty())
    throw DataError(cat("manifest ", path, " line 1: class list is empty"));

  // Column header.
  if (!std::getline(in, line))
    throw DataError(cat("manifest ", path, ": missing column header"));
  ++line_no;
  auto header = split_csv(trim(line));
  bool with_duration = false;
  if (header.size() == 3 && header[0] == "path" && header[1] == "label" &&
      header[2] == "speaker") {
    with_duration = false;
  } else if (header.size() == 4 && header[0] == "path" && header[1] == "label" &&
             header[2] == "speaker" && header[3] == "duration") {
    with_duration = true;
  } else {
    throw DataError(cat("manifest ", path, " line 2: header must be "
                        "\"path,label,speaker\" or \"path,label,speaker,duration\""));
  }

  std::unordered_set<std::string> seen_paths;
  while (std::getline(in, line)) {
    ++line_no;
    std::string row = trim(line);
    if (row.empty()) continue;
    auto fields = split_csv(row);
    const size_t want = with_duration ? 4 : 3;
    if (fields.size() != want)
      throw DataError(cat("manifest ", path, " line ", line_no, ": expected ",
                          want, " fields, got ", fields.size()));

    ManifestEntry e;
    e.path = fields[0];
    e.label = fields[1];
    e.speaker = fields[2];
    if (e.path.empty())
      throw DataError(cat("manifest ", path, " line ", line_no, ": empty path"));
    if (std::find(m.classes.begin(), m.classes.end(), e.label) == m.classes.end())
      throw DataError(cat("manifest ", path, " line ", line_no, ": label \"",
                          e.label, "\" is not in the declared class list"));
    if (!seen_paths.insert(e.path).second)
      throw DataError(cat("manifest ", path, " line ", line_no,
                          ": duplicate path \"", e.path, "\""));
    if (with_duration && !fields[3].empty()) {
      try {
        size_t pos = 0;
        e.duration_s = std::stod(fields[3], &pos);
        if (pos != fields[3].size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw DataError(cat("manifest ", path, " line ", line_no,
                            ": bad duration \"", fields[3], "\""));
      }
      if (e.duration_s <= 0.0)
        throw DataError(cat("manifest ", path, " line ", line_no,
                            ": duration must be positive"));
    }
    if (!fs::exists(m.resolved_path(e)))
      throw DataError(cat("manifest ", path, " line ", line_no,
                          ": audio file not found: ", m.resolved_path(e)));
    m.entries.push_back(std::move(e));
  }

  if (m.entries.empty())
    throw DataError(cat("manifest ", path, " declares no entries"));
  return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
  if (m.classes.empty()) throw DataError("manifest has no classes");
  bool with_duration =
      std::any_of(m.entries.begin(), m.entries.end(),
                  [](const ManifestEntry& e) { return e.has_duration(); });

  std::ostringstream os;
  os << "# classes: ";
  for (size_t i = 0; i < m.classes.size(); ++i) {
    if (i) os << ',';
    os << m.classes[i];
  }
  os << '\n';
  os << (with_duration ? "path,label,speaker,duration" : "path,label,speaker") << '\n';
  for (const auto& e : m.entries) {
    os << e.path << ',' << e.label << ',' << e.speaker;
    if (with_duration) {
      os << ',';
      if (e.has_duration()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.9g", e.duration_s);
        os << buf;
      }
    }
    os << '\n';
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot write manifest ", path));
  out << os.str();
  if (!out) throw IoError(cat("write failed for manifest ", path));
}

}  // namespace seqemo
