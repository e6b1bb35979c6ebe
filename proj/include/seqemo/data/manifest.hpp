#ifndef SEQEMO_DATA_MANIFEST_HPP
#define SEQEMO_DATA_MANIFEST_HPP

#include <string>
#include <vector>

namespace seqemo {

// One dataset row. `path` is kept exactly as written in the manifest file;
// relative paths are resolved against the manifest's directory.
struct ManifestEntry {
  std::string path;
  std::string label;
  std::string speaker;
  double duration_s = -1.0;  // negative means "not recorded"

  bool has_duration() const { return duration_s >= 0.0; }
};

// Dataset manifest: a closed class list plus one row per clip.
//
// File format (CSV, no quoting, fields must not contain commas):
//   # classes: a,b,c
//   path,label,speaker[,duration]
//   rel/or/abs.wav,b,spk3[,2.5]
struct Manifest {
  std::string root;  // directory the manifest file lives in
  std::vector<std::string> classes;
  std::vector<ManifestEntry> entries;

  // Index of `label` in `classes`; throws DataError when unknown.
  int64_t label_index(const std::string& label) const;
  // Absolute (or root-joined) path for an entry's audio file.
  std::string resolved_path(const ManifestEntry& entry) const;
};

// Parses and validates a manifest file. Every label must appear in the
// declared class list and every audio path must exist on disk; violations
// report the offending line number.
Manifest load_manifest(const std::string& path);

// Writes `m` in the format above. Durations are included only when at least
// one entry has one. Output is byte-deterministic.
void save_manifest(const Manifest& m, const std::string& path);

}  // namespace seqemo

#endif  // SEQEMO_DATA_MANIFEST_HPP
