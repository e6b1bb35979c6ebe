#ifndef SEQEMO_DATA_FEATURE_CACHE_HPP
#define SEQEMO_DATA_FEATURE_CACHE_HPP

#include <string>

#include "seqemo/dsp/mfcc.hpp"

namespace seqemo {

// On-disk feature matrix cache. Layout, all little-endian:
//   bytes 0..3   magic "MFCC"
//   bytes 4..7   format version (currently 1) as uint32
//   bytes 8..11  rows as uint32
//   bytes 12..15 cols as uint32
//   bytes 16..   float32 payload, row-major
// Round trips are bit-exact. Readers reject anything malformed with a
// CacheError telling the caller to regenerate the file.
void feature_cache_write(const FeatureMatrix& features, const std::string& path);
FeatureMatrix feature_cache_read(const std::string& path);

}  // namespace seqemo

#endif  // SEQEMO_DATA_FEATURE_CACHE_HPP
