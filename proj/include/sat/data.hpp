#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sat/batch.hpp"
#include "sat/rng.hpp"

namespace sat {

inline constexpr int32_t kPadId = 0;

/// Byte-level vocabulary: ids 1..N assigned to the corpus bytes in sorted
/// byte order; id 0 reserved for padding.
struct CharVocab {
  std::vector<uint8_t> bytes;          // sorted unique corpus bytes
  std::vector<int32_t> byte_to_id;     // 256 entries, 0 = absent

  static CharVocab build(std::span<const uint8_t> corpus);

  int64_t size() const { return static_cast<int64_t>(bytes.size()) + 1; }
  std::vector<int32_t> encode(std::span<const uint8_t> text) const;
  std::vector<uint8_t> decode(std::span<const int32_t> ids) const;
};

/// Repeating k-gram pattern with seeded noise: a deterministic corpus that a
/// small model can learn and tests can regenerate anywhere.
struct SyntheticSpec {
  int64_t pattern_len = 16;
  int64_t alphabet = 8;      // distinct byte values, 'a' upward
  double noise = 0.0;        // per-position replacement probability
  int64_t total_tokens = 65536;
  uint64_t seed = 1;

  void validate() const;
};

std::vector<uint8_t> synthetic_corpus(const SyntheticSpec& spec);

/// Deterministic batcher over non-overlapping chunks of n+1 tokens (inputs
/// plus shifted targets). Reshuffles every epoch from the seed and wraps
/// indefinitely. The final short chunk of an epoch is padded with kPadId.
class BatchIterator {
 public:
  BatchIterator(std::vector<int32_t> tokens, int64_t batch_size, int64_t seq_len, uint64_t seed);

  Batch next();

  int64_t chunks_per_epoch() const { return chunks_; }

 private:
  void fill_chunk(int64_t chunk, int32_t* inputs, int32_t* targets) const;
  void reshuffle();

  std::vector<int32_t> tokens_;
  int64_t batch_size_;
  int64_t seq_len_;
  uint64_t seed_;
  int64_t chunks_;
  int64_t epoch_ = 0;
  int64_t cursor_ = 0;
  std::vector<int64_t> order_;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);

}  // namespace sat
