#include "sat/data.hpp"

#include <algorithm>
#include <fstream>

#include "sat/common.hpp"

namespace sat {

CharVocab CharVocab::build(std::span<const uint8_t> corpus) {
  SAT_REQUIRE_DATA(!corpus.empty(), "vocab: corpus is empty");
  bool seen[256] = {};
  for (uint8_t b : corpus) seen[b] = true;
  CharVocab v;
  v.byte_to_id.assign(256, 0);
  for (int b = 0; b < 256; ++b) {
    if (seen[b]) {
      v.bytes.push_back(static_cast<uint8_t>(b));
      v.byte_to_id[static_cast<size_t>(b)] = static_cast<int32_t>(v.bytes.size());  // ids from 1
    }
  }
  return v;
}

std::vector<int32_t> CharVocab::encode(std::span<const uint8_t> text) const {
  std::vector<int32_t> ids;
  ids.reserve(text.size());
  for (uint8_t b : text) {
    const int32_t id = byte_to_id[b];
    SAT_REQUIRE_DATA(id != 0, "encode: byte " + std::to_string(int(b)) + " not in vocabulary");
    ids.push_back(id);
  }
  return ids;
}

std::vector<uint8_t> CharVocab::decode(std::span<const int32_t> ids) const {
  std::vector<uint8_t> out;
  out.reserve(ids.size());
  for (int32_t id : ids) {
    SAT_REQUIRE_DATA(id >= 1 && id <= static_cast<int32_t>(bytes.size()),
                 "decode: id " + std::to_string(id) + " out of range");
    out.push_back(bytes[static_cast<size_t>(id - 1)]);
  }
  return out;
}

void SyntheticSpec::validate() const {
  SAT_REQUIRE(pattern_len >= 1, "synthetic: pattern_len must be >= 1");
  SAT_REQUIRE(alphabet >= 2 && alphabet <= 26, "synthetic: alphabet must be in [2, 26]");
  SAT_REQUIRE(noise >= 0.0 && noise < 1.0, "synthetic: noise must be in [0,1)");
  SAT_REQUIRE(total_tokens >= 2, "synthetic: total_tokens must be >= 2");
}

std::vector<uint8_t> synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<uint8_t> pattern(static_cast<size_t>(spec.pattern_len));
  for (auto& b : pattern)
    b = static_cast<uint8_t>('a' + static_cast<int64_t>(rng.uniform() * static_cast<double>(spec.alphabet)));
  std::vector<uint8_t> corpus(static_cast<size_t>(spec.total_tokens));
  for (int64_t i = 0; i < spec.total_tokens; ++i) {
    uint8_t b = pattern[static_cast<size_t>(i % spec.pattern_len)];
    if (spec.noise > 0.0 && rng.uniform() < spec.noise)
      b = static_cast<uint8_t>('a' + static_cast<int64_t>(rng.uniform() * static_cast<double>(spec.alphabet)));
    corpus[static_cast<size_t>(i)] = b;
  }
  return corpus;
}

BatchIterator::BatchIterator(std::vector<int32_t> tokens, int64_t batch_size, int64_t seq_len,
                             uint64_t seed)
    : tokens_(std::move(tokens)), batch_size_(batch_size), seq_len_(seq_len), seed_(seed) {
  SAT_REQUIRE(batch_size_ >= 1, "batcher: batch_size must be >= 1");
  SAT_REQUIRE(seq_len_ >= 1, "batcher: seq_len must be >= 1");
  SAT_REQUIRE_DATA(static_cast<int64_t>(tokens_.size()) >= 2,
               "batcher: need at least two tokens for an input/target pair");
  // Chunk c covers tokens [c*n, c*n + n]; consecutive chunks share one
  // boundary token so every position (except 0) is a target exactly once.
  chunks_ = (static_cast<int64_t>(tokens_.size()) - 1 + seq_len_ - 1) / seq_len_;
  reshuffle();
}

void BatchIterator::reshuffle() {
  order_.resize(static_cast<size_t>(chunks_));
  for (int64_t i = 0; i < chunks_; ++i) order_[static_cast<size_t>(i)] = i;
  Rng rng = Rng(seed_).fork(0x6261746368ULL, static_cast<uint64_t>(epoch_));  // "batch"
  for (int64_t i = chunks_ - 1; i > 0; --i) {
    const int64_t j = static_cast<int64_t>(rng.next_u64() % static_cast<uint64_t>(i + 1));
    std::swap(order_[static_cast<size_t>(i)], order_[static_cast<size_t>(j)]);
  }
}

void BatchIterator::fill_chunk(int64_t chunk, int32_t* inputs, int32_t* targets) const {
  const int64_t start = chunk * seq_len_;
  const int64_t len = static_cast<int64_t>(tokens_.size());
  for (int64_t j = 0; j < seq_len_; ++j) {
    const int64_t p = start + j;
    inputs[j] = p < len ? tokens_[static_cast<size_t>(p)] : kPadId;
    targets[j] = p + 1 < len ? tokens_[static_cast<size_t>(p + 1)] : kPadId;
  }
}

Batch BatchIterator::next() {
  Batch b;
  b.batch = batch_size_;
  b.seq = seq_len_;
  b.inputs.resize(static_cast<size_t>(batch_size_ * seq_len_));
  b.targets.resize(static_cast<size_t>(batch_size_ * seq_len_));
  for (int64_t r = 0; r < batch_size_; ++r) {
    if (cursor_ == chunks_) {
      cursor_ = 0;
      ++epoch_;
      reshuffle();
    }
    const int64_t chunk = order_[static_cast<size_t>(cursor_++)];
    fill_chunk(chunk, b.inputs.data() + r * seq_len_, b.targets.data() + r * seq_len_);
  }
  return b;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  SAT_REQUIRE_DATA(in.is_open(), "cannot open file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  SAT_REQUIRE_DATA(in.good() || in.eof(), "read failed: " + path);
  return bytes;
}

}  // namespace sat
