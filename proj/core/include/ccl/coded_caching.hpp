#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ccl/types.hpp"

namespace ccl::caching {

/// Packed bit string; bit i lives at byte i/8, bit position i%8 (LSB first).
/// Trailing bits of the last byte are kept zero so byte equality equals bit
/// equality.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::uint64_t nbits) : nbits_(nbits), bytes_((nbits + 7) / 8, 0) {}
  static BitVec random(std::uint64_t nbits, std::mt19937_64& gen);

  std::uint64_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }
  bool get(std::uint64_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1; }
  void set(std::uint64_t i, bool value);

  BitVec& operator^=(const BitVec& other);  // sizes must match
  friend bool operator==(const BitVec& a, const BitVec& b) {
    return a.nbits_ == b.nbits_ && a.bytes_ == b.bytes_;
  }

  BitVec slice(std::uint64_t begin, std::uint64_t len) const;
  void append(const BitVec& other);
  /// Drops bits beyond new_size.
  void truncate(std::uint64_t new_size);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::uint64_t nbits_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Per-layer caching instance: K users, N files, layer size in bits, the
/// integer placement parameter t (cached fraction t/K) and the diversity
/// order used to size the padding.
struct CachingConfig {
  int num_users = 4;       // K
  int num_files = 4;       // N
  std::uint64_t layer_bits = 1024;
  int cache_param = 2;     // t, integer in [0, K]
  int diversity = 2;       // L, erasure blocks needed downstream

  void validate() const;
  std::uint64_t padded_layer_bits() const;  // next multiple of C(K,t)*L
  std::uint64_t subfile_bits() const;       // padded_layer_bits / C(K,t)
};

/// Exact binomial coefficient (throws on 64-bit overflow).
std::uint64_t binomial(int n, int k);

/// Colexicographic rank of a strictly increasing subset of {0..n-1}.
std::uint64_t subset_rank_colex(std::span<const int> subset);
/// Inverse of subset_rank_colex for subsets of size k.
std::vector<int> subset_unrank_colex(std::uint64_t rank, int k);

/// One user's cache: subfiles[file][subset_rank], filled only for subsets
/// containing the user.
struct UserCache {
  int user = 0;
  std::vector<std::vector<BitVec>> subfiles;
};

/// Multicast codeword: one XOR block per (t+1)-subset of users, in
/// colexicographic order.
struct MulticastCodeword {
  std::uint8_t layer = 1;
  std::uint16_t num_users = 0;   // K
  std::uint16_t cache_param = 0; // t
  std::uint64_t block_bits = 0;
  std::uint64_t pad_bits = 0;    // zero padding applied to each file layer
  std::vector<BitVec> blocks;    // C(K, t+1) entries
};

/// Placement phase: user k stores subfile T of every file iff k is in T.
std::vector<UserCache> place(const CachingConfig& config, const std::vector<BitVec>& library);

/// Delivery phase for a demand vector (values in [0, N)).
MulticastCodeword deliver(const CachingConfig& config, const std::vector<BitVec>& library,
                          std::span<const int> demands, int layer_tag = 1);

/// Recovers user `user`'s demanded file layer bit-exactly from its cache and
/// the complete codeword. Throws if a needed block is missing.
BitVec decode_user(int user, const CachingConfig& config, const UserCache& cache,
                   const MulticastCodeword& codeword, std::span<const int> demands);

/// Closed-form multicast length in bits: F*Rs*K(1-mu)/(1+K mu). Real-valued mu
/// is the memory-sharing interpolation; exact at mu = t/K.
double codeword_length_bits(double samples, double rate_source, int num_users, double mu);

/// Systematic maximum-distance-separable code over GF(256): first k blocks
/// are the data, any k of the n output blocks reconstruct them.
struct MdsCode {
  int n_total;
  int k_data;
  void validate() const;
};

std::vector<BitVec> mds_encode(const std::vector<BitVec>& data, const MdsCode& code);
/// `indices[i]` is the position (in [0, n_total)) of blocks[i]. Requires
/// exactly k_data distinct indexed blocks; throws otherwise.
std::vector<BitVec> mds_decode(std::span<const int> indices, const std::vector<BitVec>& blocks,
                               const MdsCode& code);

/// Splits a codeword's payload into `diversity` equal data blocks and
/// MDS-encodes them into one block per edge node. Any `diversity` of the
/// outputs reconstruct the payload.
std::vector<BitVec> mds_blocks_for_codeword(const MulticastCodeword& codeword, int diversity,
                                            int n_edge_nodes);

/// Reassembles a codeword payload from any `diversity` indexed MDS blocks and
/// re-splits it into the multicast XOR blocks of the original codeword.
MulticastCodeword codeword_from_mds_blocks(std::span<const int> indices,
                                           const std::vector<BitVec>& blocks,
                                           const MulticastCodeword& header, int diversity,
                                           int n_edge_nodes);

/// Delivery latency in seconds over both layers:
/// sum_i (F Rs_i / w) / (Rc_i L_i) * K(1-mu_i)/(1+K mu_i).
double delivery_latency(const std::array<LayerSpec, 2>& layers, const SystemParams& params);

/// Wire format: header {layer u8, K u16, t u16, block_bits u64, pad_bits u64,
/// order u8 = 0 (colex)} little-endian, then blocks packed LSB-first.
std::vector<std::uint8_t> serialize(const MulticastCodeword& codeword);
MulticastCodeword deserialize(std::span<const std::uint8_t> bytes);

}  // namespace ccl::caching
