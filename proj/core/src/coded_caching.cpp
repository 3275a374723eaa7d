#include "ccl/coded_caching.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace ccl::caching {

// ---------------------------------------------------------------------------
// BitVec

BitVec BitVec::random(std::uint64_t nbits, std::mt19937_64& gen) {
  BitVec v(nbits);
  for (auto& b : v.bytes_) b = static_cast<std::uint8_t>(gen());
  if (nbits % 8 != 0 && !v.bytes_.empty())
    v.bytes_.back() &= static_cast<std::uint8_t>((1u << (nbits % 8)) - 1);
  return v;
}

void BitVec::set(std::uint64_t i, bool value) {
  if (i >= nbits_) throw std::out_of_range("BitVec::set: index out of range");
  if (value)
    bytes_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  else
    bytes_[i >> 3] &= static_cast<std::uint8_t>(~(1u << (i & 7)));
}

BitVec& BitVec::operator^=(const BitVec& other) {
  if (nbits_ != other.nbits_) throw std::invalid_argument("BitVec: XOR size mismatch");
  for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] ^= other.bytes_[i];
  return *this;
}

BitVec BitVec::slice(std::uint64_t begin, std::uint64_t len) const {
  if (begin + len > nbits_) throw std::out_of_range("BitVec::slice: range out of bounds");
  BitVec out(len);
  if (begin % 8 == 0) {
    std::memcpy(out.bytes_.data(), bytes_.data() + begin / 8, (len + 7) / 8);
    if (len % 8 != 0 && !out.bytes_.empty())
      out.bytes_.back() &= static_cast<std::uint8_t>((1u << (len % 8)) - 1);
  } else {
    for (std::uint64_t i = 0; i < len; ++i)
      if (get(begin + i)) out.bytes_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  }
  return out;
}

void BitVec::append(const BitVec& other) {
  const std::uint64_t old = nbits_;
  nbits_ += other.nbits_;
  bytes_.resize((nbits_ + 7) / 8, 0);
  if (old % 8 == 0) {
    std::memcpy(bytes_.data() + old / 8, other.bytes_.data(), other.bytes_.size());
  } else {
    for (std::uint64_t i = 0; i < other.nbits_; ++i)
      if (other.get(i)) bytes_[(old + i) >> 3] |= static_cast<std::uint8_t>(1u << ((old + i) & 7));
  }
}

void BitVec::truncate(std::uint64_t new_size) {
  if (new_size > nbits_) throw std::invalid_argument("BitVec::truncate: cannot grow");
  nbits_ = new_size;
  bytes_.resize((new_size + 7) / 8);
  if (new_size % 8 != 0 && !bytes_.empty())
    bytes_.back() &= static_cast<std::uint8_t>((1u << (new_size % 8)) - 1);
}

// ---------------------------------------------------------------------------
// Subset combinatorics (colexicographic order = combinatorial number system)

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t acc = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (acc > UINT64_MAX / num) throw std::overflow_error("binomial: 64-bit overflow");
    acc = acc * num / i;
  }
  return acc;
}

std::uint64_t subset_rank_colex(std::span<const int> subset) {
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < subset.size(); ++i)
    rank += binomial(subset[i], static_cast<int>(i) + 1);
  return rank;
}

std::vector<int> subset_unrank_colex(std::uint64_t rank, int k) {
  std::vector<int> subset(k);
  for (int i = k; i >= 1; --i) {
    int v = i - 1;
    while (binomial(v + 1, i) <= rank) ++v;
    subset[i - 1] = v;
    rank -= binomial(v, i);
  }
  return subset;
}

// ---------------------------------------------------------------------------
// MAN placement / delivery / decoding

void CachingConfig::validate() const {
  if (num_users < 1) throw std::invalid_argument("CachingConfig: num_users must be >= 1");
  if (num_files < 1) throw std::invalid_argument("CachingConfig: num_files must be >= 1");
  if (cache_param < 0 || cache_param > num_users)
    throw std::invalid_argument("CachingConfig: cache_param t must lie in [0, K]");
  if (diversity < 1) throw std::invalid_argument("CachingConfig: diversity must be >= 1");
  if (layer_bits == 0) throw std::invalid_argument("CachingConfig: layer_bits must be > 0");
}

std::uint64_t CachingConfig::padded_layer_bits() const {
  const std::uint64_t unit = binomial(num_users, cache_param) * static_cast<std::uint64_t>(diversity);
  return (layer_bits + unit - 1) / unit * unit;
}

std::uint64_t CachingConfig::subfile_bits() const {
  return padded_layer_bits() / binomial(num_users, cache_param);
}

namespace {

BitVec padded_file(const CachingConfig& config, const BitVec& file) {
  BitVec out = file;
  BitVec pad(config.padded_layer_bits() - file.size());
  out.append(pad);
  return out;
}

void check_demands(const CachingConfig& config, std::span<const int> demands) {
  if (static_cast<int>(demands.size()) != config.num_users)
    throw std::invalid_argument("demands: need one entry per user");
  for (const int d : demands)
    if (d < 0 || d >= config.num_files) throw std::invalid_argument("demands: file index out of range");
}

}  // namespace

std::vector<UserCache> place(const CachingConfig& config, const std::vector<BitVec>& library) {
  config.validate();
  if (static_cast<int>(library.size()) != config.num_files)
    throw std::invalid_argument("place: library size must equal num_files");
  for (const auto& f : library)
    if (f.size() != config.layer_bits)
      throw std::invalid_argument("place: file layer size mismatch");

  const int k_users = config.num_users;
  const int t = config.cache_param;
  const std::uint64_t n_subsets = binomial(k_users, t);
  const std::uint64_t sf_bits = config.subfile_bits();

  std::vector<UserCache> caches(k_users);
  for (int u = 0; u < k_users; ++u) {
    caches[u].user = u;
    caches[u].subfiles.assign(config.num_files, std::vector<BitVec>(n_subsets));
  }
  for (int f = 0; f < config.num_files; ++f) {
    const BitVec padded = padded_file(config, library[f]);
    for (std::uint64_t r = 0; r < n_subsets; ++r) {
      const std::vector<int> subset = subset_unrank_colex(r, t);
      const BitVec sf = padded.slice(r * sf_bits, sf_bits);
      for (const int u : subset) caches[u].subfiles[f][r] = sf;
    }
  }
  return caches;
}

MulticastCodeword deliver(const CachingConfig& config, const std::vector<BitVec>& library,
                          std::span<const int> demands, int layer_tag) {
  config.validate();
  check_demands(config, demands);
  if (static_cast<int>(library.size()) != config.num_files)
    throw std::invalid_argument("deliver: library size must equal num_files");

  const int k_users = config.num_users;
  const int t = config.cache_param;
  const std::uint64_t sf_bits = config.subfile_bits();

  std::vector<BitVec> padded(library.size());
  for (std::size_t f = 0; f < library.size(); ++f) padded[f] = padded_file(config, library[f]);

  MulticastCodeword cw;
  cw.layer = static_cast<std::uint8_t>(layer_tag);
  cw.num_users = static_cast<std::uint16_t>(k_users);
  cw.cache_param = static_cast<std::uint16_t>(t);
  cw.block_bits = sf_bits;
  cw.pad_bits = config.padded_layer_bits() - config.layer_bits;

  const std::uint64_t n_blocks = binomial(k_users, t + 1);
  cw.blocks.reserve(n_blocks);
  for (std::uint64_t br = 0; br < n_blocks; ++br) {
    const std::vector<int> s = subset_unrank_colex(br, t + 1);
    BitVec block(sf_bits);
    std::vector<int> rest(t);
    for (std::size_t drop = 0; drop < s.size(); ++drop) {
      int idx = 0;
      for (std::size_t j = 0; j < s.size(); ++j)
        if (j != drop) rest[idx++] = s[j];
      const std::uint64_t r = subset_rank_colex(rest);
      block ^= padded[demands[s[drop]]].slice(r * sf_bits, sf_bits);
    }
    cw.blocks.push_back(std::move(block));
  }
  return cw;
}

BitVec decode_user(int user, const CachingConfig& config, const UserCache& cache,
                   const MulticastCodeword& codeword, std::span<const int> demands) {
  config.validate();
  check_demands(config, demands);
  if (user < 0 || user >= config.num_users)
    throw std::invalid_argument("decode_user: user index out of range");
  if (cache.user != user) throw std::invalid_argument("decode_user: cache belongs to another user");

  const int k_users = config.num_users;
  const int t = config.cache_param;
  const std::uint64_t sf_bits = config.subfile_bits();
  const std::uint64_t n_subsets = binomial(k_users, t);
  const std::uint64_t n_blocks = binomial(k_users, t + 1);
  if (codeword.blocks.size() != n_blocks || codeword.block_bits != sf_bits)
    throw std::invalid_argument("decode_user: codeword does not match configuration");

  const int want = demands[user];
  std::vector<BitVec> recovered(n_subsets);

  // Subfiles indexed by subsets containing the user come from the cache.
  for (std::uint64_t r = 0; r < n_subsets; ++r)
    if (!cache.subfiles[want][r].empty()) recovered[r] = cache.subfiles[want][r];

  // Every block whose subset S contains the user yields subfile S \ {user}.
  std::vector<int> rest(t);
  for (std::uint64_t br = 0; br < n_blocks; ++br) {
    const std::vector<int> s = subset_unrank_colex(br, t + 1);
    if (!std::binary_search(s.begin(), s.end(), user)) continue;
    if (codeword.blocks[br].size() != sf_bits)
      throw std::invalid_argument("decode_user: codeword block missing or malformed");
    BitVec block = codeword.blocks[br];
    for (const int other : s) {
      if (other == user) continue;
      int idx = 0;
      for (const int m : s)
        if (m != other) rest[idx++] = m;
      const std::uint64_t r = subset_rank_colex(rest);
      const BitVec& cached = cache.subfiles[demands[other]][r];
      if (cached.empty())
        throw std::invalid_argument("decode_user: cache lacks a subfile needed for peeling");
      block ^= cached;
    }
    int idx = 0;
    for (const int m : s)
      if (m != user) rest[idx++] = m;
    recovered[subset_rank_colex(rest)] = std::move(block);
  }

  BitVec out;
  for (std::uint64_t r = 0; r < n_subsets; ++r) {
    if (recovered[r].empty())
      throw std::invalid_argument("decode_user: incomplete codeword, subfile unrecovered");
    out.append(recovered[r]);
  }
  out.truncate(config.layer_bits);
  return out;
}

double codeword_length_bits(double samples, double rate_source, int num_users, double mu) {
  if (!(samples > 0.0) || !(rate_source > 0.0))
    throw std::domain_error("codeword_length_bits: sizes must be positive");
  if (num_users < 1) throw std::domain_error("codeword_length_bits: num_users must be >= 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::domain_error("codeword_length_bits: mu must lie in [0,1]");
  const double k = static_cast<double>(num_users);
  return samples * rate_source * k * (1.0 - mu) / (1.0 + k * mu);
}

// ---------------------------------------------------------------------------
// GF(256) arithmetic and the systematic Vandermonde MDS code

namespace gf256 {

struct Tables {
  std::array<std::uint8_t, 256> exp_of{};
  std::array<std::uint8_t, 512> pow{};  // doubled to skip a mod in mul
  std::array<int, 256> log_of{};
  Tables() {
    // Primitive polynomial x^8+x^4+x^3+x^2+1 (0x11d), generator 2.
    int x = 1;
    for (int i = 0; i < 255; ++i) {
      pow[i] = static_cast<std::uint8_t>(x);
      log_of[x] = i;
      x <<= 1;
      if (x & 0x100) x ^= 0x11d;
    }
    for (int i = 255; i < 512; ++i) pow[i] = pow[i - 255];
    log_of[0] = -1;
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const Tables& t = tables();
  return t.pow[t.log_of[a] + t.log_of[b]];
}

inline std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::domain_error("gf256: zero has no inverse");
  const Tables& t = tables();
  return t.pow[255 - t.log_of[a]];
}

using Matrix = std::vector<std::vector<std::uint8_t>>;

Matrix invert(Matrix m) {
  const std::size_t n = m.size();
  Matrix inv_m(n, std::vector<std::uint8_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv_m[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) throw std::runtime_error("gf256: singular matrix");
    std::swap(m[pivot], m[col]);
    std::swap(inv_m[pivot], inv_m[col]);
    const std::uint8_t scale = inv(m[col][col]);
    for (std::size_t j = 0; j < n; ++j) {
      m[col][j] = mul(m[col][j], scale);
      inv_m[col][j] = mul(inv_m[col][j], scale);
    }
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || m[row][col] == 0) continue;
      const std::uint8_t f = m[row][col];
      for (std::size_t j = 0; j < n; ++j) {
        m[row][j] ^= mul(f, m[col][j]);
        inv_m[row][j] ^= mul(f, inv_m[col][j]);
      }
    }
  }
  return inv_m;
}

// Systematic generator: rows of V (x_i^j, distinct x_i) times V_top^{-1}.
// Any k rows of V are invertible, so any k rows of G are too.
Matrix generator(int n_total, int k_data) {
  Matrix v(n_total, std::vector<std::uint8_t>(k_data));
  for (int i = 0; i < n_total; ++i) {
    std::uint8_t p = 1;
    for (int j = 0; j < k_data; ++j) {
      v[i][j] = p;
      p = mul(p, static_cast<std::uint8_t>(i));
    }
  }
  Matrix top(k_data, std::vector<std::uint8_t>(k_data));
  for (int i = 0; i < k_data; ++i) top[i] = v[i];
  const Matrix top_inv = invert(std::move(top));
  Matrix g(n_total, std::vector<std::uint8_t>(k_data, 0));
  for (int i = 0; i < n_total; ++i)
    for (int j = 0; j < k_data; ++j) {
      std::uint8_t acc = 0;
      for (int m = 0; m < k_data; ++m) acc ^= mul(v[i][m], top_inv[m][j]);
      g[i][j] = acc;
    }
  return g;
}

}  // namespace gf256

void MdsCode::validate() const {
  if (k_data < 1) throw std::invalid_argument("MdsCode: k_data must be >= 1");
  if (n_total < k_data) throw std::invalid_argument("MdsCode: n_total must be >= k_data");
  if (n_total > 255) throw std::invalid_argument("MdsCode: n_total must not exceed 255 over GF(256)");
}

std::vector<BitVec> mds_encode(const std::vector<BitVec>& data, const MdsCode& code) {
  code.validate();
  if (static_cast<int>(data.size()) != code.k_data)
    throw std::invalid_argument("mds_encode: need exactly k_data blocks");
  const std::uint64_t bits = data.empty() ? 0 : data[0].size();
  for (const auto& b : data)
    if (b.size() != bits) throw std::invalid_argument("mds_encode: blocks must be equal-sized");

  std::vector<BitVec> out(data.begin(), data.end());
  if (code.n_total == code.k_data) return out;  // identity code

  const gf256::Matrix g = gf256::generator(code.n_total, code.k_data);
  const std::size_t nbytes = data[0].bytes().size();
  for (int row = code.k_data; row < code.n_total; ++row) {
    BitVec parity(bits);
    auto& pb = parity.bytes();
    for (int j = 0; j < code.k_data; ++j) {
      const std::uint8_t coeff = g[row][j];
      if (coeff == 0) continue;
      const auto& src = data[j].bytes();
      for (std::size_t b = 0; b < nbytes; ++b) pb[b] ^= gf256::mul(coeff, src[b]);
    }
    out.push_back(std::move(parity));
  }
  return out;
}

std::vector<BitVec> mds_decode(std::span<const int> indices, const std::vector<BitVec>& blocks,
                               const MdsCode& code) {
  code.validate();
  if (indices.size() != blocks.size())
    throw std::invalid_argument("mds_decode: indices/blocks size mismatch");
  if (static_cast<int>(blocks.size()) < code.k_data)
    throw std::invalid_argument("mds_decode: fewer than k_data blocks, unrecoverable");
  std::vector<int> seen;
  for (const int i : indices) {
    if (i < 0 || i >= code.n_total) throw std::invalid_argument("mds_decode: block index out of range");
    if (std::find(seen.begin(), seen.end(), i) != seen.end())
      throw std::invalid_argument("mds_decode: duplicate block index");
    seen.push_back(i);
  }
  const std::uint64_t bits = blocks[0].size();
  for (const auto& b : blocks)
    if (b.size() != bits) throw std::invalid_argument("mds_decode: blocks must be equal-sized");

  const gf256::Matrix g = gf256::generator(code.n_total, code.k_data);
  gf256::Matrix sub(code.k_data, std::vector<std::uint8_t>(code.k_data));
  for (int i = 0; i < code.k_data; ++i) sub[i] = g[indices[i]];
  const gf256::Matrix dec = gf256::invert(std::move(sub));

  const std::size_t nbytes = blocks[0].bytes().size();
  std::vector<BitVec> data(code.k_data, BitVec(bits));
  for (int i = 0; i < code.k_data; ++i) {
    auto& db = data[i].bytes();
    for (int j = 0; j < code.k_data; ++j) {
      const std::uint8_t coeff = dec[i][j];
      if (coeff == 0) continue;
      const auto& src = blocks[j].bytes();
      for (std::size_t b = 0; b < nbytes; ++b) db[b] ^= gf256::mul(coeff, src[b]);
    }
  }
  return data;
}

std::vector<BitVec> mds_blocks_for_codeword(const MulticastCodeword& codeword, int diversity,
                                            int n_edge_nodes) {
  if (diversity < 1) throw std::invalid_argument("mds_blocks_for_codeword: diversity must be >= 1");
  BitVec payload;
  for (const auto& b : codeword.blocks) payload.append(b);
  if (payload.size() == 0) return {};
  if (payload.size() % diversity != 0)
    throw std::invalid_argument(
        "mds_blocks_for_codeword: payload not divisible into diversity blocks (padding mismatch)");
  const std::uint64_t piece = payload.size() / diversity;
  std::vector<BitVec> data;
  data.reserve(diversity);
  for (int i = 0; i < diversity; ++i) data.push_back(payload.slice(i * piece, piece));
  return mds_encode(data, MdsCode{n_edge_nodes, diversity});
}

MulticastCodeword codeword_from_mds_blocks(std::span<const int> indices,
                                           const std::vector<BitVec>& blocks,
                                           const MulticastCodeword& header, int diversity,
                                           int n_edge_nodes) {
  const std::vector<BitVec> data = mds_decode(indices, blocks, MdsCode{n_edge_nodes, diversity});
  BitVec payload;
  for (const auto& b : data) payload.append(b);
  MulticastCodeword cw = header;
  cw.blocks.clear();
  const std::uint64_t n_blocks = binomial(header.num_users, header.cache_param + 1);
  if (payload.size() != n_blocks * header.block_bits)
    throw std::invalid_argument("codeword_from_mds_blocks: payload size mismatch");
  for (std::uint64_t i = 0; i < n_blocks; ++i)
    cw.blocks.push_back(payload.slice(i * header.block_bits, header.block_bits));
  return cw;
}

double delivery_latency(const std::array<LayerSpec, 2>& layers, const SystemParams& params) {
  if (!(params.bandwidth_hz > 0.0)) throw std::domain_error("delivery_latency: bandwidth must be positive");
  if (!(params.samples_per_file > 0.0))
    throw std::domain_error("delivery_latency: samples_per_file must be positive");
  if (params.n_users < 1) throw std::domain_error("delivery_latency: n_users must be >= 1");
  double total = 0.0;
  for (const LayerSpec& l : layers) {
    if (!(l.rate_channel > 0.0)) throw std::domain_error("delivery_latency: rate_channel must be positive");
    if (l.diversity < 1) throw std::domain_error("delivery_latency: diversity must be >= 1");
    if (!(l.cache_fraction >= 0.0 && l.cache_fraction <= 1.0))
      throw std::domain_error("delivery_latency: cache_fraction must lie in [0,1]");
    const double len = codeword_length_bits(params.samples_per_file, l.rate_source,
                                            params.n_users, l.cache_fraction);
    total += len / (params.bandwidth_hz * l.rate_channel * l.diversity);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  return v;
}

constexpr std::uint8_t kOrderColex = 0;

}  // namespace

std::vector<std::uint8_t> serialize(const MulticastCodeword& codeword) {
  std::vector<std::uint8_t> out;
  out.push_back(codeword.layer);
  put_u16(out, codeword.num_users);
  put_u16(out, codeword.cache_param);
  put_u64(out, codeword.block_bits);
  put_u64(out, codeword.pad_bits);
  out.push_back(kOrderColex);
  const std::size_t block_bytes = (codeword.block_bits + 7) / 8;
  for (const auto& b : codeword.blocks) {
    if (b.size() != codeword.block_bits)
      throw std::invalid_argument("serialize: block size mismatch");
    out.insert(out.end(), b.bytes().begin(), b.bytes().end());
    if (b.bytes().size() != block_bytes) throw std::logic_error("serialize: byte size mismatch");
  }
  return out;
}

MulticastCodeword deserialize(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 1 + 2 + 2 + 8 + 8 + 1;
  if (bytes.size() < kHeader) throw std::invalid_argument("deserialize: truncated header");
  MulticastCodeword cw;
  cw.layer = bytes[0];
  cw.num_users = get_u16(bytes, 1);
  cw.cache_param = get_u16(bytes, 3);
  cw.block_bits = get_u64(bytes, 5);
  cw.pad_bits = get_u64(bytes, 13);
  if (bytes[21] != kOrderColex) throw std::invalid_argument("deserialize: unknown subset order tag");
  if (cw.cache_param > cw.num_users) throw std::invalid_argument("deserialize: invalid header");
  const std::uint64_t n_blocks = binomial(cw.num_users, cw.cache_param + 1);
  const std::size_t block_bytes = (cw.block_bits + 7) / 8;
  if (bytes.size() != kHeader + n_blocks * block_bytes)
    throw std::invalid_argument("deserialize: payload size mismatch");
  std::size_t at = kHeader;
  cw.blocks.reserve(n_blocks);
  for (std::uint64_t i = 0; i < n_blocks; ++i) {
    BitVec b(cw.block_bits);
    std::memcpy(b.bytes().data(), bytes.data() + at, block_bytes);
    if (cw.block_bits % 8 != 0 && !b.bytes().empty()) {
      const std::uint8_t mask = static_cast<std::uint8_t>((1u << (cw.block_bits % 8)) - 1);
      if (b.bytes().back() & ~mask) throw std::invalid_argument("deserialize: nonzero padding bits");
    }
    at += block_bytes;
    cw.blocks.push_back(std::move(b));
  }
  return cw;
}

}  // namespace ccl::caching
