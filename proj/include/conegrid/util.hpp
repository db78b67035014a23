#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

namespace conegrid {

// Fixed-width bitset used for reachability rows.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(int n) : n_(n), w_((n + 63) / 64, 0) {}

  int size() const { return n_; }
  bool test(int i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(int i) { w_[i >> 6] |= uint64_t(1) << (i & 63); }
  void reset(int i) { w_[i >> 6] &= ~(uint64_t(1) << (i & 63)); }

  Bitset& operator|=(const Bitset& o) {
    for (size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
    return *this;
  }
  Bitset& operator&=(const Bitset& o) {
    for (size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
    return *this;
  }
  bool operator==(const Bitset& o) const { return n_ == o.n_ && w_ == o.w_; }

  int count() const {
    int c = 0;
    for (uint64_t x : w_) c += __builtin_popcountll(x);
    return c;
  }

 private:
  int n_ = 0;
  std::vector<uint64_t> w_;
};

// Reflexive reachability relation over graph nodes; row p holds J+(p).
struct Relation {
  int n = 0;
  std::vector<Bitset> rows;

  Relation() = default;
  explicit Relation(int nodes) : n(nodes), rows(nodes, Bitset(nodes)) {}

  bool related(int p, int q) const { return rows[p].test(q); }

  void intersect_with(const Relation& o) {
    for (int i = 0; i < n; ++i) rows[i] &= o.rows[i];
  }
  bool operator==(const Relation& o) const { return n == o.n && rows == o.rows; }

  long long pair_count() const {
    long long c = 0;
    for (const auto& r : rows) c += r.count();
    return c;
  }
};

// FNV-1a, used for config hashes in output manifests.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Deterministic static-partition parallel map: f(i) for i in [0, n).
// Results must be written to preallocated slots by index.
template <typename F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  int t = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int k = 0; k < t; ++k) {
    pool.emplace_back([&, k] {
      for (int i = k; i < n; i += t) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace conegrid
