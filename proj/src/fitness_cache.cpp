#include "alphaforge/fitness_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace alphaforge {

const char* sentinel_reason_name(SentinelReason r) {
  switch (r) {
    case SentinelReason::None: return "none";
    case SentinelReason::Redundant: return "redundant";
    case SentinelReason::NonFinite: return "non_finite";
    case SentinelReason::CutoffViolation: return "cutoff_violation";
  }
  return "unknown";
}

FitnessRecord FitnessRecord::make_sentinel(SentinelReason why) {
  FitnessRecord r;
  r.ic = kSentinelFitness;
  r.sentinel = true;
  r.reason = why;
  return r;
}

CacheCounters FitnessCache::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

std::size_t FitnessCache::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::optional<FitnessRecord> FitnessCache::find(const Fingerprint& f) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(f);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void FitnessCache::store(const Fingerprint& f, const FitnessRecord& r) {
  std::lock_guard lock(mu_);
  records_[f] = r;
}

FitnessRecord lookup_or_evaluate(const AlphaProgram& p, FitnessCache& cache,
                                 const Evaluator& evaluate) {
  PruneResult pr = prune_redundant_ops(p);
  if (is_redundant_alpha(pr.pruned)) {
    std::lock_guard lock(cache.mu_);
    ++cache.counters_.lookups;
    ++cache.counters_.pruned_redundant_alphas;
    FitnessRecord r = FitnessRecord::make_sentinel(SentinelReason::Redundant);
    r.pruned_op_count = pr.removed.size();
    return r;
  }
  const Fingerprint fp = fingerprint(pr.pruned);
  {
    std::lock_guard lock(cache.mu_);
    auto it = cache.records_.find(fp);
    if (it != cache.records_.end()) {
      ++cache.counters_.lookups;
      ++cache.counters_.hits;
      FitnessRecord r = it->second;
      r.cache_hit = true;
      r.pruned_op_count = pr.removed.size();
      return r;
    }
  }
  FitnessRecord r = evaluate(pr.pruned);
  r.fingerprint = fp;
  r.pruned_op_count = pr.removed.size();
  r.cache_hit = false;
  std::lock_guard lock(cache.mu_);
  ++cache.counters_.lookups;
  ++cache.counters_.evaluations;
  cache.records_[fp] = r;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'F', 'C', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated fitness cache file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

}  // namespace

void FitnessCache::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::lock_guard lock(mu_);
  os.write(kMagic, 4);
  write_u64(os, records_.size());
  for (const auto& [fp, r] : records_) {
    os.write(reinterpret_cast<const char*>(fp.bytes.data()), 16);
    write_f64(os, r.fitness());
    write_u64(os, r.val_portfolio_returns.size());
    for (double x : r.val_portfolio_returns) write_f64(os, x);
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void FitnessCache::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a fitness cache file (expected AFC1 header)");
  }
  const std::uint64_t n = read_u64(is);
  std::unordered_map<Fingerprint, FitnessRecord, FingerprintHash> loaded;
  for (std::uint64_t i = 0; i < n; ++i) {
    Fingerprint fp;
    if (!is.read(reinterpret_cast<char*>(fp.bytes.data()), 16)) {
      throw std::runtime_error("truncated fitness cache file");
    }
    FitnessRecord r;
    r.fingerprint = fp;
    r.ic = read_f64(is);
    r.sentinel = r.ic == kSentinelFitness;
    r.reason = r.sentinel ? SentinelReason::NonFinite : SentinelReason::None;
    const std::uint64_t len = read_u64(is);
    r.val_portfolio_returns.reserve(len);
    for (std::uint64_t k = 0; k < len; ++k) r.val_portfolio_returns.push_back(read_f64(is));
    loaded[fp] = std::move(r);
  }
  std::lock_guard lock(mu_);
  for (auto& [fp, r] : loaded) records_[fp] = std::move(r);
}

}  // namespace alphaforge
