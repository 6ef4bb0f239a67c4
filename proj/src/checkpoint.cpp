#include "movsrc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace movsrc {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'O', 'V', 'S', 'R', 'C', 'C', 'K'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out_.append(raw, sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }
  void put_doubles(const double* data, std::size_t n) { put_bytes(data, n * sizeof(double)); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  void get_doubles(double* out, std::size_t n) { std::memcpy(out, take(n * sizeof(double)), n * sizeof(double)); }
  std::string get_string(std::size_t n) { return std::string(take(n), n); }
  std::size_t position() const { return pos_; }

  std::size_t get_count() {
    const auto n = get<std::uint64_t>();
    if (n > in_.size()) throw CheckpointError("checkpoint: implausible element count");
    return static_cast<std::size_t>(n);
  }

 private:
  const char* take(std::size_t n) {
    if (pos_ + n > in_.size()) throw CheckpointError("checkpoint: truncated file");
    const char* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_checkpoint(const ChainRecord& record) {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(record.seed);
  w.put<double>(record.delta);
  w.put<double>(record.beta);
  w.put<std::uint64_t>(record.burn_in);
  w.put<std::uint64_t>(record.thinning);
  w.put<std::uint64_t>(record.target_samples);
  const auto dim = static_cast<std::uint64_t>(record.current.size());
  w.put<std::uint64_t>(dim);

  w.put<std::uint64_t>(record.log_likelihood.size());
  w.put_doubles(record.log_likelihood.data(), record.log_likelihood.size());
  w.put<std::uint64_t>(record.accepted.size());
  w.put_bytes(record.accepted.data(), record.accepted.size());

  const std::size_t probe_len = record.probes.empty() ? 0 : record.probes.front().size();
  w.put<std::uint64_t>(record.probes.size());
  w.put<std::uint64_t>(probe_len);
  for (const auto& probe : record.probes) {
    if (probe.size() != probe_len) throw CheckpointError("checkpoint: ragged probe traces");
    w.put_doubles(probe.data(), probe.size());
  }

  w.put<std::uint64_t>(record.snapshots.size());
  for (std::size_t j = 0; j < record.snapshots.size(); ++j) {
    if (static_cast<std::uint64_t>(record.snapshots[j].size()) != dim) {
      throw CheckpointError("checkpoint: snapshot dimension mismatch");
    }
    w.put<std::uint64_t>(record.snapshot_index[j]);
    w.put_doubles(record.snapshots[j].data(), dim);
  }
  w.put_doubles(record.current.data(), dim);
  w.put<double>(record.current_log_likelihood);
  w.put<std::uint64_t>(record.rng_state.size());
  w.put_bytes(record.rng_state.data(), record.rng_state.size());
  w.put<std::uint64_t>(fnv1a64(w.str()));
  return std::move(w.str());
}

ChainRecord decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("checkpoint: not a chain checkpoint");
  }
  // The version comes before the checksum: another version may lay out
  // (and hash) its body differently.
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof(kMagic), sizeof(version));
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const std::string_view body(bytes.data(), bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored_hash;
  std::memcpy(&stored_hash, bytes.data() + body.size(), sizeof(stored_hash));
  if (stored_hash != fnv1a64(body)) throw CheckpointError("checkpoint: checksum mismatch");

  Reader r(body);
  r.get_string(sizeof(kMagic));
  r.get<std::uint32_t>();
  ChainRecord record;
  record.seed = r.get<std::uint64_t>();
  record.delta = r.get<double>();
  record.beta = r.get<double>();
  record.burn_in = r.get<std::uint64_t>();
  record.thinning = r.get<std::uint64_t>();
  record.target_samples = r.get<std::uint64_t>();
  const auto dim = static_cast<Eigen::Index>(r.get_count());

  record.log_likelihood.resize(r.get_count());
  r.get_doubles(record.log_likelihood.data(), record.log_likelihood.size());
  record.accepted.resize(r.get_count());
  for (auto& flag : record.accepted) flag = r.get<std::uint8_t>();

  const std::size_t n_probes = r.get_count();
  const std::size_t probe_len = r.get_count();
  record.probes.assign(n_probes, std::vector<double>(probe_len));
  for (auto& probe : record.probes) r.get_doubles(probe.data(), probe_len);

  const std::size_t n_snap = r.get_count();
  for (std::size_t j = 0; j < n_snap; ++j) {
    record.snapshot_index.push_back(r.get<std::uint64_t>());
    Eigen::VectorXd s(dim);
    r.get_doubles(s.data(), static_cast<std::size_t>(dim));
    record.snapshots.push_back(std::move(s));
  }
  record.current.resize(dim);
  r.get_doubles(record.current.data(), static_cast<std::size_t>(dim));
  record.current_log_likelihood = r.get<double>();
  record.rng_state = r.get_string(r.get_count());
  if (r.position() != body.size()) throw CheckpointError("checkpoint: trailing bytes");
  return record;
}

void save_checkpoint(const std::filesystem::path& path, const ChainRecord& record) {
  const std::string bytes = encode_checkpoint(record);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ChainRecord load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace movsrc
