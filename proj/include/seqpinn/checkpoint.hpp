#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/grid.hpp"  // fnv1a + byte helpers
#include "seqpinn/influence.hpp"
#include "seqpinn/trainer.hpp"

namespace seqpinn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline std::string blob_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "interval_%03d.params", index);
  return buf;
}

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr char kBlobMagic[8] = {'S', 'P', 'N', 'P', 'R', 'M', '0', '1'};

/// Parameter blob: magic, count, raw little-endian doubles, FNV-1a of the
/// value bytes. Deterministic, so unchanged intervals re-save byte-identical.
inline void save_param_blob(const std::filesystem::path& path,
                            const std::vector<double>& values) {
  std::vector<unsigned char> buf;
  buf.reserve(16 + values.size() * 8 + 8);
  for (char c : kBlobMagic) buf.push_back(static_cast<unsigned char>(c));
  put_u64(buf, values.size());
  const std::size_t payload = buf.size();
  for (double v : values) put_f64(buf, v);
  const std::uint64_t sum = fnv1a(buf.data() + payload, values.size() * 8);
  put_u64(buf, sum);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("checkpoint: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out.flush()) throw format_error("checkpoint: write failed: " + path.string());
}

inline std::vector<double> load_param_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("checkpoint: missing blob " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  ByteReader r(buf.data(), buf.size());
  const unsigned char* magic = r.raw(8);
  if (std::memcmp(magic, kBlobMagic, 8) != 0)
    throw format_error("checkpoint: bad blob magic in " + path.string());
  const std::uint64_t count = r.u64();
  if (r.remaining() < count * 8 + 8)
    throw format_error("checkpoint: truncated blob " + path.string());
  const std::uint64_t sum = fnv1a(buf.data() + 16, count * 8);
  std::vector<double> values(count);
  for (auto& v : values) v = r.f64();
  if (r.u64() != sum)
    throw format_error("checkpoint: checksum mismatch in " + path.string());
  return values;
}

}  // namespace detail

/// Writes a manifest plus one parameter blob per interval into `dir`.
inline void save_checkpoint(const ComposedSolution& sol,
                            const std::filesystem::path& dir) {
  if (sol.intervals.empty())
    throw config_error("checkpoint: nothing to save");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw format_error("checkpoint: cannot create " + dir.string());

  std::ofstream man(dir / "solution.manifest", std::ios::binary);
  if (!man)
    throw format_error("checkpoint: cannot open manifest in " + dir.string());
  man << "format_version = " << kCheckpointVersion << '\n';
  man << "problem = " << problem_name(sol.problem.id) << '\n';
  man << "precision = " << sol.precision << '\n';
  man << "intervals = " << sol.intervals.size() << '\n';
  for (const TrainedInterval& iv : sol.intervals) {
    man << "\n[interval " << iv.index << "]\n";
    man << "t_lo = " << detail::g17(iv.t_lo) << '\n';
    man << "t_hi = " << detail::g17(iv.t_hi) << '\n';
    man << "seed = " << iv.interval_seed << '\n';
    man << "depth = " << iv.spec.depth << '\n';
    man << "width = " << iv.spec.width << '\n';
    man << "embedding = "
        << (iv.spec.embedding == Embedding::fourier ? "fourier" : "raw")
        << '\n';
    man << "fourier_modes = " << iv.spec.fourier_modes << '\n';
    man << "fourier_period = " << detail::g17(iv.spec.fourier_period) << '\n';
    man << "params = " << detail::blob_name(iv.index) << '\n';
    if (iv.influence) {
      const InfluenceSpec& inf = *iv.influence;
      man << "family = " << family_name(inf.family) << '\n';
      man << "p_mode = "
          << (inf.p_mode == InfluenceSpec::PMode::trainable ? "trainable"
                                                            : "fixed")
          << '\n';
      man << "epsilon = " << detail::g17(inf.epsilon) << '\n';
      if (inf.p_mode == InfluenceSpec::PMode::trainable)
        man << "rho = " << detail::g17(inf.rho) << '\n';
      man << "p = " << detail::g17(inf.resolved_p()) << '\n';
    } else {
      man << "family = none\n";
    }
    detail::save_param_blob(dir / detail::blob_name(iv.index), iv.params);
  }
  if (!man.flush())
    throw format_error("checkpoint: manifest write failed in " + dir.string());
}

namespace detail {

struct ManifestSection {
  std::map<std::string, std::string> kv;
  const std::string& get(const std::string& key,
                         const std::string& where) const {
    auto it = kv.find(key);
    if (it == kv.end())
      throw format_error("checkpoint: manifest missing '" + key + "' in " +
                         where);
    return it->second;
  }
};

}  // namespace detail

inline ComposedSolution load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream man(dir / "solution.manifest");
  if (!man)
    throw format_error("checkpoint: no manifest in " + dir.string());

  detail::ManifestSection head;
  std::vector<detail::ManifestSection> sections;
  detail::ManifestSection* cur = &head;
  std::string line;
  while (std::getline(man, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      sections.emplace_back();
      cur = &sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw format_error("checkpoint: bad manifest line: " + line);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cur->kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  if (std::stoul(head.get("format_version", "header")) != kCheckpointVersion)
    throw format_error("checkpoint: unsupported format version");
  ComposedSolution sol;
  sol.problem = make_problem(head.get("problem", "header"));
  sol.precision = head.get("precision", "header");
  const std::size_t n = std::stoul(head.get("intervals", "header"));
  if (sections.size() != n)
    throw format_error("checkpoint: manifest lists " + std::to_string(n) +
                       " intervals but has " + std::to_string(sections.size()) +
                       " sections");

  for (std::size_t i = 0; i < n; ++i) {
    const detail::ManifestSection& s = sections[i];
    const std::string where = "interval " + std::to_string(i + 1);
    TrainedInterval iv;
    iv.index = static_cast<int>(i) + 1;
    iv.t_lo = std::stod(s.get("t_lo", where));
    iv.t_hi = std::stod(s.get("t_hi", where));
    iv.interval_seed = std::stoull(s.get("seed", where));
    iv.spec.depth = std::stoi(s.get("depth", where));
    iv.spec.width = std::stoi(s.get("width", where));
    const std::string emb = s.get("embedding", where);
    if (emb == "fourier")
      iv.spec.embedding = Embedding::fourier;
    else if (emb == "raw")
      iv.spec.embedding = Embedding::raw;
    else
      throw format_error("checkpoint: unknown embedding '" + emb + "'");
    iv.spec.fourier_modes = std::stoi(s.get("fourier_modes", where));
    iv.spec.fourier_period = std::stod(s.get("fourier_period", where));
    iv.spec.t_lo = iv.t_lo;
    iv.spec.t_hi = iv.t_hi;
    iv.spec.validate();

    const std::string fam = s.get("family", where);
    if (fam != "none") {
      InfluenceSpec inf;
      inf.family = parse_family(fam);
      inf.t_start = iv.t_lo;
      inf.t_end = iv.t_hi;
      inf.epsilon = std::stod(s.get("epsilon", where));
      if (s.get("p_mode", where) == "trainable") {
        inf.p_mode = InfluenceSpec::PMode::trainable;
        inf.rho = std::stod(s.get("rho", where));
      } else {
        inf.p_mode = InfluenceSpec::PMode::fixed;
        inf.p = std::stod(s.get("p", where));
      }
      inf.validate();
      iv.influence = inf;
    } else if (i != 0) {
      throw format_error("checkpoint: " + where + " lacks an influence spec");
    }

    iv.params = detail::load_param_blob(dir / s.get("params", where));
    if (iv.params.size() != iv.spec.param_count())
      throw format_error("checkpoint: " + where + " blob has " +
                         std::to_string(iv.params.size()) +
                         " values, expected " +
                         std::to_string(iv.spec.param_count()));
    sol.intervals.push_back(std::move(iv));
  }
  return sol;
}

/// Exclusive advisory lock on an output directory (single writer).
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir)
      : path_(dir / ".lock") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw format_error("lock: cannot create " + dir.string());
    if (std::filesystem::exists(path_))
      throw format_error("lock: output directory is already locked: " +
                         dir.string() + " (remove .lock if stale)");
    std::ofstream f(path_);
    if (!f) throw format_error("lock: cannot create " + path_.string());
    f << "locked\n";
  }
  ~DirectoryLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace seqpinn
