#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dkc/metric.hpp"
#include "dkc/random.hpp"

namespace dkc {

/// An update stream plus what its header declares.
///
/// Text format, one record per line, '#' starts a comment:
///   I <id> <c1> ... <cD>     insert with coordinates
///   D <id>                   delete
/// Matrix streams start with `M <n>` followed by n rows of n distances; their
/// inserts are `I <id>` and the id is the matrix row.
/// A header comment `# dkc-stream key=value ...` carries dmin, dmax, dim,
/// n_max and the generator description.
struct Stream {
  std::vector<UpdateEvent> events;
  std::optional<DistanceMatrix> matrix;
  std::optional<MetricBounds> bounds;
  std::size_t dim = 0;
  std::size_t n_max = 0;
  std::map<std::string, std::string> header;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] inline void parse_error(std::size_t line, const std::string& what) {
  throw InvalidArgument("stream line " + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline Stream read_stream(std::istream& in) {
  Stream s;
  std::string line;
  std::size_t lineno = 0;
  std::size_t matrix_rows_left = 0;
  std::vector<std::vector<double>> rows;
  auto finish_matrix = [&] {
    s.matrix = DistanceMatrix::from_rows(rows);
    rows.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# dkc-stream", 0) == 0) {
      std::istringstream hs(line.substr(12));
      std::string kv;
      while (hs >> kv) {
        const auto eq = kv.find('=');
        if (eq != std::string::npos) s.header[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      continue;
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (matrix_rows_left > 0) {
      std::vector<double> row;
      double v;
      while (ls >> v) row.push_back(v);
      rows.push_back(std::move(row));
      if (--matrix_rows_left == 0) finish_matrix();
      continue;
    }
    std::string tag;
    ls >> tag;
    if (tag == "M") {
      if (s.matrix || !s.events.empty()) detail::parse_error(lineno, "matrix header must come first");
      std::size_t n = 0;
      if (!(ls >> n) || n == 0) detail::parse_error(lineno, "bad matrix size");
      matrix_rows_left = n;
    } else if (tag == "I") {
      std::uint64_t id;
      if (!(ls >> id)) detail::parse_error(lineno, "missing id");
      if (s.matrix) {
        s.events.push_back(UpdateEvent::insert_row(point_id(id), id));
      } else {
        std::vector<double> pos;
        double v;
        while (ls >> v) pos.push_back(v);
        if (pos.empty()) detail::parse_error(lineno, "insert without coordinates");
        if (s.dim == 0) s.dim = pos.size();
        if (pos.size() != s.dim) detail::parse_error(lineno, "inconsistent dimension");
        s.events.push_back(UpdateEvent::insert(point_id(id), std::move(pos)));
      }
    } else if (tag == "D") {
      std::uint64_t id;
      if (!(ls >> id)) detail::parse_error(lineno, "missing id");
      s.events.push_back(UpdateEvent::erase(point_id(id)));
    } else {
      detail::parse_error(lineno, "unknown record '" + tag + "'");
    }
  }
  if (matrix_rows_left > 0) detail::parse_error(lineno, "truncated matrix");
  auto num = [&](const char* key) -> std::optional<double> {
    auto it = s.header.find(key);
    if (it == s.header.end()) return std::nullopt;
    return std::stod(it->second);
  };
  if (auto lo = num("dmin"), hi = num("dmax"); lo && hi) s.bounds = MetricBounds{*lo, *hi};
  if (auto n = num("n_max")) s.n_max = static_cast<std::size_t>(*n);
  return s;
}

inline void write_stream(std::ostream& out, const Stream& s) {
  out << "# dkc-stream";
  for (const auto& [k, v] : s.header) out << ' ' << k << '=' << v;
  out << '\n';
  if (s.matrix) {
    out << "M " << s.matrix->size() << '\n';
    for (std::size_t i = 0; i < s.matrix->size(); ++i) {
      for (std::size_t j = 0; j < s.matrix->size(); ++j)
        out << (j ? " " : "") << detail::format_real((*s.matrix)(i, j));
      out << '\n';
    }
  }
  for (const UpdateEvent& e : s.events) {
    if (e.kind == UpdateEvent::Kind::erase) {
      out << "D " << to_u64(e.id) << '\n';
      continue;
    }
    out << "I " << to_u64(e.id);
    for (double c : e.position) out << ' ' << detail::format_real(c);
    out << '\n';
  }
}

/// Synthetic stream recipe. Coordinates live on the integer grid [0, side]^dim,
/// so distinct points are at distance >= 1 and d_max = side * sqrt(dim).
struct StreamSpec {
  enum class Kind { uniform_box, gaussian_blobs, sliding_window, adversarial_duplicates };
  Kind kind = Kind::uniform_box;
  std::size_t clusters = 5;  // gaussian_blobs
  std::size_t window = 100;  // sliding_window; also its n_max
  std::size_t n_max = 1000;
  std::size_t updates = 1000;  // T
  double insert_frac = 0.5;    // after the initial fill
  std::size_t dim = 2;
  double side = 1000.0;
  std::uint64_t seed = 1;

  MetricBounds bounds() const { return {1.0, side * std::sqrt(static_cast<double>(dim))}; }
  std::string describe() const {
    switch (kind) {
      case Kind::uniform_box: return "uniform-box";
      case Kind::gaussian_blobs: return "gaussian-blobs:" + std::to_string(clusters);
      case Kind::sliding_window: return "sliding-window:" + std::to_string(window);
      case Kind::adversarial_duplicates: return "adversarial-duplicates";
    }
    return "?";
  }
};

/// Parses `uniform-box`, `gaussian-blobs:C`, `sliding-window:W`,
/// `adversarial-duplicates` into the generator fields of `base`.
inline StreamSpec parse_generator(const std::string& text, StreamSpec base = {}) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::optional<std::size_t> arg;
  if (colon != std::string::npos) {
    try {
      arg = std::stoul(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("bad generator argument in '" + text + "'");
    }
  }
  if (name == "uniform-box") {
    base.kind = StreamSpec::Kind::uniform_box;
  } else if (name == "gaussian-blobs") {
    base.kind = StreamSpec::Kind::gaussian_blobs;
    if (arg) base.clusters = *arg;
  } else if (name == "sliding-window") {
    base.kind = StreamSpec::Kind::sliding_window;
    if (arg) base.window = *arg;
  } else if (name == "adversarial-duplicates") {
    base.kind = StreamSpec::Kind::adversarial_duplicates;
  } else {
    throw InvalidArgument("unknown generator '" + name + "'");
  }
  return base;
}

namespace detail {

inline double standard_normal(Rng& rng) {
  double u = unit_real(rng);
  while (u <= 0.0) u = unit_real(rng);
  const double v = unit_real(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

class PointSource {
 public:
  PointSource(const StreamSpec& spec, Rng& rng) : spec_(spec), rng_(rng) {
    if (spec.kind == StreamSpec::Kind::gaussian_blobs) {
      for (std::size_t c = 0; c < spec.clusters; ++c) sites_.push_back(random_point(0.1, 0.9));
    } else if (spec.kind == StreamSpec::Kind::adversarial_duplicates) {
      const std::size_t n = std::max<std::size_t>(2, spec.n_max / 8);
      for (std::size_t c = 0; c < n; ++c) sites_.push_back(random_point(0.0, 1.0));
    }
  }

  std::vector<double> next() {
    switch (spec_.kind) {
      case StreamSpec::Kind::gaussian_blobs: {
        const auto& site = sites_[uniform_below(rng_, sites_.size())];
        const double sigma = spec_.side / 50.0;
        std::vector<double> p(spec_.dim);
        for (std::size_t d = 0; d < spec_.dim; ++d)
          p[d] = std::clamp(std::round(site[d] + sigma * standard_normal(rng_)), 0.0, spec_.side);
        return p;
      }
      case StreamSpec::Kind::adversarial_duplicates:
        return sites_[uniform_below(rng_, sites_.size())];
      default:
        return random_point(0.0, 1.0);
    }
  }

 private:
  std::vector<double> random_point(double lo, double hi) {
    const auto a = static_cast<std::uint64_t>(std::ceil(lo * spec_.side));
    const auto b = static_cast<std::uint64_t>(std::floor(hi * spec_.side));
    std::vector<double> p(spec_.dim);
    for (double& c : p) c = static_cast<double>(a + uniform_below(rng_, b - a + 1));
    return p;
  }

  const StreamSpec& spec_;
  Rng& rng_;
  std::vector<std::vector<double>> sites_;
};

}  // namespace detail

/// Deterministic stream for spec.seed. Deletions pick a uniformly random live
/// point (sliding window: the oldest). The first n_max updates fill the space.
inline Stream generate(const StreamSpec& spec) {
  if (spec.dim == 0) throw InvalidArgument("dimension must be positive");
  if (!(spec.side >= 1.0)) throw InvalidArgument("box side must be >= 1");
  if (!(spec.insert_frac > 0.0 && spec.insert_frac <= 1.0))
    throw InvalidArgument("insert fraction must lie in (0, 1]");
  if (spec.kind == StreamSpec::Kind::gaussian_blobs && spec.clusters == 0)
    throw InvalidArgument("gaussian-blobs needs at least one cluster");
  const bool window = spec.kind == StreamSpec::Kind::sliding_window;
  const std::size_t cap = window ? spec.window : spec.n_max;
  if (cap == 0) throw InvalidArgument("n_max / window must be positive");

  Rng rng(spec.seed);
  detail::PointSource source(spec, rng);
  Stream s;
  s.dim = spec.dim;
  s.n_max = cap;
  s.bounds = spec.bounds();
  s.header["gen"] = spec.describe();
  s.header["dim"] = std::to_string(spec.dim);
  s.header["dmin"] = detail::format_real(s.bounds->d_min);
  s.header["dmax"] = detail::format_real(s.bounds->d_max);
  s.header["n_max"] = std::to_string(cap);
  s.header["T"] = std::to_string(spec.updates);
  s.header["seed"] = std::to_string(spec.seed);

  std::vector<std::uint64_t> live;  // arrival order for the window, bag otherwise
  std::size_t head = 0;             // window: index of the oldest live id
  std::uint64_t next_id = 0;
  bool filled = false;
  for (std::size_t t = 0; t < spec.updates; ++t) {
    const std::size_t n_live = live.size() - head;
    if (n_live >= cap) filled = true;
    bool insert;
    if (window)
      insert = n_live < cap;
    else if (n_live == 0 || !filled)
      insert = true;
    else if (n_live >= cap)
      insert = false;
    else
      insert = unit_real(rng) < spec.insert_frac;

    if (insert) {
      s.events.push_back(UpdateEvent::insert(point_id(next_id), source.next()));
      live.push_back(next_id++);
    } else if (window) {
      s.events.push_back(UpdateEvent::erase(point_id(live[head++])));
    } else {
      const std::size_t pick = uniform_below(rng, live.size());
      s.events.push_back(UpdateEvent::erase(point_id(live[pick])));
      live[pick] = live.back();
      live.pop_back();
    }
  }
  return s;
}

}  // namespace dkc
